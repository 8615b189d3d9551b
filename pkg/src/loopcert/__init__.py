"""Validate rewrite-loop certificates and decide them under strategies."""

from .errors import (
    ArityMismatch,
    ClosingMismatch,
    ExtraRhsVariable,
    LoopcertError,
    MalformedContext,
    NotARedex,
    NotParallel,
    ParseError,
    PositionOutOfTerm,
    RuleIndexOutOfRange,
    ShapeMismatch,
    VariableLhs,
    VariableRedex,
)
from .terms import (
    EMPTY_SUBSTITUTION,
    EPSILON,
    HOLE,
    HOLE_SYMBOL,
    Application,
    Context,
    ContextSubstitution,
    Position,
    PositionRelation,
    Substitution,
    Term,
    Variable,
    apply_context_substitution,
    apply_substitution,
    are_parallel,
    format_position,
    hole_position,
    is_left_of,
    is_prefix,
    is_strict_prefix,
    position_relation,
    positions,
    replace_at,
    subterm_at,
    term_size,
    variable_closure,
    variables_of,
)
from .rewriting import (
    ConcreteStrategy,
    ContextSensitive,
    Forbidden,
    ForbiddenPattern,
    Full,
    Innermost,
    InnermostEncoding,
    Leftmost,
    MaxParallel,
    Outermost,
    OutermostEncoding,
    PatternKind,
    QRestricted,
    Rule,
    Trs,
    builtin_patterns,
    match_many,
    match_pattern,
    parallel_rewrite,
    redex_positions,
    rewrite_at,
    strategy_allows,
)
from .loops import (
    LoopCertificate,
    Step,
    UnrolledDerivation,
    ValidatedLoop,
    unroll_loop,
    validate_loop,
)
from .problems import (
    ExtendedMatchingProblem,
    IdentityProblem,
    MatchingProblem,
    Solvable,
    SolverConfig,
    SolverResult,
    Unknown,
    Unsolvable,
    UnsolvableReason,
    Witness,
    brute_force_check,
    solve_extended,
    solve_identity,
    solve_matching,
    solve_problem,
)
from .deciders import (
    DeciderConfig,
    Evidence,
    ProblemInstance,
    StrategySpec,
    Verdict,
    a_problems,
    b_problems,
    concrete_checks,
    decide_loop,
    h_problems,
    leftmost_problems,
    max_parallel_problems,
    solve_position_equation,
    step_problems,
)
from .formats import (
    TrsDocument,
    certificate_to_document,
    parse_loop_certificate,
    parse_patterns,
    parse_replacement_map,
    parse_term,
    parse_trs,
    parse_trs_document,
    render_loop_certificate,
    render_patterns,
    render_trs,
    render_verdict,
    verdict_to_document,
)
from .cli import find_loops, main, resolve_strategy

__version__ = "0.1.0"
