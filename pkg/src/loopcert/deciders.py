"""Deciding whether a validated loop survives under a strategy.

For each certificate step the decider builds a finite set of matching
problems whose solvability is equivalent to some unrolling of that step
violating the strategy.  All problems unsolvable means the loop is a loop
under the strategy for every unrolling level; one solvable problem refutes
it and yields a concrete violation; anything left unknown keeps the verdict
open.

Problem families by strategy:

* leftmost: a redex to the left of the contracted position could appear in
  the step's own term, inside a pumped substitution image, in the closing
  context, or in an image of a context variable.
* forbidden pattern (lhs, o, kind): the pattern instance could anchor so
  that the contracted position is at / below / above the designated spot.
  Instances strictly above the hole spine need extended problems that pump
  the context as well.
* maximal parallel: same four families as leftmost with "left of" replaced
  by "parallel to all contracted positions".

Innermost and outermost are the forbidden-pattern encodings over the
system's own left-hand sides; the parallel variants check each contracted
position separately and add the maximal-parallel families when required.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import ShapeMismatch, VariableRedex
from .loops import ValidatedLoop, unroll_loop
from .problems import (
    ExtendedMatchingProblem,
    MatchingProblem,
    Problem,
    Solvable,
    SolverConfig,
    SolverResult,
    Unknown,
    Unsolvable,
    solve_problem,
)
from .rewriting import (
    ConcreteStrategy,
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
    Trs,
    builtin_patterns,
    strategy_allows,
)
from .terms import (
    Context,
    ContextSubstitution,
    Position,
    Substitution,
    Term,
    Variable,
    apply_context_substitution,
    apply_substitution,
    is_left_of,
    is_strict_prefix,
    are_parallel,
    format_position,
    positions,
    subterm_at,
    variable_closure,
)

SEQUENTIAL_STRATEGIES = frozenset(
    {
        "full",
        "leftmost",
        "innermost",
        "outermost",
        "leftmost-innermost",
        "leftmost-outermost",
        "forbidden",
    }
)

PARALLEL_STRATEGIES = frozenset(
    {
        "parallel",
        "parallel-innermost",
        "parallel-outermost",
        "max-parallel",
        "max-parallel-innermost",
        "max-parallel-outermost",
    }
)

STRATEGY_NAMES = SEQUENTIAL_STRATEGIES | PARALLEL_STRATEGIES


@dataclass(frozen=True)
class StrategySpec:
    """A decidable strategy: a canonical name, plus patterns when forbidden."""

    name: str
    patterns: tuple[ForbiddenPattern, ...] = ()
    label: str | None = None  # how the user spelled it, for reports

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {self.name!r}")
        if self.patterns and self.name != "forbidden":
            raise ValueError("only the forbidden strategy carries patterns")
        if self.label is None:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class ProblemInstance:
    """A problem plus where it came from, for reporting and evidence."""

    problem: Problem
    family: str
    step: int = 0  # 1-based certificate step
    position: Position | None = None
    rule_index: int | None = None
    pattern: ForbiddenPattern | None = None
    n0: int | None = None
    o0prime: Position | None = None


def _dedup(instances: Iterable[ProblemInstance]) -> tuple[ProblemInstance, ...]:
    seen = set()
    out = []
    for inst in instances:
        if inst.problem not in seen:
            seen.add(inst.problem)
            out.append(inst)
    return tuple(out)


def _subterms_preorder(t: Term) -> list[Term]:
    return [subterm_at(t, p) for p in positions(t)]


def leftmost_problems(
    t: Term, q: Position, c: Context, mu: Substitution, trs: Trs
) -> tuple[ProblemInstance, ...]:
    """Problems solvable iff some unrolling has a redex left of the step."""
    term_side = lambda q2: is_left_of(q2, q)
    ctx_side = lambda p2: is_left_of(p2, c.hole_pos)
    return _split_families(t, c, mu, trs, term_side, ctx_side, "left")


def max_parallel_problems(
    t: Term, qs: Iterable[Position], c: Context, mu: Substitution, trs: Trs
) -> tuple[ProblemInstance, ...]:
    """Problems solvable iff some unrolling leaves a parallel redex uncontracted."""
    qs = tuple(sorted(set(qs)))
    term_side = lambda q2: all(are_parallel(q2, q) for q in qs)
    ctx_side = lambda p2: are_parallel(p2, c.hole_pos)
    return _split_families(t, c, mu, trs, term_side, ctx_side, "parallel")


def _split_families(
    t: Term, c: Context, mu: Substitution, trs: Trs, term_side, ctx_side, prefix: str
) -> tuple[ProblemInstance, ...]:
    out: list[ProblemInstance] = []
    term_positions = [q2 for q2 in positions(t) if term_side(q2)]
    for q2 in term_positions:
        u = subterm_at(t, q2)
        for ri, rule in enumerate(trs.rules):
            out.append(
                ProblemInstance(
                    MatchingProblem(((u, rule.lhs),), mu),
                    f"{prefix}-term",
                    position=q2,
                    rule_index=ri,
                )
            )
    for q2 in term_positions:
        for x in sorted(variable_closure(subterm_at(t, q2), mu)):
            for u in _subterms_preorder(apply_substitution(Variable(x), mu, 1)):
                for ri, rule in enumerate(trs.rules):
                    out.append(
                        ProblemInstance(
                            MatchingProblem(((u, rule.lhs),), mu),
                            f"{prefix}-image",
                            position=q2,
                            rule_index=ri,
                        )
                    )
    ctx_positions = [p2 for p2 in positions(c.body) if ctx_side(p2)]
    for p2 in ctx_positions:
        u = subterm_at(c.body, p2)
        for ri, rule in enumerate(trs.rules):
            out.append(
                ProblemInstance(
                    MatchingProblem(((u, rule.lhs),), mu),
                    f"{prefix}-context",
                    position=p2,
                    rule_index=ri,
                )
            )
    for p2 in ctx_positions:
        for x in sorted(variable_closure(subterm_at(c.body, p2), mu)):
            for u in _subterms_preorder(apply_substitution(Variable(x), mu, 1)):
                for ri, rule in enumerate(trs.rules):
                    out.append(
                        ProblemInstance(
                            MatchingProblem(((u, rule.lhs),), mu),
                            f"{prefix}-context-image",
                            position=p2,
                            rule_index=ri,
                        )
                    )
    return _dedup(out)


def solve_position_equation(
    p: Position, q: Position, o: Position
) -> tuple[int, Position] | None:
    """Least n0 and tail o0' with p^n0 q = o0' o, if the equation has solutions.

    Solutions of p^n q = o' o come in the family (n0 + k, p^k o0'), so one
    base case describes them all.  None means no unrolling lines the pattern
    position up with the contracted position.
    """
    if not p:
        n0 = 0
    else:
        n0 = max(0, math.ceil(max(0, len(o) - len(q)) / len(p)))
    full = p * n0 + q
    if len(full) < len(o) or full[len(full) - len(o):] != o:
        return None
    return n0, full[: len(full) - len(o)]


def _least_n0(p: Position, q: Position, o: Position) -> int:
    """Least n0 with |p^n0 q| >= |o|; used by the above/below families."""
    if not p:
        return 0
    return max(0, math.ceil(max(0, len(o) - len(q)) / len(p)))


def h_problems(
    t: Term,
    q: Position,
    c: Context,
    mu: Substitution,
    pattern: ForbiddenPattern,
) -> tuple[ProblemInstance, ...]:
    """Step forbidden at the designated position itself: zero or one problem."""
    sol = solve_position_equation(c.hole_pos, q, pattern.pos)
    if sol is None:
        return ()
    n0, o0prime = sol
    cs_term = apply_context_substitution(
        t, _closing(c, mu), n0
    )
    subject = subterm_at(cs_term, o0prime)
    return (
        ProblemInstance(
            MatchingProblem(((subject, pattern.lhs),), mu),
            "pattern-here",
            position=q,
            pattern=pattern,
            n0=n0,
            o0prime=o0prime,
        ),
    )


def a_problems(
    t: Term,
    q: Position,
    c: Context,
    mu: Substitution,
    pattern: ForbiddenPattern,
) -> tuple[ProblemInstance, ...]:
    """Step forbidden strictly above the designated position.

    The pattern can anchor inside the contracted subterm (first family) or
    inside a pumped substitution image below it (second family).
    """
    if isinstance(subterm_at(t, q), Variable):
        raise VariableRedex(f"subterm at {format_position(q)} of {t} is a variable")
    p = c.hole_pos
    o = pattern.pos
    n0 = _least_n0(p, q, o)
    base = apply_context_substitution(t, _closing(c, mu), n0)
    redex_pos = p * n0 + q
    out: list[ProblemInstance] = []
    sub_positions = [q2 for q2 in positions(subterm_at(t, q))]
    anchors: set[Position] = set()
    for q2 in sub_positions:
        tip = redex_pos + q2
        for cut in range(len(tip) + 1):
            o2 = tip[:cut]
            if is_strict_prefix(redex_pos, o2 + o):
                anchors.add(o2)
    for o2 in sorted(anchors):
        subject = subterm_at(base, o2)
        out.append(
            ProblemInstance(
                MatchingProblem(((subject, pattern.lhs),), mu),
                "pattern-above-term",
                position=q,
                pattern=pattern,
                n0=n0,
                o0prime=o2,
            )
        )
    for x in sorted(variable_closure(subterm_at(t, q), mu)):
        for u in _subterms_preorder(apply_substitution(Variable(x), mu, 1)):
            out.append(
                ProblemInstance(
                    MatchingProblem(((u, pattern.lhs),), mu),
                    "pattern-above-image",
                    position=q,
                    pattern=pattern,
                    n0=n0,
                )
            )
    return _dedup(out)


def b_problems(
    t: Term,
    q: Position,
    c: Context,
    mu: Substitution,
    pattern: ForbiddenPattern,
) -> tuple[ProblemInstance, ...]:
    """Step forbidden strictly below the designated position.

    Anchors weakly above the contracted position reduce to here-problems at
    the step's own prefixes; anchors crossing the hole spine into outer
    context copies become extended problems that pump the context too.
    """
    p = c.hole_pos
    o = pattern.pos
    out: list[ProblemInstance] = []
    for cut in range(len(q)):
        qbar = q[:cut]
        for inst in h_problems(t, qbar, c, mu, pattern):
            out.append(
                dataclasses.replace(
                    inst, family="pattern-below-prefix", position=q
                )
            )
    for cut in range(len(p)):
        p3 = p[:cut]
        d = c.subcontext(p3)
        p2 = d.hole_pos
        n0 = 0
        while len(p2) + n0 * len(p) <= len(o):
            n0 += 1
        if not is_strict_prefix(o, p2 + p * n0):
            continue
        subject = apply_substitution(
            apply_context_substitution(t, _closing(c, mu), n0), mu, 1
        )
        out.append(
            ProblemInstance(
                ExtendedMatchingProblem(
                    d, pattern.lhs, c.substitute(mu), subject, mu
                ),
                "pattern-below-context",
                position=q,
                pattern=pattern,
                n0=n0,
            )
        )
    return _dedup(out)


def _closing(c: Context, mu: Substitution) -> ContextSubstitution:
    return ContextSubstitution(c, mu)


def step_problems(
    loop: ValidatedLoop,
    trs: Trs,
    spec: StrategySpec,
) -> tuple[ProblemInstance, ...]:
    """All problem instances for the loop under the strategy, in report order."""
    cert = loop.certificate
    c = cert.context
    mu = cert.subst
    if spec.name in SEQUENTIAL_STRATEGIES and not cert.is_sequential():
        raise ShapeMismatch(
            f"strategy {spec.label} applies to single-redex steps only"
        )
    out: list[ProblemInstance] = []
    for i, step in enumerate(cert.steps, start=1):
        t = loop.terms[i - 1]
        qs = [q for q, _ in step]
        for inst in _step_problems_one(t, qs, c, mu, trs, spec):
            out.append(dataclasses.replace(inst, step=i))
    return tuple(out)


def _step_problems_one(
    t: Term,
    qs: list[Position],
    c: Context,
    mu: Substitution,
    trs: Trs,
    spec: StrategySpec,
) -> tuple[ProblemInstance, ...]:
    name = spec.name
    out: list[ProblemInstance] = []
    if name in ("leftmost", "leftmost-innermost", "leftmost-outermost"):
        out.extend(leftmost_problems(t, qs[0], c, mu, trs))
    if name in ("innermost", "leftmost-innermost"):
        out.extend(_pattern_problems(t, qs[0], c, mu, builtin_patterns(InnermostEncoding(), trs)))
    if name in ("outermost", "leftmost-outermost"):
        out.extend(_pattern_problems(t, qs[0], c, mu, builtin_patterns(OutermostEncoding(), trs)))
    if name == "forbidden":
        out.extend(_pattern_problems(t, qs[0], c, mu, spec.patterns))
    if name in ("max-parallel", "max-parallel-innermost", "max-parallel-outermost"):
        out.extend(max_parallel_problems(t, qs, c, mu, trs))
    if name in ("parallel-innermost", "max-parallel-innermost"):
        pats = builtin_patterns(InnermostEncoding(), trs)
        for q in qs:
            out.extend(_pattern_problems(t, q, c, mu, pats))
    if name in ("parallel-outermost", "max-parallel-outermost"):
        pats = builtin_patterns(OutermostEncoding(), trs)
        for q in qs:
            out.extend(_pattern_problems(t, q, c, mu, pats))
    return _dedup(out)


def _pattern_problems(
    t: Term,
    q: Position,
    c: Context,
    mu: Substitution,
    patterns: Iterable[ForbiddenPattern],
) -> list[ProblemInstance]:
    out: list[ProblemInstance] = []
    for pat in patterns:
        if pat.kind is PatternKind.HERE:
            out.extend(h_problems(t, q, c, mu, pat))
        elif pat.kind is PatternKind.ABOVE:
            out.extend(a_problems(t, q, c, mu, pat))
        else:
            out.extend(b_problems(t, q, c, mu, pat))
    return out


@dataclass(frozen=True)
class Evidence:
    instance: ProblemInstance
    result: Solvable
    level: int | None = None  # unrolling level of a confirmed concrete violation
    violation_step: int | None = None  # 1-based step at that level


@dataclass(frozen=True)
class Verdict:
    answer: str  # "yes" | "no" | "unknown"
    strategy: str
    evidence: Evidence | None
    open_problems: tuple[ProblemInstance, ...]
    total: int
    unsolvable: int
    solvable: int
    unknown: int
    bound: int


@dataclass(frozen=True)
class DeciderConfig:
    bound: int = 64
    unroll: int | None = None  # cap for the concrete-violation search
    max_term_size: int = 100_000


def concrete_checks(spec: StrategySpec, trs: Trs) -> tuple[ConcreteStrategy, ...]:
    """Step predicates whose conjunction is the strategy, for replay checks."""
    name = spec.name
    checks: list[ConcreteStrategy] = []
    if name in ("leftmost", "leftmost-innermost", "leftmost-outermost"):
        checks.append(Leftmost())
    if name in ("innermost", "leftmost-innermost", "parallel-innermost", "max-parallel-innermost"):
        checks.append(Innermost())
    if name in ("outermost", "leftmost-outermost", "parallel-outermost", "max-parallel-outermost"):
        checks.append(Outermost())
    if name in ("max-parallel", "max-parallel-innermost", "max-parallel-outermost"):
        checks.append(MaxParallel())
    if name == "forbidden":
        checks.append(Forbidden(spec.patterns))
    if name == "full":
        checks.append(Full())
    return tuple(checks)


def _confirm_violation(
    trs: Trs, loop: ValidatedLoop, spec: StrategySpec, levels: int
) -> tuple[int, int] | None:
    checks = concrete_checks(spec, trs)
    for n in range(levels + 1):
        unrolled = unroll_loop(loop, n)
        for j, step in enumerate(unrolled.steps):
            qs = [q for q, _ in step]
            if not all(
                strategy_allows(unrolled.terms[j], qs, trs, chk) for chk in checks
            ):
                return n, j + 1
    return None


def decide_loop(
    trs: Trs,
    loop: ValidatedLoop,
    spec: StrategySpec,
    config: DeciderConfig = DeciderConfig(),
) -> Verdict:
    instances = step_problems(loop, trs, spec)
    solver_config = SolverConfig(bound=config.bound, max_term_size=config.max_term_size)
    results: list[tuple[ProblemInstance, SolverResult]] = [
        (inst, solve_problem(inst.problem, solver_config)) for inst in instances
    ]
    solvable = [(i, r) for i, r in results if isinstance(r, Solvable)]
    unknown = [(i, r) for i, r in results if isinstance(r, Unknown)]
    n_unsolvable = sum(1 for _, r in results if isinstance(r, Unsolvable))
    counts = dict(
        total=len(results),
        unsolvable=n_unsolvable,
        solvable=len(solvable),
        unknown=len(unknown),
        bound=config.bound,
    )
    if solvable:
        inst, res = solvable[0]
        w = res.witness
        exponent = w.n if w.n is not None else (w.m or 0) + (w.k or 0)
        levels = (
            config.unroll
            if config.unroll is not None
            else exponent + len(loop.certificate.steps) + 4
        )
        confirmed = _confirm_violation(trs, loop, spec, levels)
        level, vstep = confirmed if confirmed is not None else (None, None)
        return Verdict(
            "no",
            spec.label,
            Evidence(inst, res, level, vstep),
            (),
            **counts,
        )
    if unknown:
        return Verdict(
            "unknown", spec.label, None, tuple(i for i, _ in unknown), **counts
        )
    return Verdict("yes", spec.label, None, (), **counts)
