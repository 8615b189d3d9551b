"""Rewrite rules, systems, redex search, and strategy predicates.

A strategy here is a predicate on concrete reduction steps: given a term and
the set of positions contracted in one step, it answers whether the step is
allowed.  Positional strategies (leftmost, innermost, outermost, maximal
parallel) are built in; everything else is expressed through forbidden
patterns, triples (lhs, position, kind) that disallow reduction at, above,
or below an instance of lhs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import (
    ArityMismatch,
    ExtraRhsVariable,
    NotARedex,
    NotParallel,
    PositionOutOfTerm,
    RuleIndexOutOfRange,
    VariableLhs,
)
from .terms import (
    Application,
    HOLE_SYMBOL,
    Position,
    PositionRelation,
    Substitution,
    Term,
    Variable,
    are_parallel,
    format_position,
    is_strict_prefix,
    position_relation,
    positions,
    replace_at,
    subterm_at,
    variables_of,
)


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Variable):
            raise VariableLhs(f"rule left-hand side is a variable: {self.lhs}")
        extra = variables_of(self.rhs) - variables_of(self.lhs)
        if extra:
            raise ExtraRhsVariable(
                f"right-hand side of {self} uses fresh {sorted(extra)}"
            )

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class Trs:
    """A finite list of rules with a consistent signature.

    Rule order is meaningful: certificates refer to rules by 0-based index.
    """

    rules: tuple[Rule, ...]
    variables: frozenset[str]
    signature: tuple[tuple[str, int], ...]

    @staticmethod
    def from_rules(rules: Iterable[Rule], variables: Iterable[str] | None = None) -> "Trs":
        rules = tuple(rules)
        if variables is None:
            names: set[str] = set()
            for r in rules:
                names |= variables_of(r.lhs) | variables_of(r.rhs)
            variables = names
        variables = frozenset(variables)
        arities: dict[str, int] = {}
        for r in rules:
            for t in (r.lhs, r.rhs):
                _collect_signature(t, variables, arities)
        return Trs(rules, variables, tuple(sorted(arities.items())))

    def arity(self, symbol: str) -> int | None:
        for f, n in self.signature:
            if f == symbol:
                return n
        return None

    def lhss(self) -> tuple[Term, ...]:
        return tuple(r.lhs for r in self.rules)


def _collect_signature(t: Term, variables: frozenset[str], arities: dict[str, int]):
    if isinstance(t, Variable):
        if t.name not in variables:
            raise ArityMismatch(f"undeclared variable {t.name!r}")
        return
    if t.symbol == HOLE_SYMBOL:
        raise ArityMismatch("the hole symbol [] is reserved and cannot appear in rules")
    if t.symbol in variables:
        raise ArityMismatch(f"{t.symbol!r} is declared as a variable but used as a symbol")
    n = len(t.args)
    seen = arities.setdefault(t.symbol, n)
    if seen != n:
        raise ArityMismatch(f"symbol {t.symbol!r} used with arities {seen} and {n}")
    for a in t.args:
        _collect_signature(a, variables, arities)


def match_pattern(pattern: Term, subject: Term) -> Substitution | None:
    """Most general sigma with pattern sigma == subject, or None."""
    env: dict[str, Term] = {}
    if _match_into(pattern, subject, env):
        return Substitution(env)
    return None


def match_many(pairs: Iterable[tuple[Term, Term]]) -> Substitution | None:
    """Joint match of (pattern, subject) pairs under one shared sigma."""
    env: dict[str, Term] = {}
    for pattern, subject in pairs:
        if not _match_into(pattern, subject, env):
            return None
    return Substitution(env)


def _match_into(pattern: Term, subject: Term, env: dict[str, Term]) -> bool:
    if isinstance(pattern, Variable):
        bound = env.get(pattern.name)
        if bound is None:
            env[pattern.name] = subject
            return True
        return bound == subject
    if not isinstance(subject, Application):
        return False
    if pattern.symbol != subject.symbol or len(pattern.args) != len(subject.args):
        return False
    return all(_match_into(p, s, env) for p, s in zip(pattern.args, subject.args))


def redex_positions(t: Term, trs: Trs) -> tuple[tuple[Position, int], ...]:
    """All (position, rule index) pairs where a rule matches, in preorder."""
    out = []
    for p in positions(t):
        sub = subterm_at(t, p)
        for i, rule in enumerate(trs.rules):
            if match_pattern(rule.lhs, sub) is not None:
                out.append((p, i))
    return tuple(out)


def rewrite_at(t: Term, q: Position, rule: Rule) -> Term:
    sub = subterm_at(t, q)
    sigma = match_pattern(rule.lhs, sub)
    if sigma is None:
        raise NotARedex(f"{rule} does not match {sub} at {format_position(q)}")
    return replace_at(t, q, sigma.apply(rule.rhs))


def parallel_rewrite(t: Term, steps: Iterable[tuple[Position, int]], trs: Trs) -> Term:
    """Contract several pairwise parallel redexes in one step."""
    steps = tuple(steps)
    if not steps:
        raise NotParallel("a parallel step needs at least one position")
    ps = [q for q, _ in steps]
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            if not are_parallel(ps[i], ps[j]):
                raise NotParallel(
                    f"positions {format_position(ps[i])} and {format_position(ps[j])}"
                    " are not parallel"
                )
    # Parallel positions never overlap, so sequential application commutes.
    for q, i in steps:
        if not 0 <= i < len(trs.rules):
            raise RuleIndexOutOfRange(f"rule index {i} out of range")
        t = rewrite_at(t, q, trs.rules[i])
    return t


class PatternKind(enum.Enum):
    HERE = "h"
    ABOVE = "a"
    BELOW = "b"


@dataclass(frozen=True)
class ForbiddenPattern:
    """(lhs, pos, kind): no reduction at/above/below position o'.pos of any
    subterm t|_(o') that is an instance of lhs."""

    lhs: Term
    pos: Position
    kind: PatternKind

    def __post_init__(self):
        try:
            subterm_at(self.lhs, self.pos)
        except PositionOutOfTerm:
            raise PositionOutOfTerm(
                f"pattern position {format_position(self.pos)} not in {self.lhs}"
            ) from None

    def __str__(self) -> str:
        return f"{self.lhs} @ {format_position(self.pos)} : {self.kind.value}"


@dataclass(frozen=True)
class Full:
    pass


@dataclass(frozen=True)
class Leftmost:
    pass


@dataclass(frozen=True)
class Innermost:
    pass


@dataclass(frozen=True)
class Outermost:
    pass


@dataclass(frozen=True)
class MaxParallel:
    pass


@dataclass(frozen=True)
class Forbidden:
    patterns: tuple[ForbiddenPattern, ...]


ConcreteStrategy = Union[Full, Leftmost, Innermost, Outermost, MaxParallel, Forbidden]


def strategy_allows(
    t: Term,
    step_positions: Iterable[Position],
    trs: Trs,
    strategy: ConcreteStrategy,
) -> bool:
    """Whether contracting exactly the given redex positions respects strategy."""
    qs = sorted(set(step_positions))
    if not qs:
        raise NotParallel("a step needs at least one position")
    redexes = {p for p, _ in redex_positions(t, trs)}
    for q in qs:
        if q not in redexes:
            raise NotARedex(f"no redex at {format_position(q)} in {t}")

    if isinstance(strategy, Full):
        return True

    if isinstance(strategy, Leftmost):
        if len(qs) != 1:
            return False
        return not any(is_left_of_any(r, qs[0]) for r in redexes)

    if isinstance(strategy, Innermost):
        return all(
            not any(is_strict_prefix(q, r) for r in redexes) for q in qs
        )

    if isinstance(strategy, Outermost):
        return all(
            not any(is_strict_prefix(r, q) for r in redexes) for q in qs
        )

    if isinstance(strategy, MaxParallel):
        for i in range(len(qs)):
            for j in range(i + 1, len(qs)):
                if not are_parallel(qs[i], qs[j]):
                    return False
        qset = set(qs)
        for r in redexes:
            if r not in qset and all(are_parallel(r, q) for q in qs):
                return False
        return True

    if isinstance(strategy, Forbidden):
        if len(qs) != 1:
            return False
        q = qs[0]
        for pat in strategy.patterns:
            for oprime in positions(t):
                if match_pattern(pat.lhs, subterm_at(t, oprime)) is None:
                    continue
                anchor = oprime + pat.pos
                if pat.kind is PatternKind.HERE and q == anchor:
                    return False
                if pat.kind is PatternKind.ABOVE and is_strict_prefix(q, anchor):
                    return False
                if pat.kind is PatternKind.BELOW and is_strict_prefix(anchor, q):
                    return False
        return True

    raise TypeError(f"unknown strategy {strategy!r}")


def is_left_of_any(r: Position, q: Position) -> bool:
    return position_relation(r, q) is PositionRelation.LEFT_OF


@dataclass(frozen=True)
class InnermostEncoding:
    pass


@dataclass(frozen=True)
class OutermostEncoding:
    pass


@dataclass(frozen=True)
class QRestricted:
    """Reduction is forbidden strictly below any instance of a Q left-hand side."""

    lhss: tuple[Term, ...]


@dataclass(frozen=True)
class ContextSensitive:
    """Which argument positions of each symbol may be reduced under."""

    replacement: tuple[tuple[str, tuple[int, ...]], ...]

    @staticmethod
    def from_map(mapping: Mapping[str, Iterable[int]]) -> "ContextSensitive":
        return ContextSensitive(
            tuple(sorted((f, tuple(sorted(set(ix)))) for f, ix in mapping.items()))
        )


EncodingKind = Union[InnermostEncoding, OutermostEncoding, QRestricted, ContextSensitive]


def builtin_patterns(kind: EncodingKind, trs: Trs) -> tuple[ForbiddenPattern, ...]:
    """Forbidden-pattern sets for the classical strategies.

    Innermost forbids reduction strictly above any redex, outermost strictly
    below; both come out as one pattern per left-hand side.  The restricted
    variant does the same for an arbitrary lhs list, and the context-sensitive
    encoding forbids steps at and below every non-replacing argument.
    """
    if isinstance(kind, InnermostEncoding):
        return tuple(ForbiddenPattern(l, (), PatternKind.ABOVE) for l in trs.lhss())
    if isinstance(kind, OutermostEncoding):
        return tuple(ForbiddenPattern(l, (), PatternKind.BELOW) for l in trs.lhss())
    if isinstance(kind, QRestricted):
        return tuple(ForbiddenPattern(l, (), PatternKind.ABOVE) for l in kind.lhss)
    if isinstance(kind, ContextSensitive):
        given = dict(kind.replacement)
        arities = dict(trs.signature)
        for f, allowed in given.items():
            n = arities.get(f)
            if n is None:
                raise ArityMismatch(f"replacement map names unknown symbol {f!r}")
            bad = [i for i in allowed if not 1 <= i <= n]
            if bad:
                raise ArityMismatch(
                    f"replacement map for {f!r} (arity {n}) lists arguments {bad}"
                )
        out = []
        for f, n in trs.signature:
            allowed = set(given.get(f, range(1, n + 1)))
            if not n:
                continue
            args = tuple(Variable(f"x{i}") for i in range(1, n + 1))
            lhs = Application(f, args)
            for i in range(1, n + 1):
                if i in allowed:
                    continue
                out.append(ForbiddenPattern(lhs, (i,), PatternKind.HERE))
                out.append(ForbiddenPattern(lhs, (i,), PatternKind.BELOW))
        return tuple(out)
    raise TypeError(f"unknown encoding kind {kind!r}")
