"""First-order terms, positions, substitutions, contexts.

Terms are immutable trees built from variables and function applications.
Positions address subterms as tuples of 1-based argument indices; the empty
tuple is the root.  A substitution maps finitely many variable names to
terms and can be applied in powers.  A context is a term containing exactly
one occurrence of the reserved hole symbol ``[]``.  A context-substitution
pairs a context C with a substitution mu and acts on a term t by

    t(C, mu)^0     = t
    t(C, mu)^(n+1) = C[ t(C, mu)^n mu ]

which is the closed form of pumping one loop iteration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import MalformedContext, PositionOutOfTerm

HOLE_SYMBOL = "[]"


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Application:
    symbol: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(str(a) for a in self.args)})"


Term = Union[Variable, Application]

Position = tuple[int, ...]
EPSILON: Position = ()

HOLE = Application(HOLE_SYMBOL, ())


def format_position(p: Position) -> str:
    """Dot-separated rendering; the root position prints as ``eps``."""
    return ".".join(str(i) for i in p) if p else "eps"


class PositionRelation(enum.Enum):
    EQUAL = "equal"
    STRICTLY_ABOVE = "strictly-above"
    STRICTLY_BELOW = "strictly-below"
    LEFT_OF = "left-of"
    RIGHT_OF = "right-of"


def position_relation(p: Position, q: Position) -> PositionRelation:
    """Classify how position p stands to q.

    Exactly one of the five relations holds for any pair.  p is left of q
    when the two diverge and p takes a smaller argument index at the first
    point of divergence; prefixes are above, extensions are below.
    """
    for i, (a, b) in enumerate(zip(p, q)):
        if a != b:
            if a < b:
                return PositionRelation.LEFT_OF
            return PositionRelation.RIGHT_OF
    if len(p) == len(q):
        return PositionRelation.EQUAL
    if len(p) < len(q):
        return PositionRelation.STRICTLY_ABOVE
    return PositionRelation.STRICTLY_BELOW


def is_left_of(p: Position, q: Position) -> bool:
    return position_relation(p, q) is PositionRelation.LEFT_OF


def are_parallel(p: Position, q: Position) -> bool:
    r = position_relation(p, q)
    return r is PositionRelation.LEFT_OF or r is PositionRelation.RIGHT_OF


def is_prefix(p: Position, q: Position) -> bool:
    return len(p) <= len(q) and q[: len(p)] == p


def is_strict_prefix(p: Position, q: Position) -> bool:
    return len(p) < len(q) and q[: len(p)] == p


def positions(t: Term) -> Iterator[Position]:
    """All positions of t in preorder, left to right."""
    yield EPSILON
    if isinstance(t, Application):
        for i, a in enumerate(t.args, start=1):
            for q in positions(a):
                yield (i,) + q


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, Application) or not 1 <= i <= len(t.args):
            raise PositionOutOfTerm(f"no position {format_position(p)} in {t}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, s: Term) -> Term:
    if not p:
        return s
    if not isinstance(t, Application) or not 1 <= p[0] <= len(t.args):
        raise PositionOutOfTerm(f"no position {format_position(p)} in {t}")
    i = p[0]
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], s)
    return Application(t.symbol, tuple(args))


def variables_of(t: Term) -> frozenset[str]:
    if isinstance(t, Variable):
        return frozenset((t.name,))
    out: set[str] = set()
    stack = list(t.args)
    while stack:
        u = stack.pop()
        if isinstance(u, Variable):
            out.add(u.name)
        else:
            stack.extend(u.args)
    return frozenset(out)


def term_size(t: Term) -> int:
    if isinstance(t, Variable):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def contains_hole(t: Term) -> bool:
    if isinstance(t, Variable):
        return False
    if t.symbol == HOLE_SYMBOL and not t.args:
        return True
    return any(contains_hole(a) for a in t.args)


@dataclass(frozen=True)
class Substitution:
    """Finite mapping from variable names to terms.

    Identity bindings are dropped on construction, so two substitutions are
    equal exactly when they act identically on every term.
    """

    bindings: tuple[tuple[str, Term], ...]
    _map: Mapping[str, Term] = field(compare=False, repr=False, hash=False, default=None)

    def __init__(self, mapping: Mapping[str, Term] | None = None):
        mapping = dict(mapping or {})
        kept = {x: u for x, u in mapping.items() if u != Variable(x)}
        object.__setattr__(self, "bindings", tuple(sorted(kept.items())))
        object.__setattr__(self, "_map", kept)

    def get(self, name: str) -> Term | None:
        return self._map.get(name)

    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def items(self) -> tuple[tuple[str, Term], ...]:
        return self.bindings

    def apply(self, t: Term) -> Term:
        if isinstance(t, Variable):
            return self._map.get(t.name, t)
        if not t.args:
            return t
        return Application(t.symbol, tuple(self.apply(a) for a in t.args))

    def __str__(self) -> str:
        inner = ", ".join(f"{x}/{u}" for x, u in self.bindings)
        return "{" + inner + "}"


EMPTY_SUBSTITUTION = Substitution()


def apply_substitution(t: Term, mu: Substitution, n: int = 1) -> Term:
    """t mu^n for n >= 0."""
    if n < 0:
        raise ValueError("substitution power must be nonnegative")
    for _ in range(n):
        t = mu.apply(t)
    return t


def variable_closure(t: Term, mu: Substitution) -> frozenset[str]:
    """Smallest variable set containing V(t) and closed under x -> V(x mu).

    The closure is what a pumped instance t mu^n can ever mention, so it is
    the right index set when scanning substitution images for redexes.
    """
    out = set(variables_of(t))
    frontier = list(out)
    while frontier:
        x = frontier.pop()
        img = mu.get(x)
        if img is None:
            continue
        for y in variables_of(img):
            if y not in out:
                out.add(y)
                frontier.append(y)
    return frozenset(out)


@dataclass(frozen=True)
class Context:
    """A term with exactly one hole; the hole position is cached."""

    body: Term
    hole_pos: Position

    def __post_init__(self):
        if _count_holes(self.body) != 1:
            raise MalformedContext(f"context must contain exactly one hole: {self.body}")
        try:
            at = subterm_at(self.body, self.hole_pos)
        except PositionOutOfTerm:
            raise MalformedContext(
                f"cached hole position {format_position(self.hole_pos)} not in {self.body}"
            ) from None
        if at != HOLE:
            raise MalformedContext(
                f"no hole at cached position {format_position(self.hole_pos)} in {self.body}"
            )

    @staticmethod
    def from_term(body: Term) -> "Context":
        for p in positions(body):
            if subterm_at(body, p) == HOLE:
                return Context(body, p)
        raise MalformedContext(f"context must contain exactly one hole: {body}")

    def plug(self, t: Term) -> Term:
        return replace_at(self.body, self.hole_pos, t)

    def substitute(self, mu: Substitution) -> "Context":
        # A substitution image never contains the hole, so the position survives.
        return Context(mu.apply(self.body), self.hole_pos)

    def subcontext(self, p: Position) -> "Context":
        """C restricted to its subterm at p, which must still contain the hole."""
        if not is_prefix(p, self.hole_pos):
            raise MalformedContext(
                f"subterm at {format_position(p)} does not contain the hole"
            )
        return Context(subterm_at(self.body, p), self.hole_pos[len(p):])

    def __str__(self) -> str:
        return str(self.body)


def _count_holes(t: Term) -> int:
    if isinstance(t, Variable):
        return 0
    if t.symbol == HOLE_SYMBOL and not t.args:
        return 1
    return sum(_count_holes(a) for a in t.args)


def hole_position(c: Context) -> Position:
    return c.hole_pos


@dataclass(frozen=True)
class ContextSubstitution:
    """The pair (C, mu) used to close a loop; mu may not reintroduce holes."""

    context: Context
    subst: Substitution

    def __post_init__(self):
        for _, u in self.subst.items():
            if contains_hole(u):
                raise MalformedContext("substitution image contains a hole")


def apply_context_substitution(t: Term, cs: ContextSubstitution, n: int) -> Term:
    """t(C, mu)^n."""
    if n < 0:
        raise ValueError("context-substitution power must be nonnegative")
    for _ in range(n):
        t = cs.context.plug(cs.subst.apply(t))
    return t
