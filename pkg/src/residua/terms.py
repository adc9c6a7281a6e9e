"""Terms of the policy sublogic: constants, variables, applications, time points.

Time points are nonnegative integer ticks with an `inf` maximum; the only
arithmetic is a variable-plus-nonnegative-offset form (``t + 30``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

INF = math.inf

# Reserved function symbols used to embed tuples and ground sets as terms.
TUPLE_FN = "$tuple"
SET_FN = "$set"


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class App:
    fn: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        inner = ", ".join(str(a) for a in self.args)
        if self.fn == TUPLE_FN:
            return f"({inner})"
        if self.fn == SET_FN:
            return "{" + inner + "}"
        return f"{self.fn}({inner})"


@dataclass(frozen=True, slots=True)
class Time:
    """A time point: a nonnegative integer tick, or infinity."""

    value: Union[int, float]

    def __post_init__(self) -> None:
        if self.value != INF:
            if not isinstance(self.value, int) or self.value < 0:
                raise ValueError(f"time tick must be a nonnegative integer, got {self.value!r}")

    @property
    def is_infinite(self) -> bool:
        return self.value == INF

    def __str__(self) -> str:
        return "inf" if self.is_infinite else str(self.value)


@dataclass(frozen=True, slots=True)
class TimeOffset:
    """``base + delta`` where base is a time variable. Ground bases normalize away."""

    base: Var
    delta: int

    def __post_init__(self) -> None:
        if self.delta < 0:
            raise ValueError("time offsets must be nonnegative")

    def __str__(self) -> str:
        return f"{self.base}+{self.delta}"


Term = Union[Const, Var, App, Time, TimeOffset]

INFTY = Time(INF)
ZERO = Time(0)


def time_offset(base: Term, delta: int) -> Term:
    """Build ``base + delta``, normalizing over ground times (inf absorbs)."""
    if delta < 0:
        raise ValueError("time offsets must be nonnegative")
    if isinstance(base, Time):
        return INFTY if base.is_infinite else Time(base.value + delta)
    if isinstance(base, TimeOffset):
        return TimeOffset(base.base, base.delta + delta)
    if isinstance(base, Var):
        return base if delta == 0 else TimeOffset(base, delta)
    raise ValueError(f"time offset base must be a variable or time, got {base!r}")


def tuple_term(items: Iterable[Term]) -> Term:
    """A tuple of terms; a 1-tuple collapses to its sole member."""
    items = tuple(items)
    if len(items) == 1:
        return items[0]
    return App(TUPLE_FN, items)


def untuple(t: Term) -> tuple[Term, ...]:
    if isinstance(t, App) and t.fn == TUPLE_FN:
        return t.args
    return (t,)


def set_term(members: Iterable[Term]) -> App:
    """A ground, canonically ordered, deduplicated set of terms."""
    dedup = {term_sort_key(m): m for m in members}
    ordered = tuple(dedup[k] for k in sorted(dedup))
    bad = [m for m in ordered if not is_ground(m)]
    if bad:
        raise ValueError(f"set members must be ground: {bad[0]}")
    return App(SET_FN, ordered)


def set_members(t: Term) -> tuple[Term, ...]:
    if not (isinstance(t, App) and t.fn == SET_FN):
        raise ValueError(f"not a set term: {t}")
    return t.args


def is_ground(t: Term) -> bool:
    match t:
        case Var() | TimeOffset():
            return False
        case App(_, args):
            return all(is_ground(a) for a in args)
        case _:
            return True


def term_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case TimeOffset(base, _):
            return {base.name}
        case App(_, args):
            out: set[str] = set()
            for a in args:
                out |= term_vars(a)
            return out
        case _:
            return set()


def term_sort_key(t: Term) -> tuple:
    """A total order on terms: times numerically first, then constants, then the rest."""
    match t:
        case Time(v):
            return (0, float(v), "")
        case Const(name):
            return (1, 0.0, name)
        case Var(name):
            return (2, 0.0, name)
        case TimeOffset(base, delta):
            return (3, float(delta), base.name)
        case App(fn, args):
            return (4, float(len(args)), fn) + tuple(term_sort_key(a) for a in args)
    raise TypeError(f"not a term: {t!r}")


_fresh_counter = itertools.count(1)


def fresh_name(base: str = "x") -> str:
    """A globally fresh variable name derived from `base`."""
    root = base.split("'")[0]
    return f"{root}'{next(_fresh_counter)}"


def fresh_var(base: str = "x") -> Var:
    return Var(fresh_name(base))


def reset_fresh_counter() -> None:
    """Restart fresh-name numbering; only for deterministic test output."""
    global _fresh_counter
    _fresh_counter = itertools.count(1)


class Substitution:
    """A finite map from variable names to ground terms."""

    __slots__ = ("_map",)

    def __init__(self, bindings: dict[str, Term] | None = None):
        bindings = dict(bindings or {})
        for x, t in bindings.items():
            if not is_ground(t):
                raise ValueError(f"substitution range must be ground: {x} -> {t}")
        self._map = bindings

    @staticmethod
    def empty() -> "Substitution":
        return _EMPTY

    def get(self, name: str) -> Term | None:
        return self._map.get(name)

    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def items(self) -> Iterator[tuple[str, Term]]:
        return iter(sorted(self._map.items()))

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def plus(self, other: "Substitution") -> "Substitution":
        """Union of substitutions with disjoint domains."""
        overlap = self.domain() & other.domain()
        if overlap:
            raise ValueError(f"substitution domains overlap on {sorted(overlap)}")
        merged = dict(self._map)
        merged.update(other._map)
        return Substitution(merged)

    def without(self, names: Iterable[str]) -> "Substitution":
        drop = set(names)
        return Substitution({x: t for x, t in self._map.items() if x not in drop})

    def extends(self, other: "Substitution") -> bool:
        """True iff self >= other: defined wherever `other` is, and agreeing there."""
        return all(self._map.get(x) == t for x, t in other._map.items())

    def sort_key(self) -> tuple:
        return tuple((x, term_sort_key(t)) for x, t in sorted(self._map.items()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{x} -> {t}" for x, t in sorted(self._map.items()))
        return "{" + inner + "}"


_EMPTY = Substitution({})


def subst_term(t: Term, sigma: Substitution) -> Term:
    """Apply a ground substitution to a term, normalizing time offsets."""
    match t:
        case Var(name):
            bound = sigma.get(name)
            return bound if bound is not None else t
        case TimeOffset(base, delta):
            bound = sigma.get(base.name)
            if bound is None:
                return t
            return time_offset(bound, delta)
        case App(fn, args):
            return App(fn, tuple(subst_term(a, sigma) for a in args))
        case _:
            return t


def unify_ground(pattern: Term, value: Term, binding: dict[str, Term]) -> bool:
    """Extend `binding` so that pattern == value, against a ground `value`.

    Mutates `binding` on success; on failure the partial extensions are
    harmless because callers always discard the dict.
    """
    match pattern:
        case Var(name):
            seen = binding.get(name)
            if seen is None:
                binding[name] = value
                return True
            return seen == value
        case TimeOffset(base, delta):
            if not isinstance(value, Time):
                return False
            if value.is_infinite:
                return unify_ground(base, INFTY, binding)
            if value.value < delta:
                return False
            return unify_ground(base, Time(value.value - delta), binding)
        case App(fn, args):
            if not (isinstance(value, App) and value.fn == fn and len(value.args) == len(args)):
                return False
            return all(unify_ground(p, v, binding) for p, v in zip(args, value.args))
        case _:
            return pattern == value
