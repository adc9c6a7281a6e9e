"""The negation-free sublogic: atoms, connectives, and restricted quantifiers.

Negation is expressed through duals: every predicate ``p`` has a dual
predicate (conventionally named ``~p``) that is true exactly when ``p``
is false, and ``dual`` maps a formula to one behaving as its negation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from .terms import (
    Substitution,
    Term,
    is_ground,
    subst_term,
    term_sort_key,
    term_vars,
)

DUAL_PREFIX = "~"

# Builtin objective predicates introduced by translation and reduction.
IN = "in"
NEQ = "neq"
NOTIN_SET = "notin_set"
BUILTIN_NAMES = frozenset({IN, NEQ, NOTIN_SET})


class Kind(Enum):
    OBJECTIVE = "objective"
    SUBJECTIVE = "subjective"


class ConfigError(Exception):
    """A predicate was used in a way its declaration does not support."""


@dataclass(frozen=True, slots=True)
class Predicate:
    name: str
    kind: Kind
    arity: int
    dual_of: str | None = None

    @property
    def is_dual(self) -> bool:
        return self.name.startswith(DUAL_PREFIX)

    @property
    def base_name(self) -> str:
        return self.dual_of if self.is_dual and self.dual_of else self.name

    def dual(self) -> "Predicate":
        if self.dual_of is None:
            raise ConfigError(f"predicate {self.name} has no registered dual")
        return Predicate(self.dual_of, self.kind, self.arity, self.name)


def dual_name(name: str) -> str:
    return name[len(DUAL_PREFIX):] if name.startswith(DUAL_PREFIX) else DUAL_PREFIX + name


def make_predicate(name: str, kind: Kind, arity: int) -> Predicate:
    """A predicate with its dual derived by the `~` naming convention."""
    return Predicate(name, kind, arity, dual_name(name))


@dataclass(frozen=True, slots=True)
class Atom:
    pred: Predicate
    args: tuple[Term, ...]
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.args) != self.pred.arity:
            raise ValueError(
                f"{self.pred.name}/{self.pred.arity} applied to {len(self.args)} arguments"
            )

    @property
    def is_subjective(self) -> bool:
        return self.pred.kind is Kind.SUBJECTIVE

    def base(self) -> "Atom":
        """The non-dual atom this one affirms or denies."""
        return Atom(self.pred.dual(), self.args) if self.pred.is_dual else self


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bot:
    pass


@dataclass(frozen=True, slots=True)
class And:
    left: "SubFormula"
    right: "SubFormula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "SubFormula"
    right: "SubFormula"


@dataclass(frozen=True, slots=True)
class Forall:
    vars: tuple[str, ...]
    guard: "SubFormula"
    body: "SubFormula"

    def __post_init__(self) -> None:
        _check_binder(self.vars)


@dataclass(frozen=True, slots=True)
class Exists:
    vars: tuple[str, ...]
    guard: "SubFormula"
    body: "SubFormula"

    def __post_init__(self) -> None:
        _check_binder(self.vars)


SubFormula = Union[Atom, Top, Bot, And, Or, Forall, Exists]

TOP = Top()
BOT = Bot()


def _check_binder(names: tuple[str, ...]) -> None:
    if not names:
        raise ValueError("quantifier must bind at least one variable")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate quantified variables in {names}")


def conj(parts: list[SubFormula]) -> SubFormula:
    """Right-folded conjunction; the canonical shape for guard and conjunct chains."""
    if not parts:
        return TOP
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts: list[SubFormula]) -> SubFormula:
    if not parts:
        return BOT
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def conjuncts(f: SubFormula) -> list[SubFormula]:
    """Flatten a right-folded conjunction back into its parts."""
    out: list[SubFormula] = []
    while isinstance(f, And):
        out.append(f.left)
        f = f.right
    out.append(f)
    return out


def and_parts(f: SubFormula) -> list[SubFormula]:
    """Flatten nested conjunctions on both sides; used when re-canonicalizing shape."""
    if isinstance(f, And):
        return and_parts(f.left) + and_parts(f.right)
    return [f]


def dual(f: SubFormula) -> SubFormula:
    """The formula behaving as the negation of `f`. Guards are never dualized."""
    match f:
        case Atom(pred, args):
            return Atom(pred.dual(), args)
        case Top():
            return BOT
        case Bot():
            return TOP
        case And(l, r):
            return Or(dual(l), dual(r))
        case Or(l, r):
            return And(dual(l), dual(r))
        case Forall(xs, c, body):
            return Exists(xs, c, dual(body))
        case Exists(xs, c, body):
            return Forall(xs, c, dual(body))
    raise TypeError(f"not a formula: {f!r}")


def apply_subst(f: SubFormula, sigma: Substitution) -> SubFormula:
    """Apply a ground substitution; quantifiers shadow bindings for their variables."""
    if len(sigma) == 0:
        return f
    match f:
        case Atom(pred, args):
            return Atom(pred, tuple(subst_term(a, sigma) for a in args), span=f.span)
        case Top() | Bot():
            return f
        case And(l, r):
            return And(apply_subst(l, sigma), apply_subst(r, sigma))
        case Or(l, r):
            return Or(apply_subst(l, sigma), apply_subst(r, sigma))
        case Forall(xs, c, body):
            inner = sigma.without(xs)
            return Forall(xs, apply_subst(c, inner), apply_subst(body, inner))
        case Exists(xs, c, body):
            inner = sigma.without(xs)
            return Exists(xs, apply_subst(c, inner), apply_subst(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def free_vars(f: SubFormula) -> set[str]:
    match f:
        case Atom(_, args):
            out: set[str] = set()
            for a in args:
                out |= term_vars(a)
            return out
        case Top() | Bot():
            return set()
        case And(l, r) | Or(l, r):
            return free_vars(l) | free_vars(r)
        case Forall(xs, c, body) | Exists(xs, c, body):
            return (free_vars(c) | free_vars(body)) - set(xs)
    raise TypeError(f"not a formula: {f!r}")


def size(f: SubFormula) -> int:
    """Node count, the measure strictly decreased by every rewrite step."""
    match f:
        case Atom() | Top() | Bot():
            return 1
        case And(l, r) | Or(l, r):
            return 1 + size(l) + size(r)
        case Forall(_, c, body) | Exists(_, c, body):
            return 1 + size(c) + size(body)
    raise TypeError(f"not a formula: {f!r}")


def is_closed(f: SubFormula) -> bool:
    return not free_vars(f)


def is_restriction(f: SubFormula) -> bool:
    """Does `f` fit the guard grammar: objective base atoms, top, bot, and/or,
    and existentials whose body is top (the guard-free `exists x. c` form)?"""
    match f:
        case Atom(pred, _):
            return pred.kind is Kind.OBJECTIVE and not pred.is_dual
        case Top() | Bot():
            return True
        case And(l, r) | Or(l, r):
            return is_restriction(l) and is_restriction(r)
        case Exists(_, c, Top()):
            return is_restriction(c)
        case _:
            return False


def subformulas(f: SubFormula) -> Iterator[SubFormula]:
    yield f
    match f:
        case And(l, r) | Or(l, r):
            yield from subformulas(l)
            yield from subformulas(r)
        case Forall(_, c, body) | Exists(_, c, body):
            yield from subformulas(c)
            yield from subformulas(body)
        case _:
            return


def atoms_syntactic(f: SubFormula) -> list[Atom]:
    return [g for g in subformulas(f) if isinstance(g, Atom)]


# ---------------------------------------------------------------------------
# Rendering. `render` keeps variable names; `canonical_render` renames bound
# variables to a fixed scheme, so equal output means alpha-equivalent input.
# ---------------------------------------------------------------------------


def render_term(t: Term) -> str:
    return str(t)


def render(f: SubFormula) -> str:
    match f:
        case Atom(pred, args):
            if not args:
                return pred.name
            return f"{pred.name}({', '.join(render_term(a) for a in args)})"
        case Top():
            return "top"
        case Bot():
            return "bot"
        case And(l, r):
            return f"and({render(l)}, {render(r)})"
        case Or(l, r):
            return f"or({render(l)}, {render(r)})"
        case Forall(xs, c, body):
            return f"forall {', '.join(xs)}. ({render(c)}) => {render(body)}"
        case Exists(xs, c, body):
            return f"exists {', '.join(xs)}. ({render(c)}) & {render(body)}"
    raise TypeError(f"not a formula: {f!r}")


def _canonical(f: SubFormula, env: dict[str, str], counter: list[int]) -> SubFormula:
    match f:
        case Atom():
            # env maps to names that cannot collide with user identifiers,
            # so a plain variable-to-variable rewrite is capture-free.
            return Atom(f.pred, tuple(_rename_term(a, env) for a in f.args))
        case Top() | Bot():
            return f
        case And(l, r):
            return And(_canonical(l, env, counter), _canonical(r, env, counter))
        case Or(l, r):
            return Or(_canonical(l, env, counter), _canonical(r, env, counter))
        case Forall(xs, c, body) | Exists(xs, c, body):
            inner = dict(env)
            new_xs = []
            for x in xs:
                counter[0] += 1
                nx = f"v{counter[0]}"
                inner[x] = nx
                new_xs.append(nx)
            node = Forall if isinstance(f, Forall) else Exists
            return node(tuple(new_xs), _canonical(c, inner, counter), _canonical(body, inner, counter))
    raise TypeError(f"not a formula: {f!r}")


def _rename_term(t: Term, env: dict[str, str]) -> Term:
    from .terms import App, TimeOffset, Var

    match t:
        case Var(name):
            return Var(env.get(name, name))
        case TimeOffset(base, delta):
            return TimeOffset(Var(env.get(base.name, base.name)), delta)
        case App(fn, args):
            return App(fn, tuple(_rename_term(a, env) for a in args))
        case _:
            return t


def canonicalize(f: SubFormula) -> SubFormula:
    """Rename bound variables to v1, v2, ... in traversal order."""
    return _canonical(f, {}, [0])


def canonical_render(f: SubFormula) -> str:
    return render(canonicalize(f))


def alpha_equal(f: SubFormula, g: SubFormula) -> bool:
    return canonicalize(f) == canonicalize(g)


def atom_key(a: Atom) -> tuple:
    """A hashable identity for a ground atom, keyed on its non-dual base."""
    b = a.base() if a.pred.is_dual else a
    return (b.pred.name, tuple(term_sort_key(t) for t in b.args))


def ground_atom(a: Atom) -> bool:
    return all(is_ground(t) for t in a.args)
