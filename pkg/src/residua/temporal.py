"""The outer policy logic with temporal connectives, and its translation down.

Translation makes time explicit: every predicate gains a final time argument,
temporal connectives become quantifiers over time points guarded by interval
membership, and negation is pushed into duals. A normalization pass then
fuses nested quantifiers and folds redundant interval bounds, producing the
compact shapes auditors actually read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .formulas import (
    And,
    Atom,
    BOT,
    Bot,
    Exists,
    Forall,
    IN,
    Kind,
    NEQ,
    Or,
    SubFormula,
    TOP,
    Top,
    and_parts,
    conj,
    conjuncts,
    dual,
    free_vars,
    is_restriction,
)
from .schema import BUILTINS, ModeTable, Schema
from .terms import (
    INFTY,
    Term,
    Time,
    TimeOffset,
    Var,
    ZERO,
    fresh_name,
    time_offset,
)


@dataclass(frozen=True, slots=True)
class TAtom:
    name: str
    args: tuple[Term, ...]
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class TTop:
    pass


@dataclass(frozen=True, slots=True)
class TBot:
    pass


@dataclass(frozen=True, slots=True)
class TAnd:
    left: "TemporalFormula"
    right: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class TOr:
    left: "TemporalFormula"
    right: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class TNot:
    body: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class TForall:
    vars: tuple[str, ...]
    guard: "TemporalFormula"
    body: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class TExists:
    vars: tuple[str, ...]
    guard: "TemporalFormula"
    body: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class Freeze:
    var: str
    body: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class Since:
    left: "TemporalFormula"
    right: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class Until:
    left: "TemporalFormula"
    right: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class BoxPast:
    body: "TemporalFormula"


@dataclass(frozen=True, slots=True)
class BoxFuture:
    body: "TemporalFormula"


TemporalFormula = Union[
    TAtom, TTop, TBot, TAnd, TOr, TNot, TForall, TExists, Freeze, Since, Until,
    BoxPast, BoxFuture,
]


def has_future_operators(f: TemporalFormula) -> bool:
    match f:
        case Until() | BoxFuture():
            return True
        case TAnd(l, r) | TOr(l, r) | Since(l, r):
            return has_future_operators(l) or has_future_operators(r)
        case TNot(b) | Freeze(_, b) | BoxPast(b):
            return has_future_operators(b)
        case TForall(_, c, b) | TExists(_, c, b):
            return has_future_operators(c) or has_future_operators(b)
        case _:
            return False


def _subst_time_var(f: TemporalFormula, name: str, value: Term) -> TemporalFormula:
    """Replace a freeze-bound time variable; bound names are unique, so no capture."""
    match f:
        case TAtom(pred, args):
            return TAtom(pred, tuple(_subst_in_term(a, name, value) for a in args), span=f.span)
        case TTop() | TBot():
            return f
        case TAnd(l, r):
            return TAnd(_subst_time_var(l, name, value), _subst_time_var(r, name, value))
        case TOr(l, r):
            return TOr(_subst_time_var(l, name, value), _subst_time_var(r, name, value))
        case TNot(b):
            return TNot(_subst_time_var(b, name, value))
        case TForall(xs, c, b):
            if name in xs:
                return f
            return TForall(xs, _subst_time_var(c, name, value), _subst_time_var(b, name, value))
        case TExists(xs, c, b):
            if name in xs:
                return f
            return TExists(xs, _subst_time_var(c, name, value), _subst_time_var(b, name, value))
        case Freeze(x, b):
            if x == name:
                return f
            return Freeze(x, _subst_time_var(b, name, value))
        case Since(l, r):
            return Since(_subst_time_var(l, name, value), _subst_time_var(r, name, value))
        case Until(l, r):
            return Until(_subst_time_var(l, name, value), _subst_time_var(r, name, value))
        case BoxPast(b):
            return BoxPast(_subst_time_var(b, name, value))
        case BoxFuture(b):
            return BoxFuture(_subst_time_var(b, name, value))
    raise TypeError(f"not a temporal formula: {f!r}")


def _subst_in_term(t: Term, name: str, value: Term) -> Term:
    from .terms import App

    match t:
        case Var(n) if n == name:
            return value
        case TimeOffset(base, delta) if base.name == name:
            return time_offset(value, delta)
        case App(fn, args):
            return App(fn, tuple(_subst_in_term(a, name, value) for a in args))
        case _:
            return t


def _in_atom(t: Term, lo: Term, hi: Term) -> Atom:
    return Atom(BUILTINS[IN], (t, lo, hi))


def _neq_atom(a: Term, b: Term) -> Atom:
    return Atom(BUILTINS[NEQ], (a, b))


def translate(schema: Schema, now: Term, f: TemporalFormula) -> SubFormula:
    """The time-indexed translation into the sublogic, normalized for reading."""
    return normalize(_translate(schema, now, f), schema.modes)


def _translate(schema: Schema, now: Term, f: TemporalFormula) -> SubFormula:
    match f:
        case TAtom(name, args):
            pred = schema.lookup(name)
            if schema.is_builtin(name):
                return Atom(pred, args, span=f.span)
            return Atom(pred, args + (now,), span=f.span)
        case TTop():
            return TOP
        case TBot():
            return BOT
        case TAnd(l, r):
            return And(_translate(schema, now, l), _translate(schema, now, r))
        case TOr(l, r):
            return Or(_translate(schema, now, l), _translate(schema, now, r))
        case TNot(b):
            return dual(_translate(schema, now, b))
        case TForall(xs, c, b):
            return Forall(xs, _translate(schema, now, c), _translate(schema, now, b))
        case TExists(xs, c, b):
            return Exists(xs, _translate(schema, now, c), _translate(schema, now, b))
        case Freeze(x, b):
            return _translate(schema, now, _subst_time_var(b, x, now))
        case Since(l, r):
            return _translate_window(schema, now, l, r, past=True)
        case Until(l, r):
            return _translate_window(schema, now, l, r, past=False)
        case BoxPast(b):
            t = fresh_name("tp")
            return Forall((t,), _in_atom(Var(t), ZERO, now), _translate(schema, Var(t), b))
        case BoxFuture(b):
            t = fresh_name("tp")
            return Forall((t,), _in_atom(Var(t), now, INFTY), _translate(schema, Var(t), b))
    raise TypeError(f"not a temporal formula: {f!r}")


def _translate_window(
    schema: Schema, now: Term, hold: TemporalFormula, goal: TemporalFormula, past: bool
) -> SubFormula:
    """Shared shape of the strict since/until expansions.

    The witness state is existentially bound and interval-guarded; when the
    held condition is just truth, the inner universal is vacuous and dropped.
    """
    w = fresh_name("tp")
    witness = Var(w)
    guard = _in_atom(witness, ZERO, now) if past else _in_atom(witness, now, INFTY)
    goal_t = _translate(schema, witness, goal)
    if isinstance(hold, TTop):
        return Exists((w,), guard, goal_t)
    u = fresh_name("tp")
    between = Var(u)
    if past:
        inner_guard = And(_in_atom(between, witness, now), _neq_atom(witness, between))
    else:
        inner_guard = And(_in_atom(between, now, witness), _neq_atom(between, witness))
    inner = Forall((u,), inner_guard, _translate(schema, between, hold))
    return Exists((w,), guard, And(goal_t, inner))


def globally(schema: Schema, f: TemporalFormula) -> SubFormula:
    """Enforce `f` at every state: the standard safety-style wrapper."""
    t = fresh_name("tau")
    body = translate(schema, Var(t), f)
    return normalize(_fuse_wrapper(Forall, t, body), schema.modes)


def eventually(schema: Schema, f: TemporalFormula) -> SubFormula:
    """Require `f` at some state: the co-safety-style wrapper."""
    t = fresh_name("tau")
    body = translate(schema, Var(t), f)
    return normalize(_fuse_wrapper(Exists, t, body), schema.modes)


def _fuse_wrapper(node: type, t: str, body: SubFormula) -> SubFormula:
    every_state = _in_atom(Var(t), ZERO, INFTY)
    if isinstance(body, node):
        return node((t,) + body.vars, conj([every_state] + conjuncts(body.guard)), body.body)
    return node((t,), every_state, body)


# ---------------------------------------------------------------------------
# Normalization toward the compact shapes auditors read.
# ---------------------------------------------------------------------------


def normalize(f: SubFormula, modes: ModeTable | None = None) -> SubFormula:
    match f:
        case Atom() | Top() | Bot():
            return f
        case And(l, r):
            return And(normalize(l, modes), normalize(r, modes))
        case Or(l, r):
            return Or(normalize(l, modes), normalize(r, modes))
        case Forall(xs, c, b):
            c, b = normalize(c, modes), normalize(b, modes)
            if isinstance(b, Forall):
                return Forall(
                    xs + b.vars, _merge_intervals(conj(and_parts(c) + and_parts(b.guard))), b.body
                )
            return Forall(xs, _merge_intervals(c), b)
        case Exists(xs, c, b):
            return _normalize_exists(xs, normalize(c, modes), normalize(b, modes), modes)
    raise TypeError(f"not a formula: {f!r}")


def _normalize_exists(
    xs: tuple[str, ...],
    guard: SubFormula,
    body: SubFormula,
    modes: ModeTable | None,
) -> SubFormula:
    guard_parts = and_parts(guard)
    body_parts = and_parts(body)
    changed = True
    while changed:
        changed = False
        head = body_parts[0]
        if len(body_parts) > 1 and is_restriction(head) and _absorbable(head, modes):
            guard_parts.append(head)
            body_parts = body_parts[1:]
            changed = True
            continue
        if isinstance(head, Exists):
            rest_vars: set[str] = set()
            for p in body_parts[1:]:
                rest_vars |= free_vars(p)
            if not (set(head.vars) & rest_vars):
                xs = xs + head.vars
                guard_parts.extend(and_parts(head.guard))
                replacement = [] if isinstance(head.body, Top) else and_parts(head.body)
                body_parts = replacement + body_parts[1:]
                if not body_parts:
                    body_parts = [TOP]
                changed = True
    return Exists(xs, _merge_intervals(conj(guard_parts)), conj(body_parts))


def _absorbable(c: SubFormula, modes: ModeTable | None) -> bool:
    """Only conjuncts whose predicates the instantiator can query may move
    into a guard; without a mode table that means the builtins alone."""
    from .formulas import atoms_syntactic

    for a in atoms_syntactic(c):
        if a.pred.is_dual or a.pred.kind is not Kind.OBJECTIVE:
            return False
        if modes is None:
            if a.pred.name not in (IN, NEQ):
                return False
        elif modes.get(a.pred.name) is None:
            return False
    return True


def _merge_intervals(guard: SubFormula) -> SubFormula:
    """Fold `in` conjuncts over the same witness into one when bounds compare."""
    parts = conjuncts(guard)
    out: list[SubFormula] = []
    for part in parts:
        merged = False
        if _is_in(part):
            for i, seen in enumerate(out):
                if _is_in(seen) and seen.args[0] == part.args[0]:
                    lo = _max_time(seen.args[1], part.args[1])
                    hi = _min_time(seen.args[2], part.args[2])
                    if lo is not None and hi is not None:
                        out[i] = Atom(BUILTINS[IN], (seen.args[0], lo, hi))
                        merged = True
                        break
        if not merged:
            out.append(part)
    return conj(out)


def _is_in(f: SubFormula) -> bool:
    return isinstance(f, Atom) and f.pred.name == IN


def _time_le(a: Term, b: Term) -> bool | None:
    """Partial order on time terms; None when the bounds are incomparable."""
    if a == b:
        return True
    if isinstance(a, Time) and isinstance(b, Time):
        return a.value <= b.value
    if a == ZERO or (isinstance(b, Time) and b.is_infinite):
        return True
    if b == ZERO or (isinstance(a, Time) and a.is_infinite):
        return False
    if isinstance(a, Var) and isinstance(b, TimeOffset) and b.base == a:
        return True
    if isinstance(a, TimeOffset) and isinstance(b, Var) and a.base == b:
        return False
    if isinstance(a, TimeOffset) and isinstance(b, TimeOffset) and a.base == b.base:
        return a.delta <= b.delta
    return None


def _max_time(a: Term, b: Term) -> Term | None:
    le = _time_le(a, b)
    if le is None:
        return None
    return b if le else a


def _min_time(a: Term, b: Term) -> Term | None:
    le = _time_le(a, b)
    if le is None:
        return None
    return a if le else b
