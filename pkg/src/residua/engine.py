"""The iterative audit core: quantifier instantiation and policy reduction.

``reduce`` discharges every part of a policy the structure already decides
and returns the residual policy. Residual quantifiers keep a set of
already-instantiated tuples in their guard so later iterations never
recheck them; sets from earlier iterations are merged, not nested.
"""

from __future__ import annotations

import itertools

from dataclasses import dataclass
from typing import Iterable, Sequence

from .formulas import (
    And,
    Atom,
    BOT,
    Bot,
    Exists,
    Forall,
    NOTIN_SET,
    Or,
    SubFormula,
    TOP,
    Top,
    apply_subst,
    conj,
    conjuncts,
    dual,
    ground_atom,
    make_predicate,
    render,
)
from .formulas import Kind
from .schema import ModeTable
from .structures import PartialStructure, TT, FF, UU, UndefinedModeError
from .terms import (
    Substitution,
    Term,
    Var,
    set_members,
    set_term,
    term_sort_key,
    tuple_term,
)

NOTIN_PRED = make_predicate(NOTIN_SET, Kind.OBJECTIVE, 2)


@dataclass(frozen=True)
class GroundSet:
    """A canonically ordered set of ground instantiation tuples."""

    tuples: tuple[tuple[Term, ...], ...]

    @staticmethod
    def of(tuples: Iterable[Sequence[Term]]) -> "GroundSet":
        dedup = {tuple(term_sort_key(t) for t in tup): tuple(tup) for tup in tuples}
        return GroundSet(tuple(dedup[k] for k in sorted(dedup)))

    def union(self, other: "GroundSet") -> "GroundSet":
        return GroundSet.of(self.tuples + other.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def to_terms(self) -> list[Term]:
        return [tuple_term(tup) for tup in self.tuples]


def notin_atom(xs: Sequence[str], excluded: GroundSet) -> Atom:
    """The guard conjunct stating the quantified tuple avoids `excluded`."""
    subject = tuple_term(tuple(Var(x) for x in xs))
    return Atom(NOTIN_PRED, (subject, set_term(excluded.to_terms())))


def split_guard_exclusions(
    xs: Sequence[str], guard: SubFormula
) -> tuple[SubFormula, GroundSet]:
    """Split a residual guard into its base and any accumulated exclusion set."""
    parts = conjuncts(guard)
    last = parts[-1]
    if (
        isinstance(last, Atom)
        and last.pred.name == NOTIN_SET
        and last.args[0] == tuple_term(tuple(Var(x) for x in xs))
    ):
        members = set_members(last.args[1])
        excluded = GroundSet.of([_untuple_members(m, len(xs)) for m in members])
        return conj(parts[:-1]), excluded
    return guard, GroundSet.of([])


def _untuple_members(member: Term, width: int) -> tuple[Term, ...]:
    from .terms import untuple

    tup = untuple(member)
    if len(tup) != width and width == 1:
        return (member,)
    return tup


def lift_sat(
    structure: PartialStructure, modes: ModeTable, guard: SubFormula
) -> list[Substitution]:
    """All satisfying instances of a guard, canonically ordered.

    Callers guarantee well-modedness; an UndefinedModeError here means a
    mode-analysis bypass upstream.
    """
    results = _lift_sat(structure, modes, guard)
    dedup = {s.sort_key(): s for s in results}
    return [dedup[k] for k in sorted(dedup)]


def _lift_sat(
    structure: PartialStructure, modes: ModeTable, guard: SubFormula
) -> list[Substitution]:
    match guard:
        case Atom():
            return structure.sat(modes, guard)
        case Top():
            return [Substitution.empty()]
        case Bot():
            return []
        case And(left, right):
            out: list[Substitution] = []
            for sigma in _lift_sat(structure, modes, left):
                narrowed = apply_subst(right, sigma)
                for tau in _lift_sat(structure, modes, narrowed):
                    out.append(sigma.plus(tau))
            return out
        case Or(left, right):
            return _lift_sat(structure, modes, left) + _lift_sat(structure, modes, right)
        case Exists(xs, inner, Top()):
            return [s.without(xs) for s in _lift_sat(structure, modes, inner)]
    raise UndefinedModeError(f"guard is not a restriction: {render(guard)}")


def _instances(
    structure: PartialStructure,
    modes: ModeTable,
    xs: tuple[str, ...],
    guard: SubFormula,
) -> list[tuple[Substitution, tuple[Term, ...]]]:
    pairs = []
    for sigma in lift_sat(structure, modes, guard):
        tup = tuple(sigma.get(x) for x in xs)
        missing = [x for x, t in zip(xs, tup) if t is None]
        if missing:
            raise UndefinedModeError(
                f"guard {render(guard)} did not ground quantified variables {missing}"
            )
        pairs.append((sigma, tup))
    pairs.sort(key=lambda st: tuple(term_sort_key(t) for t in st[1]))
    return pairs


def reduce_formula(
    structure: PartialStructure, modes: ModeTable, f: SubFormula
) -> SubFormula:
    """One audit iteration: replace what the structure decides, keep the rest.

    The input must be closed and well-moded; the output is again well-moded
    and equivalent to the input on every extension of the structure.
    """
    match f:
        case Atom():
            value = structure.valuation(f)
            if value is TT:
                return TOP
            if value is FF:
                return BOT
            return f
        case Top() | Bot():
            return f
        case And(left, right):
            return And(
                reduce_formula(structure, modes, left),
                reduce_formula(structure, modes, right),
            )
        case Or(left, right):
            return Or(
                reduce_formula(structure, modes, left),
                reduce_formula(structure, modes, right),
            )
        case Forall(xs, guard, body):
            parts, residual_guard = _reduce_quantifier(structure, modes, xs, guard, body)
            return conj(parts + [Forall(xs, residual_guard, body)])
        case Exists(xs, guard, body):
            parts, residual_guard = _reduce_quantifier(structure, modes, xs, guard, body)
            from .formulas import disj

            return disj(parts + [Exists(xs, residual_guard, body)])
    raise TypeError(f"not a formula: {f!r}")


def _reduce_quantifier(
    structure: PartialStructure,
    modes: ModeTable,
    xs: tuple[str, ...],
    guard: SubFormula,
    body: SubFormula,
) -> tuple[list[SubFormula], SubFormula]:
    """Reduce each guard instance; return the reduced bodies and residual guard."""
    base_guard, already = split_guard_exclusions(xs, guard)
    pairs = _instances(structure, modes, xs, guard)
    reduced = []
    for _, tup in pairs:
        instance = apply_subst(body, Substitution(dict(zip(xs, tup))))
        reduced.append(reduce_formula(structure, modes, instance))
    excluded = already.union(GroundSet.of([tup for _, tup in pairs]))
    if len(excluded):
        residual_guard: SubFormula = And(base_guard, notin_atom(xs, excluded))
    else:
        residual_guard = base_guard
    return reduced, residual_guard


def atoms_of(
    structure: PartialStructure, modes: ModeTable, f: SubFormula
) -> set[Atom]:
    """The ground atoms a formula mentions, instantiating quantifiers via lift_sat."""
    match f:
        case Atom():
            if not ground_atom(f):
                raise ValueError(f"atoms is defined on closed formulas; got open atom {render(f)}")
            return {f}
        case Top() | Bot():
            return set()
        case And(left, right) | Or(left, right):
            return atoms_of(structure, modes, left) | atoms_of(structure, modes, right)
        case Forall(xs, guard, body) | Exists(xs, guard, body):
            out: set[Atom] = set()
            for _, tup in _instances(structure, modes, xs, guard):
                instance = apply_subst(body, Substitution(dict(zip(xs, tup))))
                out |= atoms_of(structure, modes, instance)
            return out
    raise TypeError(f"not a formula: {f!r}")


def pending_subjective(
    structure: PartialStructure, modes: ModeTable, f: SubFormula
) -> list[Atom]:
    """Ground subjective atoms of `f` still undecided in the structure."""
    pending = [
        a
        for a in atoms_of(structure, modes, f)
        if a.pred.kind is Kind.SUBJECTIVE and structure.valuation(a) is UU
    ]
    return sorted(pending, key=lambda a: (a.pred.name, tuple(term_sort_key(t) for t in a.args)))


def oracle_evaluate(
    structure: PartialStructure, f: SubFormula, domain: Sequence[Term]
) -> bool:
    """Truth of a closed formula with quantifiers ranging over a finite domain.

    This is the definitional semantics, used as an independent test
    oracle at desk scale; it never consults lift_sat or the mode table.
    Quantified variables are carried in an environment rather than
    substituted, so evaluation never rebuilds the formula.
    """
    return _Oracle(structure, domain).eval(f, {})


class _Oracle:
    __slots__ = ("structure", "domain", "_duals")

    def __init__(self, structure: PartialStructure, domain: Sequence[Term]):
        self.structure = structure
        self.domain = tuple(domain)
        self._duals: dict[int, SubFormula] = {}

    def _dual_of(self, f: SubFormula) -> SubFormula:
        cached = self._duals.get(id(f))
        if cached is None:
            cached = dual(f)
            self._duals[id(f)] = cached
        return cached

    def eval(self, f: SubFormula, env: dict[str, Term]) -> bool:
        match f:
            case Atom(pred, args):
                resolved = tuple(_resolve(a, env) for a in args)
                return self.structure.valuation(Atom(pred, resolved)) is TT
            case Top():
                return True
            case Bot():
                return False
            case And(left, right):
                return self.eval(left, env) and self.eval(right, env)
            case Or(left, right):
                return self.eval(left, env) or self.eval(right, env)
            case Forall(xs, guard, body):
                anti_guard = self._dual_of(guard)
                for tup in itertools.product(self.domain, repeat=len(xs)):
                    inner = dict(env)
                    inner.update(zip(xs, tup))
                    if self.eval(anti_guard, inner):
                        continue
                    if not self.eval(body, inner):
                        return False
                return True
            case Exists(xs, guard, body):
                for tup in itertools.product(self.domain, repeat=len(xs)):
                    inner = dict(env)
                    inner.update(zip(xs, tup))
                    if self.eval(guard, inner) and self.eval(body, inner):
                        return True
                return False
        raise TypeError(f"not a formula: {f!r}")


def _resolve(t: Term, env: dict[str, Term]) -> Term:
    from .terms import App, TimeOffset, time_offset

    match t:
        case Var(name):
            return env.get(name, t)
        case TimeOffset(base, delta):
            bound = env.get(base.name)
            return time_offset(bound, delta) if bound is not None else t
        case App(fn, args):
            return App(fn, tuple(_resolve(a, env) for a in args))
        case _:
            return t
