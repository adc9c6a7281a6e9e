"""Partial structures: three-valued, indexed fact stores over audit logs.

A structure maps every ground atom to tt, ff, or uu. Truth comes from
recorded facts, human assertions on subjective atoms, builtin evaluation
(time-interval membership, disequality, set non-membership), or
closed-world defaults bounded by the structure's completeness claim.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .formulas import Atom, IN, NEQ, NOTIN_SET, Kind, atom_key, ground_atom
from .schema import Moding, ModeTable, Schema
from .terms import (
    INFTY,
    Const,
    Substitution,
    Term,
    Time,
    is_ground,
    set_members,
    term_sort_key,
    unify_ground,
)


class Truth(enum.Enum):
    TT = "tt"
    FF = "ff"
    UU = "uu"

    def flip(self) -> "Truth":
        if self is Truth.TT:
            return Truth.FF
        if self is Truth.FF:
            return Truth.TT
        return Truth.UU


TT, FF, UU = Truth.TT, Truth.FF, Truth.UU


class Completeness(enum.Enum):
    GENERIC = "generic"
    OBJECTIVELY_COMPLETE = "objective"
    PAST_COMPLETE = "past"


@dataclass(frozen=True, slots=True)
class CompletenessClaim:
    mode: Completeness
    horizon: Time | None = None

    def __post_init__(self) -> None:
        if self.mode is Completeness.PAST_COMPLETE and self.horizon is None:
            raise ValueError("past-completeness needs a horizon")

    @staticmethod
    def generic() -> "CompletenessClaim":
        return CompletenessClaim(Completeness.GENERIC)

    @staticmethod
    def objectively_complete() -> "CompletenessClaim":
        return CompletenessClaim(Completeness.OBJECTIVELY_COMPLETE)

    @staticmethod
    def past_complete(horizon: int) -> "CompletenessClaim":
        return CompletenessClaim(Completeness.PAST_COMPLETE, Time(horizon))

    def rank(self) -> tuple[int, float]:
        if self.mode is Completeness.GENERIC:
            return (0, 0.0)
        if self.mode is Completeness.PAST_COMPLETE:
            assert self.horizon is not None
            return (1, float(self.horizon.value))
        return (2, 0.0)

    def merge(self, other: "CompletenessClaim") -> "CompletenessClaim":
        return self if self.rank() >= other.rank() else other


class ConflictError(Exception):
    """Two sources decided the same atom both ways."""

    def __init__(self, conflicts: list[str]):
        self.conflicts = conflicts
        super().__init__("conflicting facts: " + "; ".join(conflicts))


class UndefinedModeError(Exception):
    """sat was asked for instances of an atom outside its moding contract."""


def _render_atom(a: Atom) -> str:
    from .formulas import render

    return render(a)


class PartialStructure:
    """An immutable snapshot of the audit log as a three-valued structure."""

    def __init__(
        self,
        schema: Schema,
        facts: dict[tuple, tuple[Atom, Truth]] | None = None,
        observed_times: Iterable[int] = (),
        completeness: CompletenessClaim | None = None,
        subjective: dict[tuple, tuple[Atom, Truth]] | None = None,
        closed_time_domain: bool = False,
    ):
        self.schema = schema
        self._facts = dict(facts or {})
        self.observed_times: tuple[int, ...] = tuple(sorted(set(observed_times)))
        self.completeness = completeness or CompletenessClaim.generic()
        self._subjective = dict(subjective or {})
        # When set, an in-bounds time point absent from observed_times is ff
        # rather than uu even without a past-completeness claim.
        self.closed_time_domain = closed_time_domain
        self._index: dict[tuple, dict[tuple, list[Atom]]] = {}

    # -- construction -------------------------------------------------------

    @staticmethod
    def empty(schema: Schema) -> "PartialStructure":
        return PartialStructure(schema)

    def with_fact(self, atom: Atom, value: Truth) -> "PartialStructure":
        """A new structure that additionally decides `atom` to `value`."""
        delta = PartialStructure(self.schema)
        delta._record(atom, value)
        return extend(self, delta)

    def with_times(self, *times: int) -> "PartialStructure":
        delta = PartialStructure(self.schema, observed_times=times)
        return extend(self, delta)

    def with_completeness(self, claim: CompletenessClaim) -> "PartialStructure":
        delta = PartialStructure(self.schema, completeness=claim)
        return extend(self, delta)

    def _record(self, atom: Atom, value: Truth) -> None:
        if value is UU:
            raise ValueError("facts are recorded as tt or ff, never uu")
        if not ground_atom(atom):
            raise ValueError(f"facts must be ground: {_render_atom(atom)}")
        if atom.pred.is_dual:
            atom, value = atom.base(), value.flip()
        if self.schema.is_builtin(atom.pred.name):
            raise ValueError(f"builtin atoms are computed, not stored: {atom.pred.name}")
        key = atom_key(atom)
        store = self._subjective if atom.pred.kind is Kind.SUBJECTIVE else self._facts
        seen = store.get(key)
        if seen is not None and seen[1] is not value:
            raise ConflictError([f"{_render_atom(atom)} asserted both tt and ff"])
        store[key] = (atom, value)

    # -- valuation ----------------------------------------------------------

    def valuation(self, atom: Atom) -> Truth:
        """The three-valued truth of a ground atom."""
        if not ground_atom(atom):
            raise ValueError(f"valuation needs a ground atom: {_render_atom(atom)}")
        if atom.pred.is_dual:
            return self.valuation(atom.base()).flip()
        name = atom.pred.name
        if name == IN:
            return self._eval_in(atom.args)
        if name == NEQ:
            return TT if atom.args[0] != atom.args[1] else FF
        if name == NOTIN_SET:
            members = set_members(atom.args[1])
            return FF if atom.args[0] in members else TT
        if atom.pred.kind is Kind.SUBJECTIVE:
            seen = self._subjective.get(atom_key(atom))
            return seen[1] if seen else UU
        seen = self._facts.get(atom_key(atom))
        if seen:
            return seen[1]
        return self._closed_world_default(atom)

    def _eval_in(self, args: tuple[Term, ...]) -> Truth:
        t, lo, hi = args
        if not (isinstance(t, Time) and isinstance(lo, Time) and isinstance(hi, Time)):
            return FF
        if not lo.value <= t.value <= hi.value:
            return FF
        if not t.is_infinite and t.value in set(self.observed_times):
            return TT
        # In bounds but unobserved: decided false only when the time domain
        # below the relevant horizon is closed.
        if self.completeness.mode is Completeness.OBJECTIVELY_COMPLETE:
            return FF
        if (
            self.completeness.mode is Completeness.PAST_COMPLETE
            and self.completeness.horizon is not None
            and t.value <= self.completeness.horizon.value
        ):
            return FF
        if self.closed_time_domain:
            return FF
        return UU

    def _closed_world_default(self, atom: Atom) -> Truth:
        if self.completeness.mode is Completeness.OBJECTIVELY_COMPLETE:
            return FF
        if (
            self.completeness.mode is Completeness.PAST_COMPLETE
            and atom.pred.name in self.schema.closed_world
        ):
            last = atom.args[-1] if atom.args else None
            horizon = self.completeness.horizon
            if isinstance(last, Time) and horizon is not None and last.value <= horizon.value:
                return FF
        return UU

    # -- sat: satisfying instances of a single atom -------------------------

    def sat(self, modes: ModeTable, atom: Atom) -> list[Substitution]:
        """All substitutions over output-position variables that make `atom` true.

        Input positions must be ground; the result is canonically ordered.
        """
        name = atom.pred.name
        if atom.pred.is_dual or atom.pred.kind is Kind.SUBJECTIVE:
            raise UndefinedModeError(f"sat undefined on {name}")
        moding = modes.get(name)
        if moding is None:
            raise UndefinedModeError(f"predicate {name} has no moding")
        for pos in sorted(moding.inputs):
            arg = atom.args[pos - 1]
            if not is_ground(arg):
                raise UndefinedModeError(
                    f"{name}: input position {pos} is not ground in {_render_atom(atom)}"
                )
        if name == IN:
            results = self._sat_in(atom.args)
        elif name in (NEQ, NOTIN_SET):
            results = [Substitution.empty()] if self.valuation(atom) is TT else []
        else:
            results = self._sat_indexed(moding, atom)
        out_vars: set[str] = set()
        for pos in sorted(moding.outputs):
            from .terms import term_vars

            out_vars |= term_vars(atom.args[pos - 1])
        projected = {
            Substitution({x: t for x, t in dict(s.items()).items() if x in out_vars})
            for s in results
        }
        return sorted(projected, key=lambda s: s.sort_key())

    def _sat_in(self, args: tuple[Term, ...]) -> list[Substitution]:
        t, lo, hi = args
        assert isinstance(lo, Time) and isinstance(hi, Time)
        hits = []
        for tick in self.observed_times:
            if lo.value <= tick <= hi.value:
                binding: dict[str, Term] = {}
                if unify_ground(t, Time(tick), binding):
                    hits.append(Substitution(binding))
        return hits

    def _sat_indexed(self, moding: Moding, atom: Atom) -> list[Substitution]:
        rows = self._candidate_rows(moding, atom)
        hits = []
        for row in rows:
            binding: dict[str, Term] = {}
            if all(unify_ground(p, v, binding) for p, v in zip(atom.args, row.args)):
                hits.append(Substitution(binding))
        return hits

    def _candidate_rows(self, moding: Moding, atom: Atom) -> list[Atom]:
        name = atom.pred.name
        positions = tuple(sorted(moding.inputs))
        index_id = (name, positions)
        index = self._index.get(index_id)
        if index is None:
            index = {}
            for stored, value in self._facts.values():
                if stored.pred.name != name or value is not TT:
                    continue
                key = tuple(term_sort_key(stored.args[p - 1]) for p in positions)
                index.setdefault(key, []).append(stored)
            self._index[index_id] = index
        key = tuple(term_sort_key(atom.args[p - 1]) for p in positions)
        return index.get(key, [])

    # -- introspection helpers ----------------------------------------------

    def facts(self) -> list[tuple[Atom, Truth]]:
        return sorted(self._facts.values(), key=lambda fv: atom_key(fv[0]))

    def subjective_assertions(self) -> list[tuple[Atom, Truth]]:
        return sorted(self._subjective.values(), key=lambda fv: atom_key(fv[0]))

    def constants(self) -> list[Const]:
        """All constants appearing in recorded facts and assertions."""
        seen: dict[str, Const] = {}
        for stored, _ in list(self._facts.values()) + list(self._subjective.values()):
            for arg in stored.args:
                for c in _constants_in(arg):
                    seen[c.name] = c
        return [seen[k] for k in sorted(seen)]

    def digest_source(self) -> str:
        lines = []
        for stored, value in self.facts():
            lines.append(f"fact {_render_atom(stored)} {value.value}")
        for stored, value in self.subjective_assertions():
            lines.append(f"subj {_render_atom(stored)} {value.value}")
        lines.append("times " + ",".join(str(t) for t in self.observed_times))
        claim = self.completeness
        lines.append(f"complete {claim.mode.value} {claim.horizon or ''}")
        lines.append(f"closedtime {self.closed_time_domain}")
        return "\n".join(lines)


def _constants_in(t: Term):
    from .terms import App

    match t:
        case Const():
            yield t
        case App(_, args):
            for a in args:
                yield from _constants_in(a)
        case _:
            return


def extend(base: PartialStructure, delta: PartialStructure) -> PartialStructure:
    """Merge two structures; every decided atom of `base` keeps its value.

    The increment must not contradict the base: neither its explicit facts,
    nor decisions the base derives from closed-world claims. Completeness
    claims arriving in `delta` apply to the merged fact set, so they absorb
    facts the base already holds.
    """
    conflicts: list[str] = []
    for atom, value in list(delta._facts.values()) + list(delta._subjective.values()):
        existing = base.valuation(atom)
        if existing is not UU and existing is not value:
            conflicts.append(
                f"{_render_atom(atom)} is {existing.value} but extension says {value.value}"
            )
    claim = base.completeness
    fresh = set(delta.observed_times) - set(base.observed_times)
    if claim.mode is Completeness.PAST_COMPLETE and claim.horizon is not None:
        for tick in sorted(fresh):
            if tick <= claim.horizon.value:
                conflicts.append(
                    f"time point {tick} is below the past-complete horizon "
                    f"{claim.horizon} but was not previously observed"
                )
    if base.closed_time_domain:
        for tick in sorted(fresh):
            conflicts.append(f"time point {tick} added to a closed time domain")
    if conflicts:
        raise ConflictError(conflicts)
    facts = dict(base._facts)
    facts.update(delta._facts)
    subjective = dict(base._subjective)
    subjective.update(delta._subjective)
    return PartialStructure(
        schema=base.schema,
        facts=facts,
        observed_times=set(base.observed_times) | set(delta.observed_times),
        completeness=base.completeness.merge(delta.completeness),
        subjective=subjective,
        closed_time_domain=base.closed_time_domain or delta.closed_time_domain,
    )


def assert_subjective(
    structure: PartialStructure, atom: Atom, value: Truth
) -> PartialStructure:
    """Record a human decision on a ground subjective atom, as a structure extension."""
    if atom.pred.kind is not Kind.SUBJECTIVE:
        raise ValueError(f"{atom.pred.name} is not subjective")
    if not ground_atom(atom):
        raise ValueError(f"subjective assertions must be ground: {_render_atom(atom)}")
    if value is UU:
        raise ValueError("a subjective assertion decides tt or ff")
    existing = structure.valuation(atom)
    if existing is not UU and existing is not value:
        raise ConflictError(
            [f"{_render_atom(atom)} already decided {existing.value}, cannot assert {value.value}"]
        )
    delta = PartialStructure(structure.schema)
    delta._record(atom, value)
    return extend(structure, delta)


def make_atom(schema: Schema, name: str, *args: Term | str | int) -> Atom:
    """Convenience constructor resolving the predicate and coercing plain args."""
    pred = schema.lookup(name)
    coerced: list[Term] = []
    for a in args:
        if isinstance(a, str):
            coerced.append(Const(a))
        elif isinstance(a, int):
            coerced.append(Time(a))
        elif isinstance(a, float) and a == INFTY.value:
            coerced.append(INFTY)
        else:
            coerced.append(a)
    return Atom(pred, tuple(coerced))


def herbrand_terms(
    structure: PartialStructure, extra: Sequence[Term] = (), fresh: bool = True
) -> list[Term]:
    """A finite quantification domain: the structure's constants and times,
    any supplied extras, plus one fresh constant and one fresh time point."""
    terms: dict[tuple, Term] = {}
    for c in structure.constants():
        terms[term_sort_key(c)] = c
    for tick in structure.observed_times:
        t = Time(tick)
        terms[term_sort_key(t)] = t
    for t in extra:
        terms[term_sort_key(t)] = t
    if fresh:
        unseen = Const("@unseen")
        terms.setdefault(term_sort_key(unseen), unseen)
        top = max((t for t in structure.observed_times), default=0)
        horizon = structure.completeness.horizon
        if horizon is not None and not horizon.is_infinite:
            top = max(top, int(horizon.value))
        fresh_time = Time(top + 1)
        terms.setdefault(term_sort_key(fresh_time), fresh_time)
    return [terms[k] for k in sorted(terms)]
