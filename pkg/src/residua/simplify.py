"""Residual-policy rewriting and verdict extraction on complete-enough logs.

Eight unit rules drop truth constants anywhere in a formula. Two further
rules erase whole quantifiers; those do not preserve equivalence in general
and are enabled only when the caller's completeness hypothesis makes them
sound (objectively-complete logs, or the safety/co-safety procedures here).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import lift_sat, reduce_formula
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
    NOTIN_SET,
    Or,
    SubFormula,
    TOP,
    Top,
    apply_subst,
    conjuncts,
    render,
    subformulas,
)
from .schema import ModeTable
from .structures import (
    Completeness,
    CompletenessClaim,
    PartialStructure,
)
from .terms import Substitution, Term, Time, Var

Path = tuple[int, ...]


def _step_root(f: SubFormula, quantifier_elim: bool) -> SubFormula | None:
    """Apply one rewrite rule at the root, or report no redex with None."""
    match f:
        case And(Top(), x) | And(x, Top()):
            return x
        case And(Bot(), _) | And(_, Bot()):
            return BOT
        case Or(Top(), _) | Or(_, Top()):
            return TOP
        case Or(Bot(), x) | Or(x, Bot()):
            return x
        case Forall() if quantifier_elim:
            return TOP
        case Exists() if quantifier_elim:
            return BOT
    return None


def _children(f: SubFormula) -> tuple[SubFormula, ...]:
    match f:
        case And(l, r) | Or(l, r):
            return (l, r)
        case Forall(_, c, b) | Exists(_, c, b):
            return (c, b)
        case _:
            return ()


def _replace_child(f: SubFormula, i: int, child: SubFormula) -> SubFormula:
    match f:
        case And(l, r):
            return And(child, r) if i == 0 else And(l, child)
        case Or(l, r):
            return Or(child, r) if i == 0 else Or(l, child)
        case Forall(xs, c, b):
            return Forall(xs, child, b) if i == 0 else Forall(xs, c, child)
        case Exists(xs, c, b):
            return Exists(xs, child, b) if i == 0 else Exists(xs, c, child)
    raise TypeError(f"no children: {f!r}")


def redexes(f: SubFormula, quantifier_elim: bool = False) -> list[Path]:
    """Every position where a rewrite rule applies, in preorder."""
    found: list[Path] = []

    def walk(g: SubFormula, path: Path) -> None:
        if _step_root(g, quantifier_elim) is not None:
            found.append(path)
        for i, child in enumerate(_children(g)):
            walk(child, path + (i,))

    walk(f, ())
    return found


def rewrite_at(f: SubFormula, path: Path, quantifier_elim: bool = False) -> SubFormula:
    """Apply the rule matching at `path`; raises if none applies there."""
    if not path:
        out = _step_root(f, quantifier_elim)
        if out is None:
            raise ValueError(f"no redex at root of {render(f)}")
        return out
    i = path[0]
    return _replace_child(f, i, rewrite_at(_children(f)[i], path[1:], quantifier_elim))


def simplify(f: SubFormula, quantifier_elim: bool = False) -> SubFormula:
    """The unique normal form under exhaustive rewriting.

    `quantifier_elim` may be enabled only under a completeness hypothesis
    that makes residual guards unsatisfiable in every extension; it is the
    caller's obligation to know that.
    """
    match f:
        case Atom() | Top() | Bot():
            return f
        case And(l, r):
            out: SubFormula = And(simplify(l, quantifier_elim), simplify(r, quantifier_elim))
        case Or(l, r):
            out = Or(simplify(l, quantifier_elim), simplify(r, quantifier_elim))
        case Forall(xs, c, b):
            out = Forall(xs, simplify(c, quantifier_elim), simplify(b, quantifier_elim))
        case Exists(xs, c, b):
            out = Exists(xs, simplify(c, quantifier_elim), simplify(b, quantifier_elim))
        case _:
            raise TypeError(f"not a formula: {f!r}")
    step = _step_root(out, quantifier_elim)
    while step is not None:
        out = step
        step = _step_root(out, quantifier_elim)
    return out


def normalize_random(
    f: SubFormula, rng: random.Random, quantifier_elim: bool = False
) -> tuple[SubFormula, int]:
    """Exhaust the rewrite relation picking redexes at random; returns (nf, steps)."""
    steps = 0
    while True:
        sites = redexes(f, quantifier_elim)
        if not sites:
            return f, steps
        f = rewrite_at(f, rng.choice(sites), quantifier_elim)
        steps += 1


# ---------------------------------------------------------------------------
# Verdicts on structures with completeness guarantees.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    kind: str  # violated | satisfied | residual | trivially_true | trivially_false
    witness_time: Time | None = None
    residual: SubFormula | None = None

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.witness_time is not None:
            doc["witness_time"] = (
                "inf" if self.witness_time.is_infinite else self.witness_time.value
            )
        if self.residual is not None:
            doc["residual"] = render(self.residual)
        return doc


def violated(at: Time) -> Verdict:
    return Verdict("violated", witness_time=at)


def satisfied(at: Time) -> Verdict:
    return Verdict("satisfied", witness_time=at)


class HypothesisError(Exception):
    """The verdict procedure's completeness or policy-shape hypothesis fails."""


class ValidationError(Exception):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def classify(structure: PartialStructure) -> CompletenessClaim:
    """Validate and report the structure's declared completeness."""
    claim = structure.completeness
    if claim.mode is Completeness.PAST_COMPLETE:
        assert claim.horizon is not None
        problems = []
        horizon = claim.horizon.value
        witness_time = max(
            (t for t in structure.observed_times if t <= horizon),
            default=int(horizon) if horizon != float("inf") else 0,
        )
        for name in structure.schema.objective_names():
            if name not in structure.schema.closed_world:
                pred = structure.schema.predicates[name]
                args = ", ".join(["?"] * (pred.arity - 1) + [str(witness_time)])
                problems.append(
                    f"{name}({args}) can be uu below the horizon: "
                    f"{name} is not closed-world"
                )
        beyond = [t for t in structure.observed_times if t > horizon]
        if beyond:
            problems.append(
                f"observed time points {beyond} exceed the declared horizon {claim.horizon}"
            )
        if problems:
            raise ValidationError(problems)
    return claim


# -- protected shapes: no extension can add satisfying instances below T ----


def _protected_restriction(c: SubFormula, anchors: set[str]) -> bool:
    match c:
        case Atom(pred, args):
            if pred.name == NOTIN_SET or pred.name == NEQ:
                return True
            if pred.name == IN:
                return _anchored(args[2], anchors)
            return bool(args) and _anchored(args[-1], anchors)
        case Top() | Bot():
            return True
        case And(l, r) | Or(l, r):
            return _protected_restriction(l, anchors) and _protected_restriction(r, anchors)
        case Exists(xs, inner, Top()):
            return _protected_restriction(inner, anchors | set(xs))
        case _:
            return False


def _protected_formula(f: SubFormula, anchors: set[str]) -> bool:
    match f:
        case Atom(pred, args):
            if pred.name in (NEQ, NOTIN_SET):
                return True
            if pred.name == IN:
                return _anchored(args[2], anchors)
            return bool(args) and _anchored(args[-1], anchors)
        case Top() | Bot():
            return True
        case And(l, r) | Or(l, r):
            return _protected_formula(l, anchors) and _protected_formula(r, anchors)
        case Forall(xs, guard, body) | Exists(xs, guard, body):
            parts = _flat_conjuncts(guard)
            inner = _anchor_bounded_vars(xs, parts, anchors)
            if all(_protected_restriction(p, inner) for p in parts):
                return _protected_formula(body, inner)
            return False
    return False


def _flat_conjuncts(guard: SubFormula) -> list[SubFormula]:
    from .formulas import and_parts

    return and_parts(guard)


def _anchor_bounded_vars(
    xs: tuple[str, ...], parts: list[SubFormula], anchors: set[str]
) -> set[str]:
    """Quantified variables bounded above by an anchored interval atom are
    themselves anchored; chained bounds resolve by iterating to a fixpoint."""
    inner = set(anchors)
    changed = True
    while changed:
        changed = False
        for part in parts:
            if (
                isinstance(part, Atom)
                and part.pred.name == IN
                and isinstance(part.args[0], Var)
                and part.args[0].name in xs
                and part.args[0].name not in inner
                and _anchored(part.args[2], inner)
            ):
                inner.add(part.args[0].name)
                changed = True
    return inner


def _anchored(t: Term, anchors: set[str]) -> bool:
    if isinstance(t, Var):
        return t.name in anchors
    return isinstance(t, Time) and not t.is_infinite


def _check_hypotheses(
    structure: PartialStructure,
    g: SubFormula,
    want: type,
) -> tuple[tuple[str, ...], SubFormula, SubFormula]:
    claim = classify(structure)
    if claim.mode is not Completeness.PAST_COMPLETE:
        raise HypothesisError("verdicts need a past-complete structure")
    for sub in subformulas(g):
        if isinstance(sub, Atom) and sub.pred.kind is Kind.SUBJECTIVE:
            raise HypothesisError(f"policy contains a subjective atom: {render(sub)}")
    if not isinstance(g, want):
        raise HypothesisError(f"policy is not in {want.__name__.lower()}-wrapped form")
    xs, guard, body = g.vars, g.guard, g.body
    parts = conjuncts(guard)
    head = parts[0]
    time_var = xs[0]
    if not (
        isinstance(head, Atom)
        and head.pred.name == IN
        and head.args[0] == Var(time_var)
        and isinstance(head.args[2], Time)
        and head.args[2].is_infinite
    ):
        raise HypothesisError("policy guard does not begin with the every-state time bound")
    anchors = {time_var}
    if not all(_protected_restriction(p, anchors) for p in parts[1:]):
        raise HypothesisError("policy guard mentions states the log horizon cannot cover")
    if not _protected_formula(body, anchors):
        raise HypothesisError(
            "policy body is not past-only: it can reference states beyond the current one"
        )
    return xs, guard, body


def _by_time(sigmas: list[Substitution], time_var: str) -> list[Substitution]:
    from .terms import term_sort_key

    return sorted(sigmas, key=lambda s: term_sort_key(s.get(time_var)))


def check_safety(
    structure: PartialStructure, modes: ModeTable, g: SubFormula
) -> Verdict:
    """Decide violation of an every-state policy over a past-complete log.

    The normal form of the reduced policy under quantifier elimination is
    falsum exactly when some observed state at or below the horizon violates
    the inner condition; the verdict carries the least such time.
    """
    xs, guard, body = _check_hypotheses(structure, g, Forall)
    for sigma in _by_time(lift_sat(structure, modes, guard), xs[0]):
        instance = apply_subst(body, sigma)
        outcome = simplify(reduce_formula(structure, modes, instance), quantifier_elim=True)
        if outcome == BOT:
            at = sigma.get(xs[0])
            assert isinstance(at, Time)
            return violated(at)
    overall = simplify(reduce_formula(structure, modes, g), quantifier_elim=True)
    if overall == TOP:
        return Verdict("trivially_true")
    if overall == BOT:
        return Verdict("trivially_false")
    return Verdict("residual", residual=overall)


def check_cosafety(
    structure: PartialStructure, modes: ModeTable, g: SubFormula
) -> Verdict:
    """Decide satisfaction of a some-state policy over a past-complete log."""
    xs, guard, body = _check_hypotheses(structure, g, Exists)
    for sigma in _by_time(lift_sat(structure, modes, guard), xs[0]):
        instance = apply_subst(body, sigma)
        outcome = simplify(reduce_formula(structure, modes, instance), quantifier_elim=True)
        if outcome == TOP:
            at = sigma.get(xs[0])
            assert isinstance(at, Time)
            return satisfied(at)
    overall = simplify(reduce_formula(structure, modes, g), quantifier_elim=True)
    if overall == BOT:
        return Verdict("trivially_false")
    if overall == TOP:
        return Verdict("trivially_true")
    return Verdict("residual", residual=overall)
