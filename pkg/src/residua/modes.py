"""Static well-modedness: the check that quantifier instantiation stays finite.

Two judgments, both single-pass and linear in formula size. On guards,
``mode_check_restriction`` threads a set of already-ground variables through
the guard and returns the variables the guard is guaranteed to ground. On
formulas, ``mode_check_formula`` checks every guard and requires quantified
variables to be grounded by their own guard.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formulas import (
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Kind,
    Or,
    SubFormula,
    Top,
    free_vars,
    render,
)
from .schema import ModeTable
from .terms import term_vars


@dataclass(frozen=True, slots=True)
class Diagnostic:
    message: str
    path: str
    span: tuple[int, int] | None = None

    def __str__(self) -> str:
        loc = f" at {self.span[0]}..{self.span[1]}" if self.span else ""
        return f"{self.path or '<policy>'}{loc}: {self.message}"


class ModeError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


@dataclass
class ModeReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def __bool__(self) -> bool:
        return self.ok


ModeEnv = frozenset[str]


def mode_check_restriction(
    modes: ModeTable, grounded: ModeEnv, guard: SubFormula, path: str = ""
) -> ModeEnv:
    """Return the variables grounded after evaluating `guard` left to right.

    Raises ModeError naming the offending atom and variable when an input
    position is not guaranteed ground, or a predicate has no moding.
    """
    match guard:
        case Atom(pred, args):
            if pred.is_dual or pred.kind is Kind.SUBJECTIVE:
                raise ModeError(Diagnostic(
                    f"guard atom {render(guard)} is not an objective base predicate",
                    path, guard.span))
            moding = modes.get(pred.name)
            if moding is None:
                raise ModeError(Diagnostic(
                    f"predicate {pred.name} has no declared moding", path, guard.span))
            for pos in sorted(moding.inputs):
                loose = term_vars(args[pos - 1]) - grounded
                if loose:
                    var = sorted(loose)[0]
                    raise ModeError(Diagnostic(
                        f"in {render(guard)}: input position {pos} needs ground terms "
                        f"but variable {var} is not yet grounded",
                        path, guard.span))
            out = set(grounded)
            for pos in sorted(moding.outputs):
                out |= term_vars(args[pos - 1])
            return frozenset(out)
        case Top() | Bot():
            return grounded
        case And(left, right):
            mid = mode_check_restriction(modes, grounded, left, path + ".left")
            return mode_check_restriction(modes, mid, right, path + ".right")
        case Or(left, right):
            a = mode_check_restriction(modes, grounded, left, path + ".left")
            b = mode_check_restriction(modes, grounded, right, path + ".right")
            return a & b
        case Exists(xs, inner, Top()):
            out = mode_check_restriction(modes, grounded, inner, path + ".exists")
            return out - set(xs)
    raise ModeError(Diagnostic(
        f"not a restriction: {render(guard)}", path, None))


def mode_check_formula(
    modes: ModeTable, grounded: ModeEnv, f: SubFormula, path: str = ""
) -> ModeReport:
    """Decide the formula judgment, collecting diagnostics instead of raising."""
    report = ModeReport()
    _check_formula(modes, grounded, f, path, report)
    return report


def _check_formula(
    modes: ModeTable, grounded: ModeEnv, f: SubFormula, path: str, report: ModeReport
) -> None:
    match f:
        case Atom():
            loose = free_vars(f) - grounded
            if loose:
                report.diagnostics.append(Diagnostic(
                    f"atom {render(f)} mentions ungrounded variables {sorted(loose)}",
                    path, f.span))
        case Top() | Bot():
            return
        case And(left, right) | Or(left, right):
            _check_formula(modes, grounded, left, path + ".left", report)
            _check_formula(modes, grounded, right, path + ".right", report)
        case Forall(xs, guard, body) | Exists(xs, guard, body):
            try:
                out = mode_check_restriction(modes, grounded, guard, path + ".guard")
            except ModeError as err:
                report.diagnostics.append(err.diagnostic)
                return
            missing = set(xs) - out
            if missing:
                report.diagnostics.append(Diagnostic(
                    f"quantified variables {sorted(missing)} are not grounded by the guard",
                    path, None))
                return
            stray = free_vars(guard) - (grounded | set(xs))
            if stray:
                report.diagnostics.append(Diagnostic(
                    f"guard mentions variables {sorted(stray)} bound neither here "
                    f"nor in an enclosing scope", path, None))
                return
            _check_formula(modes, out, body, path + ".body", report)
        case _:
            report.diagnostics.append(Diagnostic(f"not a formula: {f!r}", path, None))


def well_moded(modes: ModeTable, f: SubFormula) -> bool:
    return mode_check_formula(modes, frozenset(), f).ok
