"""residua: iterative reduction of first-order temporal policies over audit logs."""

from .engine import (
    GroundSet,
    atoms_of,
    lift_sat,
    oracle_evaluate,
    pending_subjective,
    reduce_formula,
)
from .formulas import (
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Kind,
    Or,
    Predicate,
    SubFormula,
    Top,
    alpha_equal,
    apply_subst,
    canonical_render,
    dual,
    free_vars,
    render,
)
from .modes import Diagnostic, ModeError, mode_check_formula, mode_check_restriction, well_moded
from .schema import ModeTable, Schema
from .simplify import (
    Verdict,
    check_cosafety,
    check_safety,
    classify,
    simplify,
)
from .structures import (
    Completeness,
    CompletenessClaim,
    ConflictError,
    PartialStructure,
    Truth,
    UndefinedModeError,
    assert_subjective,
    extend,
    make_atom,
)
from .temporal import TemporalFormula, eventually, globally, translate
from .terms import (
    Const,
    Substitution,
    Term,
    Time,
    Var,
    INFTY,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
