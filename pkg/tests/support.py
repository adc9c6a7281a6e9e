"""Shared fixtures and generators for the test suite.

The generators build random schemas, structures and well-moded closed
formulas at desk scale, plus extension enumerators for checking reduction
correctness against the brute-force semantics.
"""

from __future__ import annotations

import itertools
import random

from residua.formulas import (
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
    conj,
    conjuncts,
    free_vars,
)
from residua.schema import BUILTINS, Schema
from residua.structures import (
    FF,
    PartialStructure,
    TT,
    Truth,
    UU,
    assert_subjective,
    extend,
    herbrand_terms,
    make_atom,
)
from residua.terms import Const, INFTY, Term, Time, Var, ZERO

CONST_POOL = [Const(c) for c in ("A", "B", "C", "D")]
TIME_POOL = [1, 2, 4, 6, 8]


# ---------------------------------------------------------------------------
# Example fixtures: the request-response policy world and the disclosure world.
# ---------------------------------------------------------------------------


def request_schema() -> Schema:
    schema = Schema()
    schema.declare_objective("req", 3, set(), {1, 2, 3}, closed_world=True)
    schema.declare_objective("inrole", 3, {2, 3}, {1}, closed_world=True)
    schema.declare_objective("send", 4, set(), {1, 2, 3, 4}, closed_world=True)
    schema.declare_subjective("contains", 4)
    schema.declare_subjective("ftr", 3)
    return schema


def request_structures(schema: Schema) -> tuple[PartialStructure, PartialStructure]:
    """The first structure (states 1,3,7 and one request) and its extension."""
    first = PartialStructure.empty(schema).with_times(1, 3, 7)
    first = first.with_fact(make_atom(schema, "req", "Alice", "mr", 3), TT)
    second = first.with_times(11)
    second = second.with_fact(make_atom(schema, "inrole", "Bob", "records", 11), TT)
    second = second.with_fact(make_atom(schema, "send", "Bob", "Alice", "M", 11), TT)
    return first, second


REQUEST_POLICY = """
objective req/3 mode(in={}, out={1,2,3}) closed;
objective inrole/3 mode(in={2,3}, out={1}) closed;
objective send/4 mode(in={}, out={1,2,3,4}) closed;
subjective contains/4;
subjective ftr/3;

G freeze tau . forall p, t . (req(p, t)) =>
    until(not(ftr(p, t)),
          freeze tp . and(in(tp, tau, tau + 30),
                          exists q, m . (and(inrole(q, records), send(q, p, m))) &
                              contains(m, p, t)))
"""


def disclosure_schema(subjective_purp_in: bool = False) -> Schema:
    schema = Schema()
    schema.declare_objective("send", 4, set(), {1, 2, 3, 4}, closed_world=True)
    schema.declare_objective("purp", 3, {1}, {2}, closed_world=True)
    schema.declare_objective("tagged", 4, {1}, {2, 3}, closed_world=True)
    schema.declare_objective("attr_in", 3, {1, 2}, set(), closed_world=True)
    schema.declare_objective("inrole", 3, {2, 3}, {1}, closed_world=True)
    schema.declare_objective("consents", 3, set(), {1, 2, 3}, closed_world=True)
    if subjective_purp_in:
        schema.declare_subjective("purp_in", 3)
    else:
        schema.declare_objective("purp_in", 3, {1, 2}, set(), closed_world=True)
    return schema


DISCLOSURE_POLICY_BODY = """
G forall p1, p2, m, u, q, t .
    (and(send(p1, p2, m), and(purp(m, u), and(tagged(m, q, t), attr_in(t, phi))))) =>
    or(and(inrole(p2, doc(q)), purp_in(u, treatment)),
       sometimepast(consents(q, sendaction(p1, p2, (q, t)))))
"""

DISCLOSURE_SCHEMA_PREAMBLE = """
objective send/4 mode(in={}, out={1,2,3,4}) closed;
objective purp/3 mode(in={1}, out={2}) closed;
objective tagged/4 mode(in={1}, out={2,3}) closed;
objective attr_in/3 mode(in={1,2}, out={}) closed;
objective inrole/3 mode(in={2,3}, out={1}) closed;
objective consents/3 mode(in={}, out={1,2,3}) closed;
objective purp_in/3 mode(in={1,2}, out={}) closed;
"""


def response_policy(schema: Schema) -> SubFormula:
    """The request-response policy in its expanded sublogic form."""
    from residua.terms import time_offset

    body = Exists(
        ("tp", "q", "m"),
        conj([
            make_atom(schema, "in", Var("tp"), Var("tau"), time_offset(Var("tau"), 30)),
            make_atom(schema, "inrole", Var("q"), "records", Var("tp")),
            make_atom(schema, "send", Var("q"), Var("p"), Var("m"), Var("tp")),
        ]),
        And(
            make_atom(schema, "contains", Var("m"), Var("p"), Var("t"), Var("tp")),
            Forall(
                ("tpp",),
                And(
                    make_atom(schema, "in", Var("tpp"), Var("tau"), Var("tp")),
                    make_atom(schema, "neq", Var("tpp"), Var("tp")),
                ),
                make_atom(schema, "~ftr", Var("p"), Var("t"), Var("tpp")),
            ),
        ),
    )
    guard = And(
        make_atom(schema, "in", Var("tau"), 0, INFTY),
        make_atom(schema, "req", Var("p"), Var("t"), Var("tau")),
    )
    return Forall(("tau", "p", "t"), guard, body)


def disclosure_policy_expanded(schema: Schema) -> SubFormula:
    """The message-disclosure policy in its expanded sublogic form."""
    from residua.terms import App

    doc_q = App("doc", (Var("q"),))
    action = App("sendaction", (Var("p1"), Var("p2"),
                                App("$tuple", (Var("q"), Var("t")))))
    guard = conj([
        make_atom(schema, "in", Var("tau"), 0, INFTY),
        make_atom(schema, "send", Var("p1"), Var("p2"), Var("m"), Var("tau")),
        make_atom(schema, "purp", Var("m"), Var("u"), Var("tau")),
        make_atom(schema, "tagged", Var("m"), Var("q"), Var("t"), Var("tau")),
        make_atom(schema, "attr_in", Var("t"), "phi", Var("tau")),
    ])
    body = Or(
        And(
            make_atom(schema, "inrole", Var("p2"), doc_q, Var("tau")),
            make_atom(schema, "purp_in", Var("u"), "treatment", Var("tau")),
        ),
        Exists(
            ("tp",),
            make_atom(schema, "in", Var("tp"), 0, Var("tau")),
            make_atom(schema, "consents", Var("q"), action, Var("tp")),
        ),
    )
    return Forall(("tau", "p1", "p2", "m", "u", "q", "t"), guard, body)


def violation_structure(schema: Schema, recipient_is_doctor: bool = False) -> PartialStructure:
    """One state at 7 where A sends B a message tagged with C's medications."""
    s = PartialStructure.empty(schema).with_times(7)
    s = s.with_fact(make_atom(schema, "send", "A", "B", "M", 7), TT)
    s = s.with_fact(make_atom(schema, "purp", "M", "test", 7), TT)
    s = s.with_fact(make_atom(schema, "tagged", "M", "C", "meds", 7), TT)
    s = s.with_fact(make_atom(schema, "attr_in", "meds", "phi", 7), TT)
    s = s.with_fact(make_atom(schema, "purp_in", "test", "treatment", 7), TT)
    if recipient_is_doctor:
        from residua.terms import App

        s = s.with_fact(
            make_atom(schema, "inrole", Const("B"), App("doc", (Const("C"),)), Time(7)), TT
        )
    from residua.structures import CompletenessClaim

    return s.with_completeness(CompletenessClaim.past_complete(10))


# ---------------------------------------------------------------------------
# Random worlds.
# ---------------------------------------------------------------------------


def random_world(rng: random.Random, n_preds: int = 3) -> tuple[Schema, PartialStructure]:
    schema = Schema()
    shapes = []
    for i in range(rng.randint(1, n_preds)):
        name = f"p{i}"
        style = rng.choice(["action", "action", "lookup", "subjective"])
        if style == "subjective":
            arity = rng.randint(1, 2) + 1  # plus the time argument
            schema.declare_subjective(name, arity)
            shapes.append((name, arity, "subjective"))
        elif style == "action":
            arity = rng.randint(1, 2) + 1
            schema.declare_objective(
                name, arity, set(), set(range(1, arity + 1)),
                closed_world=rng.random() < 0.7,
            )
            shapes.append((name, arity, "action"))
        else:
            arity = 3
            schema.declare_objective(
                name, arity, {1}, {2}, closed_world=rng.random() < 0.7
            )
            shapes.append((name, arity, "lookup"))
    consts = CONST_POOL[: rng.randint(2, 4)]
    times = sorted(rng.sample(TIME_POOL, rng.randint(1, 3)))
    structure = PartialStructure.empty(schema).with_times(*times)
    for name, arity, style in shapes:
        if style == "subjective":
            continue
        for _ in range(rng.randint(0, 3)):
            args = tuple(
                Time(rng.choice(times)) if pos == arity - 1 else rng.choice(consts)
                for pos in range(arity)
            )
            atom = Atom(schema.lookup(name), args)
            value = TT if rng.random() < 0.75 else FF
            if structure.valuation(atom) is UU:
                structure = structure.with_fact(atom, value)
    if rng.random() < 0.25:
        from residua.structures import CompletenessClaim

        horizon = max(times) + rng.randint(0, 2)
        for name, _, style in shapes:
            if style != "subjective":
                schema.closed_world.add(name)
        structure = structure.with_completeness(CompletenessClaim.past_complete(horizon))
    return schema, structure


def ground_pool(structure: PartialStructure) -> list[Term]:
    pool: list[Term] = list(structure.constants()) or [CONST_POOL[0]]
    pool.extend(Time(t) for t in structure.observed_times)
    return pool


def random_formula(
    rng: random.Random,
    schema: Schema,
    structure: PartialStructure,
    grounded: tuple[str, ...] = (),
    env_terms: tuple[Term, ...] = (),
    depth: int = 3,
    var_budget: int = 3,
) -> SubFormula:
    """A closed (relative to `grounded`) well-moded formula over the schema.

    `var_budget` caps the total quantified variables along any path, keeping
    brute-force evaluation over domain tuples at desk scale.
    """
    pool = list(env_terms) or ground_pool(structure)
    choices = ["atom", "atom", "const", "bin"]
    if depth > 0 and var_budget > 0:
        choices += ["quant", "quant"]
    kind = rng.choice(choices)
    if kind == "const":
        return TOP if rng.random() < 0.5 else BOT
    if kind == "atom":
        return _random_atom(rng, schema, grounded, pool)
    if kind == "bin":
        node = And if rng.random() < 0.5 else Or
        return node(
            random_formula(rng, schema, structure, grounded, env_terms, depth - 1,
                           var_budget),
            random_formula(rng, schema, structure, grounded, env_terms, depth - 1, 0),
        )
    return _random_quantifier(rng, schema, structure, grounded, env_terms, depth,
                              var_budget)


_fresh_test_counter = itertools.count(1)


def _fresh_test_var() -> str:
    return f"x{next(_fresh_test_counter)}"


def _random_atom(
    rng: random.Random, schema: Schema, grounded: tuple[str, ...], pool: list[Term]
) -> SubFormula:
    names = [n for n in schema.predicates if n not in (IN, NEQ, NOTIN_SET)]
    if not names:
        return TOP
    name = rng.choice(sorted(names))
    pred = schema.lookup(name)
    if rng.random() < 0.3:
        pred = pred.dual()
    args = []
    for _ in range(pred.arity):
        if grounded and rng.random() < 0.5:
            args.append(Var(rng.choice(grounded)))
        else:
            args.append(rng.choice(pool))
    return Atom(pred, tuple(args))


def _random_guard(
    rng: random.Random,
    schema: Schema,
    grounded: tuple[str, ...],
    pool: list[Term],
    max_fresh: int = 3,
) -> tuple[SubFormula, tuple[str, ...]]:
    """A guard chain introducing at least one fresh variable, plus those vars."""
    fresh: list[str] = []
    parts: list[SubFormula] = []
    action_names = [
        n
        for n in schema.predicates
        if schema.modes.get(n) is not None
        and n not in (IN, NEQ, NOTIN_SET)
        and not schema.modes.get(n).inputs
        and schema.lookup(n).arity <= max_fresh
    ]
    lookup_names = [
        n
        for n in schema.predicates
        if schema.modes.get(n) is not None
        and n not in (IN, NEQ, NOTIN_SET)
        and schema.modes.get(n).inputs
    ]
    if not action_names or rng.random() < 0.4:
        t = _fresh_test_var()
        fresh.append(t)
        hi = INFTY if rng.random() < 0.7 else Time(rng.choice(TIME_POOL))
        parts.append(Atom(BUILTINS[IN], (Var(t), ZERO, hi)))
    else:
        name = rng.choice(sorted(action_names))
        pred = schema.lookup(name)
        args = []
        for _ in range(pred.arity):
            v = _fresh_test_var()
            fresh.append(v)
            args.append(Var(v))
        parts.append(Atom(pred, tuple(args)))
    if lookup_names and len(fresh) < max_fresh and rng.random() < 0.4:
        name = rng.choice(sorted(lookup_names))
        pred = schema.lookup(name)
        moding = schema.modes.get(name)
        args = []
        for pos in range(1, pred.arity + 1):
            if pos in moding.inputs:
                source = list(fresh) + list(grounded)
                args.append(Var(rng.choice(source)) if source else rng.choice(pool))
            elif pos in moding.outputs and len(fresh) < max_fresh:
                v = _fresh_test_var()
                fresh.append(v)
                args.append(Var(v))
            else:
                args.append(rng.choice(pool))
        parts.append(Atom(pred, tuple(args)))
    return conj(parts), tuple(fresh)


def _random_quantifier(
    rng: random.Random,
    schema: Schema,
    structure: PartialStructure,
    grounded: tuple[str, ...],
    env_terms: tuple[Term, ...],
    depth: int,
    var_budget: int,
) -> SubFormula:
    pool = list(env_terms) or ground_pool(structure)
    guard, fresh = _random_guard(rng, schema, grounded, pool, max_fresh=var_budget)
    body = random_formula(
        rng, schema, structure, grounded + fresh, env_terms, depth - 1,
        var_budget - len(fresh),
    )
    node = Forall if rng.random() < 0.5 else Exists
    return node(fresh, guard, body)


# ---------------------------------------------------------------------------
# Extensions.
# ---------------------------------------------------------------------------


def undecided_atoms(structure: PartialStructure, limit: int = 200) -> list[Atom]:
    """Ground atoms over the structure's vocabulary still valued uu."""
    schema = structure.schema
    consts = structure.constants() or [CONST_POOL[0]]
    times = [Time(t) for t in structure.observed_times] or [Time(1)]
    out = []
    for name in sorted(schema.predicates):
        if schema.is_builtin(name):
            continue
        pred = schema.predicates[name]
        pools = [consts] * (pred.arity - 1) + [times]
        for combo in itertools.product(*pools):
            atom = Atom(pred, tuple(combo))
            if structure.valuation(atom) is UU:
                out.append(atom)
                if len(out) >= limit:
                    return out
    return out


def decide(structure: PartialStructure, atom: Atom, value: Truth) -> PartialStructure:
    if atom.pred.kind is Kind.SUBJECTIVE:
        return assert_subjective(structure, atom, value)
    return structure.with_fact(atom, value)


def extensions_of(
    structure: PartialStructure,
    rng: random.Random,
    exhaustive_limit: int = 2,
    samples: int = 6,
) -> list[PartialStructure]:
    """Extensions of the structure: the identity, atom decisions, and new states."""
    candidates = undecided_atoms(structure)
    extensions = [structure]
    if len(candidates) <= exhaustive_limit:
        assignments = itertools.product([TT, FF, None], repeat=len(candidates))
        for values in assignments:
            ext = structure
            for atom, value in zip(candidates, values):
                if value is not None:
                    ext = decide(ext, atom, value)
            extensions.append(ext)
    else:
        for _ in range(samples):
            ext = structure
            for atom in rng.sample(candidates, min(len(candidates), 4)):
                if rng.random() < 0.7:
                    ext = decide(ext, atom, TT if rng.random() < 0.5 else FF)
            extensions.append(ext)
    with_fresh = []
    horizon = structure.completeness.horizon
    top = max((t for t in structure.observed_times), default=0)
    if horizon is not None:
        top = max(top, int(horizon.value))
    for ext in extensions:
        with_fresh.append(ext.with_times(top + 1))
    return extensions + with_fresh


# ---------------------------------------------------------------------------
# Brute-force oracles independent of the engine's indexed path.
# ---------------------------------------------------------------------------


def brute_force_sat(
    structure: PartialStructure, atom: Atom, domain: list[Term], out_positions: set[int]
) -> set[tuple]:
    """Satisfying output-projections of an atom by exhaustive grounding."""
    from residua.formulas import apply_subst as subst_formula
    from residua.terms import Substitution

    names = sorted(free_vars(atom))
    hits = set()
    for combo in itertools.product(domain, repeat=len(names)):
        sigma = Substitution(dict(zip(names, combo)))
        grounded = subst_formula(atom, sigma)
        if structure.valuation(grounded) is TT:
            out_vars = set()
            from residua.terms import term_vars

            for pos in sorted(out_positions):
                out_vars |= term_vars(atom.args[pos - 1])
            hits.add(tuple((x, sigma.get(x)) for x in sorted(out_vars)))
    return hits


def guard_only_objective(f: SubFormula) -> bool:
    """No quantifier guard anywhere contains a subjective or dual atom."""
    from residua.formulas import atoms_syntactic, subformulas

    for sub in subformulas(f):
        if isinstance(sub, (Forall, Exists)):
            for atom in atoms_syntactic(sub.guard):
                if atom.pred.kind is Kind.SUBJECTIVE or atom.pred.is_dual:
                    return False
    return True


# ---------------------------------------------------------------------------
# The protected-shape predicates, written from the definition: a formula is
# protected for a set of time anchors T when no extension of a log complete
# up to all of T can change its truth.
# ---------------------------------------------------------------------------


def protected_restriction(c: SubFormula, anchors: frozenset) -> bool:
    match c:
        case Atom(pred, args):
            if pred.name == NOTIN_SET or pred.name == NEQ:
                return True
            if pred.name == IN:
                return _anchor_ok(args[2], anchors)
            return bool(args) and _anchor_ok(args[-1], anchors)
        case Top() | Bot():
            return True
        case And(l, r) | Or(l, r):
            return protected_restriction(l, anchors) and protected_restriction(r, anchors)
        case Exists(xs, inner, Top()):
            return protected_restriction(inner, anchors | frozenset(xs))
        case _:
            return False


def protected_formula(f: SubFormula, anchors: frozenset) -> bool:
    match f:
        case Atom(pred, args):
            if pred.name in (NEQ, NOTIN_SET):
                return True
            if pred.name == IN:
                return _anchor_ok(args[2], anchors)
            return bool(args) and _anchor_ok(args[-1], anchors)
        case Top() | Bot():
            return True
        case And(l, r) | Or(l, r):
            return protected_formula(l, anchors) and protected_formula(r, anchors)
        case Forall(xs, guard, body) | Exists(xs, guard, body):
            from residua.formulas import and_parts

            parts = and_parts(guard)
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
                        and _anchor_ok(part.args[2], frozenset(inner))
                    ):
                        inner.add(part.args[0].name)
                        changed = True
            frozen = frozenset(inner)
            if all(protected_restriction(p, frozen) for p in parts):
                return protected_formula(body, frozen)
            return False
    return False


def _anchor_ok(t: Term, anchors: frozenset) -> bool:
    if isinstance(t, Var):
        return t.name in anchors
    return isinstance(t, Time) and not t.is_infinite


def small_domain(structure: PartialStructure, f: SubFormula) -> list[Term]:
    extra = []
    for atom in _formula_ground_terms(f):
        extra.append(atom)
    return herbrand_terms(structure, extra=extra)


def _formula_ground_terms(f: SubFormula):
    from residua.formulas import atoms_syntactic
    from residua.terms import App, is_ground

    for atom in atoms_syntactic(f):
        if atom.pred.name == NOTIN_SET:
            continue
        for arg in atom.args:
            if isinstance(arg, (Const, Time)) and is_ground(arg):
                yield arg
            elif isinstance(arg, App) and is_ground(arg):
                yield arg
