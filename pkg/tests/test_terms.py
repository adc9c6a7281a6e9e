import pytest

from residua.terms import (
    App,
    Const,
    INFTY,
    Substitution,
    Time,
    TimeOffset,
    Var,
    is_ground,
    set_term,
    subst_term,
    term_sort_key,
    term_vars,
    time_offset,
    tuple_term,
    unify_ground,
)


def test_time_ordering_and_infinity():
    keys = [term_sort_key(Time(3)), term_sort_key(Time(7)), term_sort_key(INFTY)]
    assert keys == sorted(keys)
    assert INFTY.is_infinite
    assert not Time(0).is_infinite


def test_time_rejects_negatives_and_floats():
    with pytest.raises(ValueError):
        Time(-1)
    with pytest.raises(ValueError):
        Time(2.5)


def test_offset_normalizes_over_ground_times():
    assert time_offset(Time(3), 30) == Time(33)
    assert time_offset(INFTY, 30) == INFTY
    assert time_offset(Var("t"), 0) == Var("t")
    assert time_offset(Var("t"), 5) == TimeOffset(Var("t"), 5)
    with pytest.raises(ValueError):
        time_offset(Const("a"), 1)
    with pytest.raises(ValueError):
        time_offset(Var("t"), -2)


def test_groundness():
    assert is_ground(App("doc", (Const("C"),)))
    assert not is_ground(App("doc", (Var("q"),)))
    assert not is_ground(TimeOffset(Var("t"), 3))
    assert term_vars(App("f", (Var("x"), TimeOffset(Var("t"), 1)))) == {"x", "t"}


def test_tuple_term_collapses_singletons():
    assert tuple_term([Const("a")]) == Const("a")
    pair = tuple_term([Const("a"), Time(3)])
    assert isinstance(pair, App)
    assert str(pair) == "(a, 3)"


def test_set_term_dedups_and_orders():
    s = set_term([Const("b"), Const("a"), Const("b"), Time(9)])
    assert [str(m) for m in s.args] == ["9", "a", "b"]
    with pytest.raises(ValueError):
        set_term([Var("x")])


def test_substitution_requires_ground_range():
    with pytest.raises(ValueError):
        Substitution({"x": Var("y")})


def test_substitution_extension_order():
    small = Substitution({"x": Const("a")})
    big = Substitution({"x": Const("a"), "y": Time(3)})
    other = Substitution({"x": Const("b")})
    assert big.extends(small)
    assert not small.extends(big)
    assert not other.extends(small)
    assert big.extends(Substitution.empty())


def test_substitution_plus_requires_disjoint_domains():
    a = Substitution({"x": Const("a")})
    b = Substitution({"y": Const("b")})
    assert a.plus(b).domain() == {"x", "y"}
    with pytest.raises(ValueError):
        a.plus(Substitution({"x": Const("c")}))


def test_subst_term_normalizes_offsets():
    t = TimeOffset(Var("tau"), 30)
    assert subst_term(t, Substitution({"tau": Time(3)})) == Time(33)
    assert subst_term(t, Substitution({"tau": INFTY})) == INFTY
    assert subst_term(t, Substitution({"other": Time(1)})) == t


def test_unify_ground_binds_consistently():
    binding = {}
    pattern = App("f", (Var("x"), Var("x")))
    assert unify_ground(pattern, App("f", (Const("a"), Const("a"))), binding)
    assert binding == {"x": Const("a")}
    assert not unify_ground(pattern, App("f", (Const("a"), Const("b"))), {})


def test_unify_ground_inverts_offsets():
    binding = {}
    assert unify_ground(TimeOffset(Var("t"), 30), Time(33), binding)
    assert binding == {"t": Time(3)}
    assert not unify_ground(TimeOffset(Var("t"), 30), Time(7), {})
    binding = {}
    assert unify_ground(TimeOffset(Var("t"), 5), INFTY, binding)
    assert binding == {"t": INFTY}
