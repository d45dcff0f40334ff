import pytest

from symbound.cone import Generator, PolynomialCone
from symbound.groebner import GroebnerBasis
from symbound.polynomial import MonomialOrder, Poly, parse_poly
from symbound.saturation import (AXIOM_TEMPLATES, PAnd, PAtom, POr, SaturationConfig, build_order,
                                 closure, find_consequences, instantiate_axioms, purify,
                                 reduce_term_map, register_axioms, saturate, take_products)
from symbound.syntax import parse_formula, parse_term

P = parse_poly

ELASTIC = ("x = floor(v*b/e) and y = floor(v*b'/e') and a2 = floor(a*b/e) "
           "and e' = e + a and b' = b + a2 and a >= 0 and b >= 0 and e >= 0 and v >= 0")


def test_purify_elastic_map():
    _, tm, _ = purify(parse_formula(ELASTIC))
    assert tm == {
        "u1": ("inv", P("e")), "u2": ("inv", P("e'")), "u3": ("inv", P("e")),
        "u4": ("floor", P("v*b*u1")), "u5": ("floor", P("v*b'*u2")), "u6": ("floor", P("a*b*u3")),
    }


def test_purify_function_free():
    f, tm, obj = purify(parse_formula("x >= 1 and y = x*x"), parse_term("x + y"))
    assert tm == {}
    assert f == PAnd((PAtom(P("x - 1"), ">="), PAtom(P("y - x^2"), "=")))
    assert obj == P("x + y")


def test_purify_nested_floors_inner_first():
    _, tm, obj = purify(parse_formula("b >= 0"), parse_term("floor(floor(a*b/sf)*sf/b)"))
    floors = [u for u, (fn, _) in tm.items() if fn == "floor"]
    assert len(floors) == 2
    inner, outer = floors
    assert int(inner[1:]) < int(outer[1:])
    assert inner in tm[outer][1].variables()
    assert obj == Poly.var(outer)


def test_purify_skips_taken_names():
    _, tm, _ = purify(parse_formula("u1 = floor(x)"), avoid={"u1", "x"})
    assert list(tm) == ["u2"]


def test_floor_axioms():
    tm = {"u4": ("floor", P("v*b*u1"))}
    got = set(instantiate_axioms(tm))
    assert got == {
        PAtom(P("u4 - v*b*u1 + 1"), ">="),
        PAtom(P("v*b*u1 - u4"), ">="),
        POr((PAtom(P("-v*b*u1"), ">"), PAtom(P("u4"), ">="))),
    }


def test_inverse_axioms():
    got = set(instantiate_axioms({"u1": ("inv", P("e"))}))
    assert got == {PAtom(P("u1*e - 1"), "="), POr((PAtom(P("-e"), ">"), PAtom(P("u1"), ">=")))}
    assert instantiate_axioms({}) == []


def test_register_axioms():
    saved = dict(AXIOM_TEMPLATES)
    try:
        register_axioms("ceil", ["u >= p", "u - 1 < p"])
        got = instantiate_axioms({"w": ("ceil", P("x"))})
        assert PAtom(P("w - x"), ">=") in got
        f = parse_formula("y = ceil(x)")
        _, tm, _ = purify(f)
        assert list(tm.values()) == [("ceil", P("x"))]
    finally:
        AXIOM_TEMPLATES.clear()
        AXIOM_TEMPLATES.update(saved)
        from symbound import syntax
        syntax.FUNCTIONS.pop("ceil", None)


def _order(tm, plain=("x", "y", "e", "a")):
    return build_order("effective_degree", tm, list(plain), keep=plain)


def test_closure_same_argument():
    tm = {"u1": ("inv", P("e")), "u3": ("inv", P("e"))}
    gb = closure(GroebnerBasis([], _order(tm)), tm)
    assert gb.contains(P("u3 - u1"))


def test_closure_disjoint_symbols():
    tm = {"u1": ("inv", P("e")), "u2": ("floor", P("e"))}
    gb = closure(GroebnerBasis([], _order(tm)), tm)
    assert len(gb) == 0


def test_closure_modulo_ideal():
    tm = {"u": ("floor", P("x")), "w": ("floor", P("y"))}
    gb = closure(GroebnerBasis([P("x - y")], _order(tm)), tm)
    assert gb.contains(P("u - w"))


def test_reduce_term_map_argument():
    tm = {"u2": ("inv", P("e'"))}
    o = build_order("effective_degree", tm, ["e'", "e", "a"], keep=["e", "a"])
    gb = GroebnerBasis([P("e' - e - a")], o)
    assert reduce_term_map(tm, gb) == {"u2": ("inv", P("e + a"))}
    done = reduce_term_map({"u2": ("inv", P("e + a"))}, gb)
    assert done == {"u2": ("inv", P("e + a"))}


def test_take_products_depth_two():
    existing = [(P("x"), 1), (P("y"), 1), (P("x^2"), 2), (P("x*y"), 2), (P("y^2"), 2)]
    got = take_products([(P("z"), 1)], existing, 2)
    assert sorted(got, key=str) == sorted([(P("z"), 1), (P("z^2"), 2), (P("x*z"), 2), (P("y*z"), 2)], key=str)


def test_take_products_powers_and_depth_one():
    got = take_products([(P("e"), 1)], [], 3)
    assert sorted(got, key=lambda pd: pd[1]) == [(P("e"), 1), (P("e^2"), 2), (P("e^3"), 3)]
    assert take_products([(P("e"), 1), (P("x"), 1)], [], 1) == [(P("e"), 1), (P("x"), 1)]


def test_salience_probe_finds_equality():
    o = MonomialOrder("grevlex", ["x"])
    C = PolynomialCone(GroebnerBasis([], o), [Generator(P("x")), Generator(P("-x"))], o)
    eqs, ineqs = find_consequences(PAnd((PAtom(P("x"), ">="), PAtom(P("-x"), ">="))), C)
    assert any(GroebnerBasis([P("x")], o).contains(e) and not e.is_zero() for e in eqs)


def test_saturate_single_equality():
    res = saturate(parse_formula("x = 1"), SaturationConfig(depth=3))
    assert [g for g in res.cone.ideal] == [P("x - 1")]
    assert res.cone.generators == []
    assert res.stats.rounds == 1


def test_saturate_promotes_two_sided_bound():
    res = saturate(parse_formula("x >= 0 and x <= 0"), SaturationConfig(depth=2))
    assert res.cone.ideal.contains(P("x"))


def test_saturate_elastic_cone(corpus_report):
    res = corpus_report("elastic").saturation
    gb = res.cone.ideal
    assert len(gb) == 8
    assert gb.contains(P("e*u2 + a*u2 - 1"))
    assert gb.contains(P("u3 - u1"))
    assert res.tm["u2"] == ("inv", P("e + a"))
    # u5 = floor(v*b'*u2) with b' = b + u6 rewritten
    assert res.tm["u5"] == ("floor", P("v*b*u2 + v*u6*u2"))
    # consequences found by saturation
    assert res.cone.implies_nonneg(P("u1"))
    assert res.cone.implies_nonneg(P("u4"))


def test_saturation_config_validation():
    with pytest.raises(ValueError):
        SaturationConfig(depth=0)
