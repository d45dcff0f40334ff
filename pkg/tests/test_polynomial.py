from fractions import Fraction

import pytest

from symbound.polynomial import (MonomialOrder, Poly, compare_monomials, effective_degree,
                                 leading_monomial, map_levels, mono, parse_poly)

x, y, t = Poly.var("x"), Poly.var("y"), Poly.var("t")


def test_ideal_example_combination():
    p = (x - 1 + t) * (x - 1 - t) + (y - 1 - t ** 2).scale(-1)
    assert p == parse_poly("x^2 - 2*x - y + 2")


def test_identities():
    p = x * y - 3
    assert p + Poly() == p
    assert (p * Poly()).is_zero()
    assert p - p == Poly()


def test_exact_coefficients():
    p = x.scale(Fraction(1, 3)) + x.scale(Fraction(2, 3))
    assert p == x


def test_grevlex_breaks_ties_on_last_variable():
    o = MonomialOrder("grevlex", ["x", "y"])
    assert compare_monomials(o, mono(("x", 2), ("y", 1)), mono(("x", 1), ("y", 2))) > 0


@pytest.mark.parametrize("kind", ["lex", "deglex", "grevlex"])
def test_one_is_minimal(kind):
    o = MonomialOrder(kind, ["x", "y"])
    assert compare_monomials(o, mono(("y", 1)), ()) > 0


def test_lex_ignores_degree():
    o = MonomialOrder("lex", ["x", "y"])
    assert compare_monomials(o, mono(("x", 1)), mono(("y", 5))) > 0


def test_leading_monomial():
    o = MonomialOrder("grevlex", ["x", "y"])
    assert leading_monomial(parse_poly("x^2 - 2*x - y + 2"), o) == (mono(("x", 2)), 1)
    assert leading_monomial(Poly.const(3), o) == ((), 3)


# the foreign-function map of the share-conversion benchmark before map reduction
ELASTIC_TM = {
    "u1": ("inv", parse_poly("e")),
    "u2": ("inv", parse_poly("e'")),
    "u3": ("inv", parse_poly("e")),
    "u4": ("floor", parse_poly("v*b*u1")),
    "u5": ("floor", parse_poly("v*b'*u2")),
    "u6": ("floor", parse_poly("a*b*u3")),
}
KEEP = {"a", "b", "e", "v"}


def test_effective_degree_values():
    assert effective_degree(ELASTIC_TM, KEEP, ()) == (0, 0)
    assert effective_degree(ELASTIC_TM, KEEP, mono(("u1", 1))) == (0, 1)
    # u4 = floor(v*b/e): three keep variables
    assert effective_degree(ELASTIC_TM, KEEP, mono(("u4", 1))) == (0, 3)
    # u5 = floor(v*b'/e'): b' and e' are not kept
    assert effective_degree(ELASTIC_TM, KEEP, mono(("u5", 1))) == (2, 1)


def test_effective_degree_leading_monomial():
    o = MonomialOrder("effective_degree", list(ELASTIC_TM) + ["a", "b", "e", "v", "b'", "e'"],
                      tm=ELASTIC_TM, keep=KEEP)
    lm, _ = leading_monomial(Poly.var("u4") - Poly.var("u5"), o)
    assert lm == mono(("u5", 1))
    assert o.effdeg(()) == (0, 0)


def test_effective_degree_prefers_keep_variables():
    o = MonomialOrder("effective_degree", ["x", "a"], keep={"a"})
    # one non-kept variable outweighs any power of kept ones
    assert compare_monomials(o, mono(("x", 1)), mono(("a", 7))) > 0


def test_map_levels():
    assert map_levels(ELASTIC_TM) == {"u1": 1, "u2": 1, "u3": 1, "u4": 2, "u5": 2, "u6": 2}


def test_cyclic_map_rejected():
    with pytest.raises(ValueError):
        map_levels({"u": ("floor", Poly.var("w")), "w": ("floor", Poly.var("u"))})


def test_evaluate_substitute_primitive():
    p = parse_poly("2*x*y + 4*y")
    assert p.evaluate({"x": 1, "y": Fraction(1, 2)}) == 3
    assert p.substitute({"x": Poly.var("y")}) == parse_poly("2*y^2 + 4*y")
    assert p.primitive() == parse_poly("x*y + 2*y")
    assert (-p).primitive() == parse_poly("-x*y - 2*y")


def test_unknown_variable_in_order():
    o = MonomialOrder("grevlex", ["x"])
    with pytest.raises(ValueError):
        o.key(mono(("z", 1)))
