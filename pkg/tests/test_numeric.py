from fractions import Fraction

import pytest

from symbound.numeric import DeltaRational, delta_cmp, format_rational, parse_rational, rat_arith


def test_add():
    assert rat_arith("add", Fraction(1, 2), Fraction(1, 3)) == Fraction(5, 6)


def test_mul_normalizes():
    r = rat_arith("mul", Fraction(2, 4), Fraction(2, 1))
    assert r == 1 and r.denominator == 1


def test_cmp_negative_fractions():
    # -3/7 < -2/5 since -15 < -14
    assert rat_arith("cmp", Fraction(-3, 7), Fraction(-2, 5)) < 0


def test_div_by_zero():
    with pytest.raises(ZeroDivisionError):
        rat_arith("div", 1, 0)


def test_delta_ordering():
    assert delta_cmp(DeltaRational(0, 1), DeltaRational(0, 0)) > 0
    assert delta_cmp(DeltaRational(1, -5), DeltaRational(1, 3)) < 0
    assert delta_cmp(DeltaRational(2, 0), DeltaRational(1, 100)) > 0
    assert DeltaRational(3, 2) == DeltaRational(3, 2)


def test_delta_arith_and_concretize():
    x = DeltaRational(1, 2) + DeltaRational(Fraction(1, 2), -1)
    assert x == DeltaRational(Fraction(3, 2), 1)
    assert x.concretize(Fraction(1, 10)) == Fraction(16, 10)
    assert (-x).scale(2) == DeltaRational(-3, -2)


def test_parse_and_format():
    assert parse_rational("-6/4") == Fraction(-3, 2)
    assert parse_rational("0.25") == Fraction(1, 4)
    assert format_rational(Fraction(-3, 2)) == "-3/2"
    assert format_rational(Fraction(4)) == "4"
