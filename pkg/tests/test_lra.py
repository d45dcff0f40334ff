import itertools
from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from symbound.lra import (Conj, Disj, LinearAtom, LinearSystem, Solver, check_sat, entailment_certificate,
                          entails, houdini_filter, verify_certificate)
from symbound.numeric import DeltaRational


def A(coeffs, const=0, rel=">="):
    return LinearAtom(coeffs, const, rel)


def test_simple_unsat():
    res = check_sat([A({"x": 1}, -1), A({"x": -1})])
    assert not res.sat
    assert verify_certificate([A({"x": 1}, -1), A({"x": -1})], res.certificate)


def test_strict_gives_delta_model():
    res = check_sat([A({"x": 1}, 0, ">")])
    assert res.sat
    assert res.model["x"] == DeltaRational(0, 1)
    assert res.concrete_model()["x"] > 0


def test_disjunctive_entailment():
    # e >= 0 and (e < 0 or u1 >= 0) entails u1 >= 0
    sys = LinearSystem([A({"e": 1}), Disj((A({"e": 1}, 0, "<"), A({"u1": 1})))])
    assert entails(sys, A({"u1": 1}))
    assert not entails(sys, A({"u1": 1}, -1))


def test_empty_system_entails_tautology():
    assert entails([], A({}, 1))


def test_piecewise_lower_bound_entailment():
    # x >= 0 and (x<=1 => y>=x) and (1<=x<=2 => y>=2-x) and (x>=2 => y>=x/2-1) entails y >= 0
    x_le_1 = A({"x": -1}, 1)
    pieces = [
        Disj((A({"x": -1}, 1, "<"), A({"y": 1, "x": -1}))),
        Disj((A({"x": 1}, -1, "<"), A({"x": -1}, 2, "<"), A({"y": 1, "x": 1}, -2))),
        Disj((A({"x": 1}, -2, "<"), A({"y": 1, "x": Fraction(-1, 2)}, 1))),
    ]
    sys = [A({"x": 1})] + pieces
    assert entails(sys, A({"y": 1}))
    assert not entails(sys, A({"y": 1}, -1, ">"))
    assert x_le_1.holds_rational({"x": 1})


def test_houdini_small():
    sys = [A({"e": 1}), A({"b": 1})]
    cands = [A({"e": 1}), A({"e": 1}, 0, "<"), A({"b": 1})]
    assert houdini_filter(sys, cands) == [cands[0], cands[2]]
    assert houdini_filter(sys, []) == []


def test_houdini_matches_individual_entailment():
    sys = [A({"x": 1, "y": -1}), A({"y": 1}, -2), A({"z": 1, "x": -2})]
    cands = [A({"x": 1}, -2), A({"z": 1}, -4), A({"z": 1}, -5), A({"x": -1}), A({"z": 1, "y": -2})]
    got = houdini_filter(sys, cands)
    assert got == [c for c in cands if entails(sys, c)]


def test_push_pop():
    s = Solver([A({"x": 1})])
    s.push()
    s.add(A({"x": -1}, -1))
    assert not s.check().sat
    s.pop()
    assert s.check().sat


def test_entailment_certificate():
    atoms = [A({"x": 1}, -1), A({"y": 1, "x": -1})]
    cert = entailment_certificate(atoms, A({"y": 1}, -1))
    assert cert is not None and cert["goal"] > 0
    assert entailment_certificate(atoms, A({"y": 1}, -2)) is None


def test_conj_items():
    assert not check_sat([Conj((A({"x": 1}, -1), A({"x": -1})))]).sat


# brute-force oracle: a bounded polyhedron is nonempty iff one of its
# basic solutions (three tight constraints) satisfies every constraint
DIMS = ("x", "y", "z")
BOX = [A({d: s}, 10) for d in DIMS for s in (1, -1)]


def vertex_feasible(atoms):
    for trio in itertools.combinations(atoms, 3):
        M = sympy.Matrix([[a.coeffs.get(d, 0) for d in DIMS] for a in trio])
        if M.det() == 0:
            continue
        rhs = sympy.Matrix([-a.constant for a in trio])
        sol = M.LUsolve(rhs)
        point = {d: Fraction(int(v.p), int(v.q)) for d, v in zip(DIMS, sol)}
        if all(a.holds_rational(point) for a in atoms):
            return True
    return False


row = st.tuples(st.tuples(*(st.integers(-4, 4) for _ in DIMS)), st.integers(-6, 6))


@settings(max_examples=60, deadline=None)
@given(st.lists(row, min_size=1, max_size=5))
def test_random_systems_against_vertex_enumeration(rows):
    atoms = [A(dict(zip(DIMS, c)), k) for c, k in rows] + BOX
    res = check_sat(atoms)
    assert res.sat == vertex_feasible(atoms)
    if res.sat:
        assert all(a.holds(res.model) for a in atoms)
        assert all(a.holds_rational(res.concrete_model()) for a in atoms)
    else:
        assert verify_certificate(atoms, res.certificate)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(row, st.booleans()), min_size=1, max_size=6))
def test_random_strict_systems_are_certified(rows):
    atoms = [A(dict(zip(DIMS, c)), k, ">" if s else ">=") for (c, k), s in rows]
    res = check_sat(atoms)
    if res.sat:
        assert all(a.holds_rational(res.concrete_model()) for a in atoms)
    else:
        assert verify_certificate(atoms, res.certificate)
