from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from symbound.lra import LinearAtom, check_sat, entails
from symbound.polyhedron import (ONE, LinearBound, PolyhedralCone, Polyhedron, cone_membership,
                                 find_implied_equalities, full_project_fm, local_project,
                                 local_project_seq, lp_reduce, normalize_atom, poly_reduce)


def A(coeffs, const=0, rel=">="):
    return LinearAtom(coeffs, const, rel)


def same(P, Q):
    """Mutual entailment of two constraint lists."""
    return all(entails(list(P), c) for c in Q) and all(entails(list(Q), c) for c in P)


def test_normalize_atom():
    a = normalize_atom({"x": Fraction(1, 2), "y": Fraction(-3, 4)}, Fraction(1, 4), ">=")
    assert a.coeffs == {"x": 2, "y": -3} and a.constant == 1
    e = normalize_atom({"x": -2, "y": 4}, 0, "=")
    assert e.coeffs == {"x": 1, "y": -2}


def test_local_project_matches_fm_example():
    P = [A({"x": 1}, -1), A({"y": 1, "x": -1})]
    got = local_project(P, {"x": 1, "y": 2}, "x")
    assert same(got, [A({"y": 1}, -1)])
    assert same(got, full_project_fm(P, ["x"]))


def test_local_project_equality_substitution():
    P = [A({"x": 1, "e": -1}, 0, "="), A({"x": 1, "y": -1}), A({"e": 1})]
    for m in ({"x": 0, "e": 0, "y": 0}, {"x": 3, "e": 3, "y": 1}):
        got = local_project(P, m, "x")
        assert same(got, [A({"e": 1, "y": -1}), A({"e": 1})])


def test_local_project_without_lower_bound():
    P = [A({"y": 1}), A({"y": 1, "x": -1})]
    assert same(local_project(P, {"x": -3, "y": 1}, "x"), [A({"y": 1})])


def test_local_project_rejects_non_model():
    with pytest.raises(ValueError):
        local_project([A({"x": 1})], {"x": -1}, "x")


def test_project_sequence_edge_cases():
    P = [A({"x": 1}, -1), A({"y": 1, "x": -1}), A({"y": -1}, 4)]
    m = {"x": 2, "y": 3}
    assert same(local_project_seq(P, m, []), P)
    rest = local_project_seq(P, m, ["x", "y"])
    assert all(not c.coeffs for c in rest)
    assert check_sat(list(rest)).sat


def test_projection_order_matters_but_both_sound():
    # a triangle-like polytope in (x, y, z)
    P = [A({"x": 1}), A({"y": 1}), A({"z": 1}), A({"x": -1, "y": -1, "z": -1}, 4),
         A({"x": 1, "y": -2, "z": 1}, 1)]
    m = {"x": 1, "y": 1, "z": 1}
    for dims in (["y", "z"], ["z", "y"]):
        lp = local_project_seq(P, m, dims)
        fm = full_project_fm(P, dims)
        assert all(entails(list(lp), c) for c in fm)
        assert Polyhedron(list(lp)).holds({"x": 1})


def test_fm_examples():
    assert same(full_project_fm([A({"x": 1}), A({"y": 1, "x": -1})], ["x"]), [A({"y": 1})])
    got = full_project_fm([A({"x": 1, "a": -1}), A({"b": 1, "x": -1})], ["x"])
    assert same(got, [A({"b": 1, "a": -1})])


def test_poly_reduce_eliminates_chain():
    P = [A({"d3": 1, "d1": -1}), A({"d4": 1, "d5": 1, "d3": -1, "d7": 1}),
         A({"d2": 1, "d4": -1, "d5": -1}, 1)]
    order = ["d1", "d2", "d3", "d4", "d5", "d6", "d7"]
    bounds = poly_reduce(P, ({"d1": 1, "d2": -1}, 0), order)
    assert bounds == [LinearBound.make({"d7": 1}, 1)]


def test_poly_reduce_constant_target():
    assert poly_reduce([A({"x": 1})], ({}, 7), ["x"]) == [LinearBound.make({}, 7)]


def test_poly_reduce_unsat_and_missing_dim():
    with pytest.raises(ValueError):
        poly_reduce([A({"x": 1}, -1), A({"x": -1})], ({"x": 1}, 0), ["x"])
    with pytest.raises(ValueError):
        poly_reduce([A({"x": 1})], ({"y": 1}, 0), ["x"])


def test_lp_reduce_examples():
    b, lam = lp_reduce(PolyhedralCone([({"x": 1}, False, 1)]), ({"x": 1}, 0), ["x"])
    assert b.as_dict() == {"x": 1}
    b, lam = lp_reduce(PolyhedralCone([({"y": 1, "x": -1}, False, 1)]), ({"x": 1}, 0), ["x", "y"])
    assert b == LinearBound.make({"y": 1}, 0)
    assert lam[1] == 1


def test_cone_membership():
    Q = PolyhedralCone([({"x": 1}, False, 1), ({"y": 1, "x": -1}, False, 1)])
    assert cone_membership(Q, {"x": 1}) == [0, 1, 0]
    assert cone_membership(Q, {ONE: 1}) == [1, 0, 0]
    assert cone_membership(Q, {"y": 1, ONE: 2}) == [2, 1, 1]
    assert cone_membership(Q, {"x": -1}) is None


def test_implied_equalities():
    one = ({ONE: 1}, False, 0)
    x, nx = ({"x": 1}, False, 1), ({"x": -1}, False, 1)
    assert find_implied_equalities(PolyhedralCone([x, nx, one])) == [0, 1]
    assert find_implied_equalities(PolyhedralCone([x, ({"y": 1}, False, 1), one])) == []
    Q = PolyhedralCone([({"x": 1, "y": -1}, False, 1), ({"x": -1, "y": 1}, False, 1), x, one])
    assert find_implied_equalities(Q) == [0, 1]


# ---------------------------------------------------------- oracle checks

DIMS = ["d0", "d1", "d2", "d3", "d4"]
coef = st.fractions(min_value=-5, max_value=5, max_denominator=3)
constraint = st.tuples(
    st.dictionaries(st.sampled_from(DIMS), coef, min_size=1, max_size=3),
    coef,
    st.sampled_from([">=", ">=", ">=", ">", "="]),
)
polyhedron = st.lists(constraint, min_size=1, max_size=8)
term = st.dictionaries(st.sampled_from(DIMS), coef.filter(bool), min_size=1, max_size=3)


def fm_best_rank(atoms, t, order):
    """Leading rank of the best upper bound on t, by exact projection."""
    rank = {d: i for i, d in enumerate(order)}
    T = "T"
    PT = atoms + [LinearAtom({**t, T: -1}, 0, "=")]
    for k in range(len(order), -1, -1):
        Q = full_project_fm(PT, order[:k])
        ranks = []
        for c in Q:
            a = c.coeffs.get(T)
            if a and (a < 0 or c.rel == "="):
                rest = [rank[d] for d in c.coeffs if d != T]
                ranks.append(min(rest) if rest else len(order))
        if ranks:
            return max(ranks)
    raise AssertionError("T = t is always an upper bound")


def lead_rank(b, order):
    d = b.leading({x: i for i, x in enumerate(order)})
    return len(order) if d is None else order.index(d)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(polyhedron, term, st.permutations(DIMS))
def test_poly_reduce_against_fourier_motzkin(rows, t, order):
    atoms = [LinearAtom(c, k, rel) for c, k, rel in rows]
    assume(check_sat(atoms).sat)
    bounds = poly_reduce(atoms, (t, 0), order)
    assert bounds
    assert {lead_rank(b, order) for b in bounds} == {fm_best_rank(atoms, t, order)}
    for b in bounds:
        # t <= b, i.e. b - t >= 0 (strictly when flagged)
        diff = {d: b.as_dict().get(d, 0) - t.get(d, 0) for d in set(t) | set(b.as_dict())}
        assert entails(atoms, LinearAtom(diff, b.constant, ">" if b.strict else ">="))


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(polyhedron, st.permutations(DIMS), st.integers(1, 5))
def test_local_projection_entails_fm_projection(rows, order, k):
    atoms = [LinearAtom(c, kk, rel) for c, kk, rel in rows]
    res = check_sat(atoms, interior=True)
    assume(res.sat)
    m = res.concrete_model()
    m.update({d: Fraction(0) for d in DIMS if d not in m})
    dims = order[:k]
    local = list(local_project_seq(atoms, m, dims))
    assert Polyhedron(local).holds(m)
    assert all(not (set(c.coeffs) & set(dims)) for c in local)
    # an under-approximation: every local point lies in the exact projection
    for c in full_project_fm(atoms, dims):
        assert entails(local, c)
