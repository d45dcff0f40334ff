"""Cones of polynomials: an ideal (equalities) plus non-negative generators.

A cone ``<p_1..p_r> + [q_1..q_s, 1]`` denotes every polynomial of the form
``sum(h_i p_i) + sum(l_j q_j) + l_0`` with ``l_j >= 0``; each element is
non-negative wherever the assumptions hold.  :func:`cred` finds an upper
bound of a polynomial inside the cone whose leading monomial is as small as
possible and returns it with a :class:`BoundWitness` that can be checked by
exact polynomial arithmetic alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .groebner import GroebnerBasis
from .lra import LinearAtom, entailment_certificate, entails
from .numeric import format_rational
from .polynomial import Monomial, MonomialOrder, Poly
from .polyhedron import ONE, PolyhedralCone, ReduceStats, lp_reduce, poly_reduce

_ZERO = Fraction(0)


class InconsistentCone(Exception):
    """The cone contains -1: the assumptions have no model."""


@dataclass
class Generator:
    poly: Poly
    strict: bool = False
    depth: int = 1


class PolynomialCone:
    """Ideal plus inequality generators under a monomial order.

    The constant generator 1 is implicit.  Use :func:`make_reduced` to bring
    the generators into normal form with respect to the ideal.
    """

    def __init__(self, ideal: GroebnerBasis, generators: Sequence[Generator], order: MonomialOrder):
        self.ideal = ideal
        self.generators = list(generators)
        self.order = order

    @property
    def equalities(self) -> List[Poly]:
        return list(self.ideal.elements)

    def monomials(self, extra: Sequence[Poly] = ()) -> List[Monomial]:
        """Non-constant monomials of the generators (and ``extra``), greatest first."""
        seen = set()
        for g in self.generators:
            seen.update(m for m in g.poly.terms if m)
        for p in extra:
            seen.update(m for m in p.terms if m)
        return sorted(seen, key=self.order.key, reverse=True)

    def linear_atoms(self) -> List[LinearAtom]:
        return [linearize(g.poly, ">" if g.strict else ">=") for g in self.generators]

    def is_reduced(self) -> bool:
        for g in self.generators:
            for m in g.poly.terms:
                if self.ideal.is_reducible(m):
                    return False
        return True

    def implies_nonneg(self, p: Poly) -> bool:
        """Sufficient check that ``p >= 0`` follows from the cone."""
        r = self.ideal.reduce(p)
        if r.is_constant():
            return r.constant_term() >= 0
        return entails(self.linear_atoms(), linearize(r, ">="))

    def __repr__(self):
        eqs = ", ".join(p.to_str(self.order) for p in self.ideal)
        ins = ", ".join(g.poly.to_str(self.order) for g in self.generators)
        return f"PolynomialCone(<{eqs}> + [{ins}, 1])"


def linearize(p: Poly, rel: str) -> LinearAtom:
    """Treat each non-constant monomial of ``p`` as its own dimension."""
    return LinearAtom({m: c for m, c in p.terms.items() if m}, p.constant_term(), rel)


def delinearize(coeffs: Dict[Monomial, Fraction], constant) -> Poly:
    terms = {m: Fraction(c) for m, c in coeffs.items() if c}
    if constant:
        terms[()] = terms.get((), _ZERO) + Fraction(constant)
    return Poly(terms)


def make_reduced(C: PolynomialCone) -> PolynomialCone:
    """Equivalent cone whose generators are in normal form modulo the ideal."""
    gb = GroebnerBasis(C.ideal.elements, C.order)
    out: List[Generator] = []
    seen = set()
    for g in C.generators:
        r = gb.reduce(g.poly)
        if r.is_constant():
            c = r.constant_term()
            if c < 0 or (c == 0 and g.strict):
                raise InconsistentCone(f"generator reduces to {format_rational(c)}")
            continue
        r = r.primitive()
        key = (r, g.strict)
        if key in seen:
            continue
        seen.add(key)
        out.append(Generator(r, g.strict, g.depth))
    return PolynomialCone(gb, out, C.order)


@dataclass
class BoundWitness:
    """Certificate for ``target <= bound`` (or ``>=`` for lower bounds).

    The identity checked is ``lhs == sum(h * p) + sum(l * q) + constant``
    where ``lhs`` is ``bound - target`` for upper bounds and
    ``target - bound`` for lower bounds.
    """
    target: Poly
    bound: Poly
    direction: str
    ideal_cofactors: List[Tuple[Poly, Poly]] = field(default_factory=list)
    cone_multipliers: List[Tuple[Fraction, int]] = field(default_factory=list)
    constant: Fraction = _ZERO
    generators: List[Poly] = field(default_factory=list)

    def lhs(self) -> Poly:
        if self.direction == "upper":
            return self.bound - self.target
        return self.target - self.bound

    def rhs(self) -> Poly:
        total = Poly.const(self.constant)
        for h, p in self.ideal_cofactors:
            total = total + h * p
        for lam, j in self.cone_multipliers:
            total = total + self.generators[j].scale(lam)
        return total

    def verify(self) -> bool:
        if self.constant < 0 or any(lam < 0 for lam, _ in self.cone_multipliers):
            return False
        return self.lhs() == self.rhs()

    def to_text(self, order: Optional[MonomialOrder] = None) -> str:
        def s(p):
            return p.to_str(order)
        parts = [f"({s(h)}) * ({s(p)})" for h, p in self.ideal_cofactors]
        parts += [f"{format_rational(lam)} * ({s(self.generators[j])})" for lam, j in self.cone_multipliers]
        parts.append(format_rational(self.constant))
        head = (f"{s(self.bound)} - ({s(self.target)})" if self.direction == "upper"
                else f"{s(self.target)} - ({s(self.bound)})")
        return head + " = " + " + ".join(parts)


@dataclass
class ConeBound:
    bound: Poly
    strict: bool
    witness: BoundWitness


def _upper_bounds(C: PolynomialCone, t: Poly, stats: Optional[ReduceStats], engine: str = "local"
                  ) -> List[Tuple[Poly, bool, List[Tuple[Poly, Poly]], List[Tuple[Fraction, int]], Fraction]]:
    quotients, r = C.ideal.divide(t)
    # t = sum(q p) + r, so r - t = sum(-q p)
    cofactors = [(-q, p) for q, p in zip(quotients, C.ideal.elements) if not q.is_zero()]
    if r.is_constant():
        return [(r, False, cofactors, [], _ZERO)]
    dims = C.monomials([r])
    if engine == "lp":
        return [_lp_upper_bound(C, r, dims, cofactors)]
    atoms = C.linear_atoms()
    bounds = poly_reduce(atoms, ({m: c for m, c in r.terms.items() if m}, r.constant_term()),
                         dims, stats)
    out = []
    for b in bounds:
        bp = delinearize(b.as_dict(), b.constant)
        goal = linearize(bp - r, ">" if b.strict else ">=")
        cert = entailment_certificate(atoms, goal)
        if cert is None:
            raise ArithmeticError("bound lost its certificate")
        mu = cert.pop("goal")
        if not mu:
            raise InconsistentCone("the generators alone are contradictory")
        # sum(cert_i q_i) + mu (r - b) = K <= 0  so  b - r = sum(cert_i/mu q_i) - K/mu
        K = _ZERO
        for i, c in cert.items():
            a = atoms[i]
            K += c * a.constant
        K += mu * (r.constant_term() - bp.constant_term())
        mults = [(c / mu, i) for i, c in sorted(cert.items()) if c]
        out.append((bp, b.strict, cofactors, mults, -K / mu))
    return out


def _lp_upper_bound(C: PolynomialCone, r: Poly, dims, cofactors):
    vectors = []
    for g in C.generators:
        v = dict(g.poly.terms)
        if () in v:
            v[ONE] = v.pop(())
        vectors.append((v, g.strict, g.depth))
    Q = PolyhedralCone([({ONE: Fraction(1)}, False, 0)] + vectors)
    b, lam = lp_reduce(Q, ({m: c for m, c in r.terms.items() if m}, r.constant_term()), dims)
    bp = delinearize(b.as_dict(), b.constant)
    # b - r = lam_0 + sum(lam_i q_i)
    mults = [(l, i - 1) for i, l in enumerate(lam) if i and l]
    return (bp, b.strict, cofactors, mults, lam[0])


def cred(C: PolynomialCone, t: Poly, direction: str = "upper",
         stats: Optional[ReduceStats] = None, engine: str = "local") -> List[ConeBound]:
    """Bounds on ``t`` implied by the cone with minimal leading monomial.

    Returns every optimal bound found (there may be several incomparable
    ones); each carries a verified witness.
    """
    if direction not in ("upper", "lower"):
        raise ValueError("direction is 'upper' or 'lower'")
    if engine not in ("local", "lp"):
        raise ValueError("engine is 'local' or 'lp'")
    target = t if direction == "upper" else -t
    gens = [g.poly for g in C.generators]
    out = []
    for bp, strict, cof, mults, const in _upper_bounds(C, target, stats, engine):
        if direction == "upper":
            bound = bp
        else:
            bound = -bp
        w = BoundWitness(t, bound, direction, cof, mults, const, gens)
        if not w.verify():
            raise ArithmeticError("witness identity failed")
        out.append(ConeBound(bound, strict, w))
    return out
