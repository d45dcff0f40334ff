"""Multivariate division, Buchberger's algorithm and ideal membership."""

from __future__ import annotations

import heapq
from typing import Iterable, List, Sequence, Tuple

from .polynomial import (Monomial, MonomialOrder, Poly, mono_div, mono_divides,
                         mono_gcd_is_one, mono_lcm)


def _monic(p: Poly, order: MonomialOrder) -> Poly:
    _, c = order.leading(p)
    return p if c == 1 else p.scale(1 / c)


def multivariate_divide(f: Poly, divisors: Sequence[Poly], order: MonomialOrder
                        ) -> Tuple[List[Poly], Poly]:
    """Return ``(quotients, remainder)`` with ``f = sum(q_i d_i) + r``.

    No monomial of ``r`` is divisible by a leading monomial of a divisor.
    """
    if any(d.is_zero() for d in divisors):
        raise ValueError("division by the zero polynomial")
    leads = [order.leading(d) for d in divisors]
    quotients = [dict() for _ in divisors]
    remainder = {}
    p = dict(f.terms)
    key = order.key
    while p:
        m = max(p, key=key)
        c = p[m]
        for i, (lm, lc) in enumerate(leads):
            if mono_divides(lm, m):
                q_m = mono_div(m, lm)
                q_c = c / lc
                quotients[i][q_m] = quotients[i].get(q_m, 0) + q_c
                for dm, dc in divisors[i].terms.items():
                    mm = _mul(q_m, dm)
                    s = p.get(mm, 0) - q_c * dc
                    if s:
                        p[mm] = s
                    else:
                        p.pop(mm, None)
                break
        else:
            remainder[m] = c
            del p[m]
    return [Poly(q) for q in quotients], Poly(remainder)


def _mul(a: Monomial, b: Monomial) -> Monomial:
    from .polynomial import mono_mul
    return mono_mul(a, b)


class GroebnerBasis:
    """A reduced, monic Gröbner basis together with its order."""

    def __init__(self, elements: Sequence[Poly], order: MonomialOrder, _trusted: bool = False):
        self.order = order
        if _trusted:
            self.elements = list(elements)
        else:
            self.elements = buchberger(elements, order).elements
        self._leads = [order.leading(g) for g in self.elements]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def leading_monomials(self) -> List[Monomial]:
        return [lm for lm, _ in self._leads]

    def reduce(self, f: Poly) -> Poly:
        if not self.elements or not f.terms:
            return f
        key = self.order.key
        leads = self._leads
        elements = self.elements
        p = dict(f.terms)
        remainder = {}
        while p:
            m = max(p, key=key)
            c = p[m]
            for i, (lm, _) in enumerate(leads):
                if mono_divides(lm, m):
                    q_m = mono_div(m, lm)
                    for dm, dc in elements[i].terms.items():
                        mm = _mul(q_m, dm)
                        s = p.get(mm, 0) - c * dc
                        if s:
                            p[mm] = s
                        else:
                            p.pop(mm, None)
                    break
            else:
                remainder[m] = c
                del p[m]
        return Poly._wrap(remainder)

    def divide(self, f: Poly) -> Tuple[List[Poly], Poly]:
        if not self.elements:
            return [], f
        return multivariate_divide(f, self.elements, self.order)

    def contains(self, f: Poly) -> bool:
        return self.reduce(f).is_zero()

    def is_reducible(self, m: Monomial) -> bool:
        return any(mono_divides(lm, m) for lm, _ in self._leads)

    def __repr__(self) -> str:
        return "GroebnerBasis([" + ", ".join(g.to_str(self.order) for g in self.elements) + "])"


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    lf, cf = order.leading(f)
    lg, cg = order.leading(g)
    lcm = mono_lcm(lf, lg)
    return f.mul_term(mono_div(lcm, lf), 1 / cf) - g.mul_term(mono_div(lcm, lg), 1 / cg)


def _reduce_by(f: Poly, basis: List[Poly], leads: List[Monomial], order: MonomialOrder) -> Poly:
    if not basis:
        return f
    key = order.key
    p = dict(f.terms)
    remainder = {}
    while p:
        m = max(p, key=key)
        c = p[m]
        for i, lm in enumerate(leads):
            if lm is not None and mono_divides(lm, m):
                g = basis[i]
                q_m = mono_div(m, lm)
                k = c / g.terms[lm]
                for dm, dc in g.terms.items():
                    mm = _mul(q_m, dm)
                    s = p.get(mm, 0) - k * dc
                    if s:
                        p[mm] = s
                    else:
                        p.pop(mm, None)
                break
        else:
            remainder[m] = c
            del p[m]
    return Poly._wrap(remainder)


def buchberger(generators: Iterable[Poly], order: MonomialOrder) -> GroebnerBasis:
    """Reduced Gröbner basis via Buchberger with product and chain criteria.

    Pairs are processed by the normal strategy (smallest lcm first).
    """
    basis: List[Poly] = []
    leads: List[Monomial] = []
    key = order.key
    heap: list = []
    pending = set()
    counter = 0

    def add(p: Poly):
        nonlocal counter
        p = _monic(p, order)
        lm = order.lm(p)
        idx = len(basis)
        basis.append(p)
        leads.append(lm)
        for j in range(idx):
            if leads[j] is None:
                continue
            lcm = mono_lcm(leads[j], lm)
            heapq.heappush(heap, (key(lcm), counter, j, idx))
            counter += 1
            pending.add((j, idx))

    for g in generators:
        if g.is_zero():
            continue
        r = _reduce_by(g, basis, leads, order)
        if not r.is_zero():
            add(r)

    while heap:
        _, _, i, j = heapq.heappop(heap)
        pending.discard((i, j))
        if leads[i] is None or leads[j] is None:
            continue
        li, lj = leads[i], leads[j]
        if mono_gcd_is_one(li, lj):
            continue
        lcm = mono_lcm(li, lj)
        chain = False
        for k in range(len(basis)):
            if k in (i, j) or leads[k] is None:
                continue
            if mono_divides(leads[k], lcm):
                a, b = (min(i, k), max(i, k)), (min(j, k), max(j, k))
                if a not in pending and b not in pending:
                    chain = True
                    break
        if chain:
            continue
        s = s_polynomial(basis[i], basis[j], order)
        r = _reduce_by(s, basis, leads, order)
        if not r.is_zero():
            add(r)

    # minimalise then inter-reduce
    alive = [k for k in range(len(basis)) if leads[k] is not None]
    minimal = []
    for k in alive:
        lk = leads[k]
        dominated = False
        for other in alive:
            if other == k:
                continue
            lo = leads[other]
            if mono_divides(lo, lk) and (lo != lk or other < k):
                dominated = True
                break
        if not dominated:
            minimal.append(basis[k])
    reduced = []
    for idx, g in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1:]
        lm = order.lm(g)
        tail = g - Poly.monomial(lm, g.terms[lm])
        tail = _reduce_by(tail, others, [order.lm(o) for o in others], order)
        reduced.append(_monic(tail + Poly.monomial(lm, g.terms[lm]), order))
    reduced.sort(key=lambda g: key(order.lm(g)), reverse=True)
    return GroebnerBasis(reduced, order, _trusted=True)


def red(gb: GroebnerBasis, f: Poly) -> Poly:
    return gb.reduce(f)


def ideal_member(gb: GroebnerBasis, f: Poly) -> bool:
    return gb.contains(f)
