"""Polyhedra over abstract dimensions: projection and optimal linear bounds.

Dimensions are arbitrary hashable handles (the saturation engine uses
monomials).  A polyhedron is a list of :class:`~symbound.lra.LinearAtom`.

The interesting pieces are

* :func:`local_project`, a model-guided under-approximation of projection
  whose size stays linear in the input,
* :func:`poly_reduce`, which finds the upper bounds on a linear term whose
  leading dimension is as small as possible, by sampling models and
  projecting locally, and
* :func:`lp_reduce`, the same question answered by linear programming over
  conic multipliers (slower, used to cross-check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .lra import LinearAtom, Solver, entails

Dimension = Hashable
Model = Dict[Dimension, Fraction]
ONE = ()  # the constant dimension of cone vectors

_ZERO = Fraction(0)


def normalize_atom(coeffs: Dict[Dimension, Fraction], constant, rel: str) -> LinearAtom:
    """Scale to coprime integer coefficients, keeping the sign (and the relation)."""
    vals = [Fraction(v) for v in coeffs.values() if v] + ([Fraction(constant)] if constant else [])
    if not vals:
        return LinearAtom({}, 0, rel)
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    g = 0
    for v in vals:
        g = math.gcd(g, (v * den).numerator)
    s = Fraction(den, g)
    if rel == "=":
        # equalities have no sign; fix it by the first coefficient
        first = next((v for v in coeffs.values() if v), None)
        if first is not None and first < 0:
            s = -s
    return LinearAtom({d: v * s for d, v in coeffs.items() if v}, Fraction(constant) * s, rel)


@dataclass
class Polyhedron:
    """A conjunction of linear constraints."""
    constraints: List[LinearAtom] = field(default_factory=list)

    def dims(self) -> List[Dimension]:
        seen = {}
        for c in self.constraints:
            for d in c.coeffs:
                seen.setdefault(d, None)
        return list(seen)

    def holds(self, m: Model) -> bool:
        return all(c.holds_rational(m) for c in self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def to_text(self) -> str:
        lines = []
        for c in self.constraints:
            terms = " + ".join(f"{v}*{d}" for d, v in c.coeffs.items()) or "0"
            lines.append(f"{terms} + {c.constant} {c.rel} 0")
        return "\n".join(lines)


def _constraints(P) -> List[LinearAtom]:
    return list(P.constraints) if isinstance(P, Polyhedron) else list(P)


def _combine(a: LinearAtom, ka, b: LinearAtom, kb, rel: str) -> Optional[LinearAtom]:
    coeffs = {}
    for d, v in a.coeffs.items():
        coeffs[d] = v * ka
    for d, v in b.coeffs.items():
        coeffs[d] = coeffs.get(d, _ZERO) + v * kb
    return normalize_atom(coeffs, a.constant * ka + b.constant * kb, rel)


def _substitute(c: LinearAtom, eq: LinearAtom, x) -> LinearAtom:
    a = c.coeffs.get(x)
    if not a:
        return c
    e = eq.coeffs[x]
    # c - (a/e) * eq eliminates x; scaling by |e| keeps the direction
    k = abs(e)
    return _combine(c, k, eq, -a * k / e, c.rel)


def _clean(atoms: Iterable[LinearAtom]) -> List[LinearAtom]:
    out, seen = [], set()
    for a in atoms:
        if not a.coeffs and a.constant_truth():
            continue
        if a in seen:
            continue
        seen.add(a)
        out.append(a)
    return out


# Local projection runs on integer rows ``(coeffs, constant, rel)`` with
# coprime integer entries; this is much cheaper than Fraction arithmetic.

def _make_row(coeffs, const, rel):
    return (coeffs, const, rel, (frozenset(coeffs.items()), const, rel))


def _to_row(c: LinearAtom):
    n = normalize_atom(c.coeffs, c.constant, c.rel)
    return _make_row({d: int(v) for d, v in n.coeffs.items()}, int(n.constant), n.rel)


def _to_atom(r) -> LinearAtom:
    return LinearAtom(r[0], r[1], r[2])


def _row_combine(a, ka: int, b, kb: int, rel: str):
    coeffs = {d: v * ka for d, v in a[0].items()}
    for d, v in b[0].items():
        nv = coeffs.get(d, 0) + v * kb
        if nv:
            coeffs[d] = nv
        else:
            coeffs.pop(d, None)
    const = a[1] * ka + b[1] * kb
    g = abs(const)
    for v in coeffs.values():
        g = math.gcd(g, v)
    if g > 1:
        coeffs = {d: v // g for d, v in coeffs.items()}
        const //= g
    if rel == "=" and coeffs and next(iter(coeffs.values())) < 0:
        coeffs = {d: -v for d, v in coeffs.items()}
        const = -const
    return _make_row(coeffs, const, rel)


def _row_trivial(r) -> bool:
    if r[0]:
        return False
    c = r[1]
    return c >= 0 if r[2] == ">=" else (c > 0 if r[2] == ">" else c == 0)


_INT_MODELS: Dict[int, tuple] = {}


def _int_model(m: Model):
    """``(values * den, den)`` with integer values; cached per model object."""
    hit = _INT_MODELS.get(id(m))
    if hit is not None and hit[0] is m:
        return hit[1], hit[2]
    den = 1
    for v in m.values():
        q = Fraction(v).denominator
        den = den * q // math.gcd(den, q)
    mi = {d: int(Fraction(v) * den) for d, v in m.items()}
    _INT_MODELS.clear()
    _INT_MODELS[id(m)] = (m, mi, den)
    return mi, den


def _eliminate(xrows, m: Model, x) -> list:
    """New rows replacing ``xrows`` (the rows mentioning ``x``, in index order)."""
    eq = None
    for r in xrows:
        if r[2] == "=":
            eq = r
            break
    new = []
    if eq is not None:
        e = eq[0][x]
        k = abs(e)
        for r in xrows:
            if r is not eq:
                # |e| * r - sign(e) * a * eq
                new.append(_row_combine(r, k, eq, -r[0][x] * k // e, r[2]))
        return new
    lower, upper = [], []
    for r in xrows:
        (lower if r[0][x] > 0 else upper).append(r)
    if not lower:
        return new
    mi, den = _int_model(m)

    def value(r):
        # exact -(rest at m)/a, computed over integers scaled by den
        t = r[1] * den
        for d, v in r[0].items():
            if d != x:
                t += v * mi.get(d, 0)
        return Fraction(-t, r[0][x])

    best = 0
    best_key = (value(lower[0]), lower[0][2] == ">")
    for i in range(1, len(lower)):
        k = (value(lower[i]), lower[i][2] == ">")
        if k > best_key:
            best, best_key = i, k
    star = lower[best]
    a_star = star[0][x]
    star_strict = star[2] == ">"
    for i, lb in enumerate(lower):
        if i == best:
            continue
        rel = ">" if (not star_strict and lb[2] == ">") else ">="
        new.append(_row_combine(lb, a_star, star, -lb[0][x], rel))
    for ub in upper:
        rel = ">" if (star_strict or ub[2] == ">") else ">="
        new.append(_row_combine(star, -ub[0][x], ub, a_star, rel))
    return new


def _project_rows(rows, m: Model, x):
    rest, xrows = [], []
    for r in rows:
        (xrows if x in r[0] else rest).append(r)
    new = _eliminate(xrows, m, x)
    if not new:
        return rest
    seen = {r[3] for r in rest}
    for r in new:
        if _row_trivial(r):
            continue
        k = r[3]
        if k not in seen:
            seen.add(k)
            rest.append(r)
    return rest


class _RowSet:
    """Rows indexed by dimension, so projecting ``x`` only touches rows with ``x``."""

    def __init__(self, rows):
        self.rows: Dict[int, tuple] = {}
        self.index: Dict[Dimension, set] = {}
        self.keys: Dict[tuple, int] = {}
        self.next_id = 0
        for r in rows:
            self.add(r)

    def add(self, r) -> Optional[int]:
        if _row_trivial(r) or r[3] in self.keys:
            return None
        i = self.next_id
        self.next_id += 1
        self.rows[i] = r
        self.keys[r[3]] = i
        for d in r[0]:
            self.index.setdefault(d, set()).add(i)
        return i

    def remove(self, i: int):
        r = self.rows.pop(i)
        del self.keys[r[3]]
        for d in r[0]:
            self.index[d].discard(i)
        return r

    def project(self, m: Model, x):
        """Project ``x`` in place; returns an undo record."""
        ids = sorted(self.index.get(x, ()))
        xrows = [self.rows[i] for i in ids]
        removed = [(i, self.remove(i)) for i in ids]
        added = [j for j in (self.add(r) for r in _eliminate(xrows, m, x)) if j is not None]
        return removed, added

    def undo(self, record) -> None:
        removed, added = record
        for j in added:
            self.remove(j)
        for i, r in removed:
            self.rows[i] = r
            self.keys[r[3]] = i
            for d in r[0]:
                self.index.setdefault(d, set()).add(i)

    def bounds_above(self, T) -> bool:
        for i in self.index.get(T, ()):
            r = self.rows[i]
            a = r[0][T]
            if a < 0 or r[2] == "=":
                return True
        return False

    def current(self) -> list:
        return [self.rows[i] for i in sorted(self.rows)]


def local_project(P, m: Model, x: Dimension, check: bool = True) -> Polyhedron:
    """Model-guided projection of ``x`` out of ``P``; ``m`` must satisfy ``P``.

    With equalities on ``x`` one of them is substituted; with no lower bound
    the constraints on ``x`` are dropped; otherwise the lower bound that is
    largest at ``m`` (strict first, then lowest index) is compared against
    the other lower bounds and every upper bound.  The result is again
    satisfied by ``m``, so chained calls may pass ``check=False``.
    """
    cs = _constraints(P)
    if check:
        for c in cs:
            if not c.holds_rational(m):
                raise ValueError(f"model does not satisfy {c!r}")
    rows = [_to_row(c) for c in cs]
    rows = [r for r in rows if not _row_trivial(r)]
    return Polyhedron([_to_atom(r) for r in _project_rows(rows, m, x)])


def local_project_seq(P, m: Model, dims: Sequence[Dimension]) -> Polyhedron:
    cs = _constraints(P)
    if not all(c.holds_rational(m) for c in cs):
        raise ValueError("model does not satisfy the polyhedron")
    rows = [r for r in (_to_row(c) for c in cs) if not _row_trivial(r)]
    for d in dims:
        rows = _project_rows(rows, m, d)
    return Polyhedron([_to_atom(r) for r in rows])


def full_project_fm(P, dims: Sequence[Dimension]) -> Polyhedron:
    """Exact projection by Fourier-Motzkin elimination (redundancy is kept)."""
    cs = _clean(_constraints(P))
    for x in dims:
        eqs = [c for c in cs if c.rel == "=" and c.coeffs.get(x)]
        if eqs:
            eq = eqs[0]
            cs = _clean(_substitute(c, eq, x) for c in cs if c is not eq)
            continue
        rest, lower, upper = [], [], []
        for c in cs:
            a = c.coeffs.get(x)
            if not a:
                rest.append(c)
            elif a > 0:
                lower.append(c)
            else:
                upper.append(c)
        for lb in lower:
            for ub in upper:
                rel = ">" if (lb.strict or ub.strict) else ">="
                rest.append(_combine(lb, -ub.coeffs[x], ub, lb.coeffs[x], rel))
        cs = _clean(rest)
    return Polyhedron(cs)


# ------------------------------------------------------------------ bounds

@dataclass(frozen=True)
class LinearBound:
    """``T <= sum(coeffs) + constant`` (``<`` when strict)."""
    coeffs: Tuple[Tuple[Dimension, Fraction], ...]
    constant: Fraction
    strict: bool = False

    @classmethod
    def make(cls, coeffs: Dict[Dimension, Fraction], constant, strict=False):
        items = tuple(sorted(((d, Fraction(v)) for d, v in coeffs.items() if v), key=lambda t: repr(t[0])))
        return cls(items, Fraction(constant), strict)

    def as_dict(self) -> Dict[Dimension, Fraction]:
        return dict(self.coeffs)

    def leading(self, rank: Dict[Dimension, int]) -> Optional[Dimension]:
        if not self.coeffs:
            return None
        return min((d for d, _ in self.coeffs), key=lambda d: rank[d])


def _has_upper(cs: Sequence[LinearAtom], T) -> bool:
    for c in cs:
        a = c.coeffs.get(T)
        if a and (a < 0 or c.rel == "="):
            return True
    return False


def _bounds_on(cs: Sequence[LinearAtom], T) -> List[LinearBound]:
    out = []
    for c in cs:
        a = c.coeffs.get(T)
        if not a:
            continue
        if a > 0 and c.rel != "=":
            continue
        # a*T + rest >= 0 with a < 0  gives  T <= rest / -a
        k = -a
        rest = {d: v / k for d, v in c.coeffs.items() if d != T}
        out.append(LinearBound.make(rest, c.constant / k, c.strict))
    return out


def _rows_have_upper(rows, T) -> bool:
    for r in rows:
        a = r[0].get(T)
        if a and (a < 0 or r[2] == "="):
            return True
    return False


def conjecture(P, m: Model, dims: Sequence[Dimension], T: Dimension) -> List[LinearBound]:
    """Candidate upper bounds on ``T`` read off the last projection that bounds it."""
    cs = _constraints(P)
    if not all(c.holds_rational(m) for c in cs):
        raise ValueError("model does not satisfy the polyhedron")
    rows = [r for r in (_to_row(c) for c in cs) if not _row_trivial(r)]
    return _conjecture_rows(rows, m, dims, T)


def _conjecture_rows(rows, m: Model, dims, T) -> List[LinearBound]:
    rs = _RowSet(rows)
    for d in dims:
        if d == T or not rs.index.get(d):
            continue
        record = rs.project(m, d)
        if not rs.bounds_above(T):
            rs.undo(record)
            break
    return _bounds_on([_to_atom(r) for r in rs.current() if T in r[0]], T)


class _Fresh:
    """A dimension distinct from every user dimension."""

    def __repr__(self):
        return "T"


def _as_term(t) -> Tuple[Dict[Dimension, Fraction], Fraction]:
    if isinstance(t, tuple) and len(t) == 2 and isinstance(t[0], dict):
        return {d: Fraction(v) for d, v in t[0].items() if v}, Fraction(t[1])
    if isinstance(t, dict):
        return {d: Fraction(v) for d, v in t.items() if v}, _ZERO
    raise TypeError("a linear term is a dict of coefficients or (dict, constant)")


def _bound_atom(T, b: LinearBound, strict: bool) -> LinearAtom:
    # b - T >= 0
    coeffs = {d: v for d, v in b.coeffs}
    coeffs[T] = Fraction(-1)
    return LinearAtom(coeffs, b.constant, ">" if strict else ">=")


@dataclass
class ReduceStats:
    samples: int = 0
    conjectures: int = 0


def poly_reduce(P, t, dim_order: Sequence[Dimension], stats: Optional[ReduceStats] = None
                ) -> List[LinearBound]:
    """Upper bounds ``t <= b`` entailed by ``P`` with minimal leading dimension.

    ``t`` is a dict of coefficients or a ``(coeffs, constant)`` pair and
    ``dim_order`` lists dimensions from greatest to least.  All surviving
    bounds of the minimal leading dimension are returned.
    """
    coeffs, const = _as_term(t)
    if not coeffs:
        return [LinearBound.make({}, const)]
    cs = _constraints(P)
    rank = {d: i for i, d in enumerate(dim_order)}
    for c in cs:
        for d in c.coeffs:
            if d not in rank:
                raise ValueError(f"dimension {d!r} missing from the order")
    for d in coeffs:
        if d not in rank:
            raise ValueError(f"dimension {d!r} missing from the order")
    T = _Fresh()
    tdef = dict(coeffs)
    tdef[T] = Fraction(-1)
    PT = cs + [LinearAtom(tdef, const, "=")]
    present = set(coeffs)
    for c in cs:
        present.update(c.coeffs)
    dims = [d for d in dim_order if d in present]
    solver = Solver(PT)
    rows = [r for r in (_to_row(c) for c in PT) if not _row_trivial(r)]
    found: List[LinearBound] = []
    seen = set()
    while True:
        solver.push()
        for b in found:
            # a model strictly above every bound so far; its conjecture is then new
            # (a model on a boundary can reproduce an old bound and stall the search)
            solver.add(LinearAtom({**{d: -v for d, v in b.coeffs}, T: 1}, -b.constant, ">"))
        res = solver.check()
        solver.pop()
        if not res.sat:
            if not found:
                first = solver.check()
                if not first.sat:
                    raise ValueError("polyhedron is unsatisfiable")
            break
        m = res.concrete_model()
        if stats is not None:
            stats.samples += 1
        new = 0
        for b in _conjecture_rows(rows, m, dims, T):
            key = (b.coeffs, b.constant)
            if key not in seen:
                seen.add(key)
                found.append(b)
                new += 1
        if stats is not None:
            stats.conjectures += new
        if not new:
            break
    true: List[LinearBound] = []
    for b in found:
        if b.strict and entails(solver, _bound_atom(T, b, True)):
            true.append(b)
        elif entails(solver, _bound_atom(T, b, False)):
            true.append(LinearBound(b.coeffs, b.constant, False))
    if not true:
        return [LinearBound.make(coeffs, const)]
    top = len(rank) + 1

    def lead_rank(b):
        ld = b.leading(rank)
        return top if ld is None else rank[ld]

    best = max(lead_rank(b) for b in true)
    return [b for b in true if lead_rank(b) == best]


# ------------------------------------------------------------- cone via LP

@dataclass
class PolyhedralCone:
    """Conic hull of generator vectors; the constant vector ``{ONE: 1}`` is always present.

    Each generator is ``(vector, strict, depth)`` where a vector maps
    dimensions (``ONE`` for the constant) to coefficients.
    """
    generators: List[Tuple[Dict[Dimension, Fraction], bool, int]] = field(default_factory=list)

    def __post_init__(self):
        if not any(v == {ONE: 1} for v, _, _ in self.generators):
            self.generators.insert(0, ({ONE: Fraction(1)}, False, 0))

    def vectors(self) -> List[Dict[Dimension, Fraction]]:
        return [v for v, _, _ in self.generators]

    def as_polyhedron(self) -> Polyhedron:
        cs = []
        for v, strict, _ in self.generators:
            coeffs = {d: c for d, c in v.items() if d != ONE}
            if not coeffs:
                continue
            cs.append(LinearAtom(coeffs, v.get(ONE, 0), ">" if strict else ">="))
        return Polyhedron(cs)

    def dims(self) -> List[Dimension]:
        seen = {}
        for v, _, _ in self.generators:
            for d in v:
                if d != ONE:
                    seen.setdefault(d, None)
        return list(seen)


def _lam(i):
    return ("lambda", i)


def _coefficient_rows(gens, dims) -> Dict[Dimension, Dict[Dimension, Fraction]]:
    rows: Dict[Dimension, Dict[Dimension, Fraction]] = {d: {} for d in dims}
    for i, v in enumerate(gens):
        for d, c in v.items():
            if d in rows:
                rows[d][_lam(i)] = Fraction(c)
    return rows


def cone_membership(Q: PolyhedralCone, v: Dict[Dimension, Fraction]) -> Optional[List[Fraction]]:
    """Non-negative multipliers ``lam`` with ``sum(lam_i * g_i) == v``, or None."""
    gens = Q.vectors()
    dims = set(v)
    for g in gens:
        dims.update(g)
    solver = Solver(LinearAtom({_lam(i): 1}, 0, ">=") for i in range(len(gens)))
    rows = _coefficient_rows(gens, dims)
    for d in dims:
        solver.add(LinearAtom(rows[d], -Fraction(v.get(d, 0)), "="))
    res = solver.check()
    if not res.sat:
        return None
    m = res.concrete_model()
    lam = [m.get(_lam(i), _ZERO) for i in range(len(gens))]
    if not _check_combination(gens, lam, v):
        raise ArithmeticError("cone membership witness failed to re-verify")
    return lam


def _check_combination(gens, lam, v) -> bool:
    total: Dict[Dimension, Fraction] = {}
    for g, l in zip(gens, lam):
        if l < 0:
            return False
        for d, c in g.items():
            total[d] = total.get(d, _ZERO) + l * c
    keys = set(total) | set(v)
    return all(total.get(d, _ZERO) == Fraction(v.get(d, 0)) for d in keys)


def find_implied_equalities(Q: PolyhedralCone) -> List[int]:
    """Indices of generators ``g`` such that ``-g`` is also in the cone."""
    out = []
    for i, g in enumerate(Q.vectors()):
        if cone_membership(Q, {d: -c for d, c in g.items()}) is not None:
            out.append(i)
    return out


def lp_reduce(Q: PolyhedralCone, t, dim_order: Sequence[Dimension]
              ) -> Tuple[LinearBound, List[Fraction]]:
    """Upper bound on ``t`` via LP over conic multipliers.

    Finds ``lam >= 0`` so that ``t + sum(lam_i * g_i)`` has a zero coefficient
    on each dimension of ``dim_order`` in turn (greatest first) whenever that
    stays feasible, i.e. the lexicographically best coefficient pattern.
    Returns the bound and the multipliers.
    """
    coeffs, const = _as_term(t)
    gens = Q.vectors()
    dims = [d for d in dim_order]
    known = set(dims)
    for g in gens:
        for d in g:
            if d != ONE and d not in known:
                raise ValueError(f"dimension {d!r} missing from the order")
    rows = _coefficient_rows(gens, dims)
    solver = Solver(LinearAtom({_lam(i): 1}, 0, ">=") for i in range(len(gens)))
    # lexicographic: zero each coefficient greatest-first whenever still feasible
    for d in dims:
        solver.push()
        solver.add(LinearAtom(rows[d], coeffs.get(d, _ZERO), "="))
        if not solver.check(want_model=False).sat:
            solver.pop()
    m = solver.check().concrete_model()
    lam = [m.get(_lam(i), _ZERO) for i in range(len(gens))]
    out: Dict[Dimension, Fraction] = dict(coeffs)
    out_const = const
    strict = False
    for g, l, (_, s, _) in zip(gens, lam, Q.generators):
        if not l:
            continue
        strict = strict or s
        for d, c in g.items():
            if d == ONE:
                out_const += l * c
            else:
                out[d] = out.get(d, _ZERO) + l * c
    return LinearBound.make(out, out_const, strict), lam
