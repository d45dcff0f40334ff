"""Saturation: grow a cone of polynomials implied by the assumptions.

Pipeline:

1. :func:`purify` replaces every ``floor(...)``/``inv(...)`` occurrence by a
   fresh variable and records its definition in a foreign-function map.
2. :func:`instantiate_axioms` turns each map entry into polynomial facts
   using the templates in :data:`AXIOM_TEMPLATES`.
3. :func:`saturate` iterates: Gröbner basis of the equalities, congruence
   closure over the map, map reduction, consequence finding with Houdini,
   and products of non-negative facts up to a depth bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import syntax
from .cone import Generator, PolynomialCone
from .groebner import GroebnerBasis
from .lra import Conj, Disj, LinearAtom, Solver, houdini_filter
from .polynomial import MonomialOrder, Poly, map_levels
from .syntax import (Add, And, BoolConst, Formula, Mul, Num, Pow, Rel, Term, Var,
                     to_nnf)

ForeignMap = Dict[str, Tuple[str, Poly]]


# ------------------------------------------------------- purified formulas

@dataclass(frozen=True)
class PAtom:
    """``poly rel 0`` with ``rel`` in ``>=``, ``>``, ``=``."""
    poly: Poly
    rel: str


@dataclass(frozen=True)
class PAnd:
    args: Tuple["PFormula", ...]


@dataclass(frozen=True)
class POr:
    args: Tuple["PFormula", ...]


PFormula = Union[PAtom, PAnd, POr]
TRUE = PAnd(())
FALSE = POr(())


def patoms(f: PFormula) -> List[PAtom]:
    if isinstance(f, PAtom):
        return [f]
    out = []
    for a in f.args:
        out.extend(patoms(a))
    return out


def pconjuncts(f: PFormula) -> List[PFormula]:
    if isinstance(f, PAnd):
        out = []
        for a in f.args:
            out.extend(pconjuncts(a))
        return out
    return [f]


def _rel_atom(p: Poly, op: str) -> PFormula:
    if op == ">=":
        return PAtom(p, ">=")
    if op == ">":
        return PAtom(p, ">")
    if op == "<=":
        return PAtom(-p, ">=")
    if op == "<":
        return PAtom(-p, ">")
    if op == "=":
        return PAtom(p, "=")
    return POr((PAtom(-p, ">"), PAtom(p, ">")))


# ------------------------------------------------------------ purification

class _Occurrences:
    def __init__(self):
        self.items: List[list] = []  # [depth, source, seq, fn, arg]

    def add(self, depth, source, fn, arg) -> str:
        pid = f"#{len(self.items)}"
        self.items.append([depth, source, len(self.items), fn, arg])
        return pid


def _purify_term(t: Term, occ: _Occurrences, source: int) -> Tuple[Poly, int]:
    if isinstance(t, Num):
        return Poly.const(t.value), 0
    if isinstance(t, Var):
        return Poly.var(t.name), 0
    if isinstance(t, Add):
        out, d = Poly(), 0
        for a in t.args:
            p, da = _purify_term(a, occ, source)
            out, d = out + p, max(d, da)
        return out, d
    if isinstance(t, Mul):
        out, d = Poly.const(1), 0
        for a in t.args:
            p, da = _purify_term(a, occ, source)
            out, d = out * p, max(d, da)
        return out, d
    if isinstance(t, Pow):
        p, d = _purify_term(t.base, occ, source)
        return p ** t.exp, d
    arg, d = _purify_term(t.arg, occ, source)
    return Poly.var(occ.add(d + 1, source, syntax.FUNCTIONS.get(t.fn, t.fn), arg)), d + 1


def _purify_formula(f: Formula, occ: _Occurrences) -> PFormula:
    if isinstance(f, BoolConst):
        return TRUE if f.value else FALSE
    if isinstance(f, Rel):
        lhs, _ = _purify_term(f.lhs, occ, 0)
        rhs, _ = _purify_term(f.rhs, occ, 0)
        return _rel_atom(lhs - rhs, f.op)
    args = tuple(_purify_formula(a, occ) for a in f.args)
    return PAnd(args) if isinstance(f, And) else POr(args)


def _rename(f: PFormula, subst) -> PFormula:
    if isinstance(f, PAtom):
        return PAtom(f.poly.substitute(subst), f.rel)
    args = tuple(_rename(a, subst) for a in f.args)
    return PAnd(args) if isinstance(f, PAnd) else POr(args)


def purify(phi: Formula, objective: Optional[Term] = None, avoid: Iterable[str] = (),
           prefix: str = "u") -> Tuple[PFormula, ForeignMap, Optional[Poly]]:
    """Replace function applications by fresh variables.

    Every occurrence gets its own variable (closure later merges equal ones).
    Variables are numbered innermost level first; within a level, formula
    occurrences come before objective occurrences, left to right.
    """
    occ = _Occurrences()
    pf = _purify_formula(to_nnf(phi), occ)
    obj = None
    if objective is not None:
        obj, _ = _purify_term(objective, occ, 1)
    taken = set(avoid)
    order = sorted(occ.items, key=lambda it: (it[0], it[1], it[2]))
    names: Dict[str, Poly] = {}
    tm: ForeignMap = {}
    k = 0
    for depth, source, seq, fn, arg in order:
        k += 1
        while f"{prefix}{k}" in taken:
            k += 1
        name = f"{prefix}{k}"
        taken.add(name)
        names[f"#{seq}"] = Poly.var(name)
    for depth, source, seq, fn, arg in order:
        name = names[f"#{seq}"].variables().pop()
        tm[name] = (fn, arg.substitute(names))
    pf = _rename(pf, names)
    if obj is not None:
        obj = obj.substitute(names)
    return pf, tm, obj


# ------------------------------------------------------------------ axioms

AXIOM_TEMPLATES: Dict[str, List[str]] = {
    "floor": ["p - 1 <= u", "u <= p", "p >= 0 implies u >= 0"],
    # the equality assumes the argument is nonzero
    "inv": ["u * p = 1", "p >= 0 implies u >= 0"],
}


def register_axioms(fn: str, templates: Sequence[str]) -> None:
    """Declare a new unary function symbol with axioms over ``u`` (result) and ``p`` (argument)."""
    for t in templates:
        syntax.parse_formula(t, known_vars={"u", "p"})
    AXIOM_TEMPLATES[fn] = list(templates)
    syntax.FUNCTIONS[fn] = fn


def instantiate_axioms(tm: ForeignMap, templates: Optional[Dict[str, List[str]]] = None
                       ) -> List[PFormula]:
    templates = AXIOM_TEMPLATES if templates is None else templates
    parsed = {}
    out: List[PFormula] = []
    seen = set()
    for u, (fn, arg) in tm.items():
        if fn not in parsed:
            parsed[fn] = [_purify_formula(to_nnf(syntax.parse_formula(t, known_vars={"u", "p"})),
                                          _Occurrences())
                          for t in templates.get(fn, [])]
        subst = {"u": Poly.var(u), "p": arg}
        for f in parsed[fn]:
            g = _rename(f, subst)
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out


# ------------------------------------------------------------------ orders

def build_order(kind: str, tm: ForeignMap, plain: Sequence[str], keep: Iterable[str]) -> MonomialOrder:
    """Map variables first (earlier ones higher), then plain variables in declaration order."""
    variables = list(tm) + [v for v in plain if v not in tm]
    return MonomialOrder(kind, variables, tm=tm, keep=keep)


def closure(gb: GroebnerBasis, tm: ForeignMap) -> GroebnerBasis:
    """Congruence closure: equal arguments under the same symbol give equal results."""
    order = gb.order
    names = list(tm)
    changed = True
    while changed:
        changed = False
        for i, u in enumerate(names):
            fu, pu = tm[u]
            for w in names[i + 1:]:
                fw, pw = tm[w]
                if fu != fw:
                    continue
                d = Poly.var(u) - Poly.var(w)
                if gb.contains(d):
                    continue
                if gb.contains(pu - pw):
                    gb = GroebnerBasis(list(gb) + [d], order)
                    changed = True
    return gb


def _acyclic(tm: ForeignMap) -> bool:
    try:
        map_levels(tm)
        return True
    except ValueError:
        return False


def reduce_term_map(tm: ForeignMap, ideal: GroebnerBasis) -> ForeignMap:
    """Reduce every argument modulo the ideal (entries that would become cyclic are kept)."""
    out: ForeignMap = dict(tm)
    for u, (fn, arg) in tm.items():
        r = ideal.reduce(arg)
        if r == arg or u in r.variables():
            continue
        trial = dict(out)
        trial[u] = (fn, r)
        if _acyclic(trial):
            out = trial
    return out


# ------------------------------------------------------------- saturation

@dataclass
class SaturationConfig:
    depth: int = 3
    keep: frozenset = frozenset()
    order: str = "effective_degree"
    templates: Optional[Dict[str, List[str]]] = None
    max_rounds: int = 40
    # merge products whose reduced forms coincide; by default every distinct
    # multiset of base facts is its own generator
    dedup_products: bool = False

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("saturation depth must be at least 1")
        self.keep = frozenset(self.keep)


@dataclass
class SaturationStats:
    rounds: int = 0
    c_eq: int = 0
    c_ineq: int = 0
    monomials: int = 0
    time_groebner: float = 0.0
    time_consequences: float = 0.0
    time_products: float = 0.0
    time_total: float = 0.0


@dataclass
class SaturationResult:
    cone: PolynomialCone
    tm: ForeignMap
    formula: PFormula
    objective: Optional[Poly]
    stats: SaturationStats
    plain_vars: List[str] = field(default_factory=list)


class InconsistentAssumptions(Exception):
    """The assumptions (with the function axioms) have no model."""


def _gen_key(p: Poly, strict: bool):
    return (p.primitive(), strict)


def _linear(p: Poly, rel: str) -> Union[LinearAtom, bool]:
    if p.is_constant():
        c = p.constant_term()
        return c >= 0 if rel == ">=" else (c > 0 if rel == ">" else c == 0)
    return LinearAtom({m: c for m, c in p.terms.items() if m}, p.constant_term(), rel)


def _linear_formula(f: PFormula, gb: GroebnerBasis):
    if isinstance(f, PAtom):
        return _linear(gb.reduce(f.poly), f.rel)
    parts = []
    if isinstance(f, PAnd):
        for a in f.args:
            g = _linear_formula(a, gb)
            if g is False:
                return False
            if g is not True:
                parts.append(g)
        if not parts:
            return True
        return parts[0] if len(parts) == 1 else Conj(tuple(parts))
    for a in f.args:
        g = _linear_formula(a, gb)
        if g is True:
            return True
        if g is not False:
            parts.append(g)
    if not parts:
        return False
    return parts[0] if len(parts) == 1 else Disj(tuple(parts))


def find_consequences(formula: PFormula, cone: PolynomialCone
                      ) -> Tuple[List[Poly], List[Tuple[Poly, bool]]]:
    """New equalities and inequalities implied by ``formula`` and the cone.

    Candidates are the formula's atoms plus a probe ``q = 0`` per generator.
    """
    gb = cone.ideal
    system = []
    for c in pconjuncts(formula):
        g = _linear_formula(c, gb)
        if g is False:
            raise InconsistentAssumptions("an assumption reduces to false")
        if g is not True:
            system.append(g)
    for gen in cone.generators:
        system.append(_linear(gen.poly, ">" if gen.strict else ">="))
    solver = Solver(system)
    if not solver.check().sat:
        raise InconsistentAssumptions("the linearized assumptions are unsatisfiable")
    known = {_gen_key(g.poly, g.strict) for g in cone.generators}
    candidates: List[LinearAtom] = []
    meaning: List[Tuple[str, Poly, bool]] = []
    seen = set()
    for a in patoms(formula):
        r = gb.reduce(a.poly)
        if r.is_constant():
            continue
        if a.rel != "=" and _gen_key(r, a.rel == ">") in known:
            continue
        la = _linear(r, a.rel)
        if la in seen:
            continue
        seen.add(la)
        candidates.append(la)
        meaning.append(("eq" if a.rel == "=" else "ineq", r, a.rel == ">"))
    for gen in cone.generators:
        if gen.strict:
            continue
        la = _linear(-gen.poly, ">=")
        if la in seen:
            continue
        seen.add(la)
        candidates.append(la)
        meaning.append(("eq", gen.poly, False))
    kept = set(houdini_filter(solver, candidates))
    eqs: List[Poly] = []
    ineqs: List[Tuple[Poly, bool]] = []
    for la, (kind, p, strict) in zip(candidates, meaning):
        if la not in kept:
            continue
        if kind == "eq":
            eqs.append(p)
        else:
            ineqs.append((p, strict))
    return eqs, ineqs


def take_products(new: Sequence[Tuple[Poly, int]], existing: Sequence[Tuple[Poly, int]], N: int,
                  reduce=None) -> List[Tuple[Poly, int]]:
    """Products of non-negative facts with summed depth at most ``N``.

    Every returned product uses at least one factor from ``new``; the new
    facts themselves are included.  Results are deduplicated after the
    optional ``reduce`` (e.g. ideal reduction).
    """
    red = reduce or (lambda p: p)
    base = [(p, d, False) for p, d in existing] + [(p, d, True) for p, d in new]
    out: List[Tuple[Poly, int]] = []
    seen = {red(p).primitive() for p, _ in existing}

    def emit(p, d):
        r = red(p)
        if r.is_constant():
            return
        k = r.primitive()
        if k in seen:
            return
        seen.add(k)
        out.append((r, d))

    for p, d in new:
        emit(p, d)

    def grow(start, prod, depth, has_new):
        for i in range(start, len(base)):
            p, d, is_new = base[i]
            nd = depth + d
            if nd > N:
                continue
            q = red(prod * p)
            if has_new or is_new:
                if depth > 0:
                    emit(q, nd)
            grow(i, q, nd, has_new or is_new)

    grow(0, Poly.const(1), 0, False)
    return out


def _reduced_generators(gens: List[Generator], gb: GroebnerBasis, dedup_products: bool
                        ) -> List[Generator]:
    out: Dict[tuple, Generator] = {}
    products: List[Generator] = []
    for g in gens:
        r = gb.reduce(g.poly)
        if r.is_constant():
            c = r.constant_term()
            if c < 0 or (c == 0 and g.strict):
                raise InconsistentAssumptions("a non-negative fact reduces to a negative constant")
            continue
        if g.depth > 1 and not dedup_products:
            products.append(Generator(r, g.strict, g.depth))
            continue
        k = _gen_key(r, g.strict)
        prev = out.get(k)
        if prev is None or g.depth < prev.depth:
            out[k] = Generator(r, g.strict, g.depth)
    base = sorted(out.values(), key=lambda g: g.depth)
    return base + products


def saturate(phi: Union[Formula, PFormula], config: Optional[SaturationConfig] = None,
             objective=None, variables: Sequence[str] = ()) -> SaturationResult:
    """Saturate the assumptions into a cone.

    ``phi`` is a parsed formula (it is purified here) and ``objective`` an
    optional term purified alongside it.  ``variables`` fixes the priority of
    plain variables (declaration order).
    """
    config = config or SaturationConfig()
    start = time.perf_counter()
    stats = SaturationStats()
    if isinstance(phi, (PAtom, PAnd, POr)):
        formula, tm, obj = phi, {}, objective
    else:
        names = set(variables)
        if phi is not None:
            for a in syntax.formula_atoms(phi):
                names |= syntax.term_vars(a.lhs) | syntax.term_vars(a.rhs)
        if objective is not None:
            names |= syntax.term_vars(objective)
        formula, tm, obj = purify(phi if phi is not None else BoolConst(True), objective, avoid=names)
    plain = list(dict.fromkeys(variables))
    extra = set()
    for a in patoms(formula):
        extra |= a.poly.variables()
    if obj is not None:
        extra |= obj.variables()
    for u, (_, arg) in tm.items():
        extra |= arg.variables()
    plain += sorted(v for v in extra if v not in tm and v not in plain)

    axioms = instantiate_axioms(tm, config.templates)
    full = PAnd(tuple(pconjuncts(formula)) + tuple(axioms))

    # equalities of the top-level conjunction seed the ideal directly
    eqs = [a.poly for a in pconjuncts(full) if isinstance(a, PAtom) and a.rel == "="]
    gens: List[Generator] = []
    N = config.depth
    gb = None
    for rnd in range(1, config.max_rounds + 1):
        stats.rounds = rnd
        t0 = time.perf_counter()
        # (1)+(2) Gröbner basis, closure and map reduction until stable
        while True:
            order = build_order(config.order, tm, plain, config.keep)
            gb = GroebnerBasis(eqs, order)
            gb = closure(gb, tm)
            new_tm = reduce_term_map(tm, gb)
            eqs = list(gb)
            if new_tm == tm:
                break
            tm = new_tm
        # (3) re-reduce inequality generators
        gens = _reduced_generators(gens, gb, config.dedup_products)
        stats.time_groebner += time.perf_counter() - t0
        cone = PolynomialCone(gb, gens, order)
        # (4) consequence finding
        t0 = time.perf_counter()
        new_eqs, new_ineqs = find_consequences(full, cone)
        stats.time_consequences += time.perf_counter() - t0
        added_eq = False
        for p in new_eqs:
            if not gb.contains(p):
                eqs.append(p)
                added_eq = True
        known = {_gen_key(g.poly, g.strict) for g in gens}
        fresh = []
        for p, strict in new_ineqs:
            k = _gen_key(p, strict)
            if k not in known:
                known.add(k)
                fresh.append((p.primitive(), strict))
        # (5) products
        t0 = time.perf_counter()
        if fresh:
            gens = _extend_with_products(gens, fresh, N, gb, config.dedup_products)
        stats.time_products += time.perf_counter() - t0
        if not added_eq and not fresh:
            break
    cone = PolynomialCone(gb, gens, order)
    stats.c_eq = len(gb)
    stats.c_ineq = len(gens)
    monos = {()}
    for g in gens:
        monos.update(g.poly.terms)
    stats.monomials = len(monos)
    stats.time_total = time.perf_counter() - start
    return SaturationResult(cone, tm, full, obj, stats, plain)


def _extend_with_products(gens: List[Generator], fresh: List[Tuple[Poly, bool]], N: int,
                          gb: GroebnerBasis, dedup_products: bool = False) -> List[Generator]:
    base = [g for g in gens if g.depth == 1]
    items = [(g.poly, g.strict, False) for g in base] + [(p, s, True) for p, s in fresh]
    known = {_gen_key(g.poly, g.strict) for g in gens}
    out = list(gens)

    def emit(p: Poly, strict: bool, depth: int):
        if p.is_constant():
            c = p.constant_term()
            if c < 0 or (c == 0 and strict):
                raise InconsistentAssumptions("a product of non-negative facts is negative")
            return
        k = _gen_key(p, strict)
        if depth > 1 and not dedup_products:
            out.append(Generator(k[0], strict, depth))
            return
        if k in known:
            return
        known.add(k)
        out.append(Generator(k[0], strict, depth))

    for p, s in fresh:
        emit(p, s, 1)

    def grow(start: int, prod: Poly, strict: bool, depth: int, has_new: bool):
        for i in range(start, len(items)):
            p, s, is_new = items[i]
            q = gb.reduce(prod * p)
            st = strict and s
            nh = has_new or is_new
            if depth >= 1 and nh:
                emit(q, st, depth + 1)
            if depth + 1 < N:
                grow(i, q, st, depth + 1, nh)

    if N >= 2:
        grow(0, Poly.const(1), True, 0, False)
    return out
