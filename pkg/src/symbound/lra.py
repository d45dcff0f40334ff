"""Exact linear rational arithmetic: a general simplex over delta-rationals.

The solver follows the usual tableau design for SMT linear arithmetic:
every distinct linear form gets a slack variable defined by a tableau row,
and atoms become lower/upper bounds on variables.  Strict bounds use a
symbolic infinitesimal (see :class:`~symbound.numeric.DeltaRational`), so a
model of ``x > 0`` is ``x = d``.  Bounds live on a trail, which makes
``push``/``pop`` cheap, and conflicts come back as Farkas certificates over
the asserted atoms.

Disjunctions (from implications in the input) are handled by a small DPLL
search: the conjunctive part is solved first and a disjunction is only split
on when the current model falsifies it.

    >>> x = LinearAtom({"x": 1}, 0, ">")
    >>> check_sat([x]).model["x"]
    DeltaRational(0, 1)
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

from .numeric import DeltaRational

Dimension = Hashable
_ZERO = Fraction(0)
_DZERO = DeltaRational(0, 0)


class LinearAtom:
    """``sum(coeffs[d] * d) + constant  rel  0`` with ``rel`` in ``>=``, ``>``, ``=``."""

    __slots__ = ("coeffs", "constant", "rel", "_key", "_hash")

    def __init__(self, coeffs: Dict[Dimension, Fraction], constant=0, rel: str = ">="):
        c = {d: Fraction(v) for d, v in coeffs.items() if v}
        k = Fraction(constant)
        if rel in ("<=", "<"):
            c = {d: -v for d, v in c.items()}
            k = -k
            rel = ">=" if rel == "<=" else ">"
        if rel not in (">=", ">", "="):
            raise ValueError(f"unsupported relation {rel!r}")
        self.coeffs = c
        self.constant = k
        self.rel = rel
        self._key = None
        self._hash = None

    @property
    def strict(self) -> bool:
        return self.rel == ">"

    def is_trivial(self) -> bool:
        return not self.coeffs

    def constant_truth(self) -> bool:
        k = self.constant
        return k >= 0 if self.rel == ">=" else (k > 0 if self.rel == ">" else k == 0)

    def negations(self) -> List["LinearAtom"]:
        """Atoms whose disjunction is the negation of this atom."""
        neg = {d: -v for d, v in self.coeffs.items()}
        if self.rel == ">=":
            return [LinearAtom(neg, -self.constant, ">")]
        if self.rel == ">":
            return [LinearAtom(neg, -self.constant, ">=")]
        return [LinearAtom(self.coeffs, self.constant, ">"), LinearAtom(neg, -self.constant, ">")]

    def value(self, model: Dict[Dimension, DeltaRational]) -> DeltaRational:
        s = DeltaRational(self.constant, 0)
        for d, a in self.coeffs.items():
            v = model.get(d)
            if v is not None:
                s = s + v.scale(a)
        return s

    def holds(self, model) -> bool:
        v = self.value(model)
        if self.rel == ">=":
            return v >= _DZERO
        if self.rel == ">":
            return v > _DZERO
        return v == _DZERO

    def holds_rational(self, point: Dict[Dimension, Fraction]) -> bool:
        s = self.constant + sum((a * point.get(d, _ZERO) for d, a in self.coeffs.items()), _ZERO)
        return s >= 0 if self.rel == ">=" else (s > 0 if self.rel == ">" else s == 0)

    def key(self):
        if self._key is None:
            self._key = (frozenset(self.coeffs.items()), self.constant, self.rel)
        return self._key

    def __eq__(self, other):
        return isinstance(other, LinearAtom) and self.key() == other.key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self):
        terms = " + ".join(f"{v}*{d}" for d, v in self.coeffs.items()) or "0"
        return f"LinearAtom({terms} + {self.constant} {self.rel} 0)"


@dataclass(frozen=True)
class Conj:
    args: Tuple["LinearFormula", ...]


@dataclass(frozen=True)
class Disj:
    args: Tuple["LinearFormula", ...]


LinearFormula = Union[LinearAtom, Conj, Disj]


@dataclass
class LinearSystem:
    """A conjunction of atoms and NNF formulas over atoms."""
    items: List[LinearFormula] = field(default_factory=list)

    def add(self, item: LinearFormula) -> None:
        self.items.append(item)

    def atoms(self) -> List[LinearAtom]:
        out = []
        for it in self.items:
            out.extend(_atoms_of(it))
        return out


def _atoms_of(f) -> List[LinearAtom]:
    if isinstance(f, LinearAtom):
        return [f]
    out = []
    for a in f.args:
        out.extend(_atoms_of(a))
    return out


def formula_holds(f: LinearFormula, model) -> bool:
    if isinstance(f, LinearAtom):
        return f.holds(model)
    if isinstance(f, Conj):
        return all(formula_holds(a, model) for a in f.args)
    return any(formula_holds(a, model) for a in f.args)


# ------------------------------------------------------------------ simplex

class _Conflict(Exception):
    def __init__(self, certificate):
        self.certificate = certificate


class Simplex:
    """Incremental general simplex with bound trail and Farkas explanations.

    A *reason* attached to a bound is a pair ``(tag, factor)``: the bound
    constraint ``x - l >= 0`` (or ``u - x >= 0``) equals ``factor`` times the
    caller's constraint ``tag``.
    """

    def __init__(self):
        self.index: Dict[Dimension, int] = {}
        self.dims: List[Optional[Dimension]] = []
        self.rows: Dict[int, Dict[int, Fraction]] = {}
        self.cols: Dict[int, set] = defaultdict(set)
        self.value: List[DeltaRational] = []
        self.lower: List[Optional[Tuple[DeltaRational, tuple]]] = []
        self.upper: List[Optional[Tuple[DeltaRational, tuple]]] = []
        self.forms: Dict[tuple, int] = {}
        self.trail: List[Tuple[int, bool, object]] = []
        self.marks: List[int] = []
        self.pivots = 0

    # variables
    def _new_var(self, dim) -> int:
        v = len(self.value)
        self.dims.append(dim)
        self.value.append(_DZERO)
        self.lower.append(None)
        self.upper.append(None)
        return v

    def var(self, dim: Dimension) -> int:
        v = self.index.get(dim)
        if v is None:
            v = self._new_var(dim)
            self.index[dim] = v
        return v

    def form_var(self, coeffs: Dict[Dimension, Fraction]) -> Tuple[int, Fraction]:
        """Variable ``s`` and scale ``k`` with ``sum(coeffs) = k * s``."""
        items = sorted(((self.var(d), a) for d, a in coeffs.items()), key=lambda t: t[0])
        k = items[0][1]
        if len(items) == 1:
            return items[0][0], k
        norm = tuple((v, a / k) for v, a in items)
        s = self.forms.get(norm)
        if s is None:
            s = self._new_var(None)
            row: Dict[int, Fraction] = {}
            val = _DZERO
            for v, a in norm:
                if v in self.rows:
                    for w, b in self.rows[v].items():
                        nv = row.get(w, _ZERO) + a * b
                        if nv:
                            row[w] = nv
                        else:
                            row.pop(w, None)
                else:
                    nv = row.get(v, _ZERO) + a
                    if nv:
                        row[v] = nv
                    else:
                        row.pop(v, None)
                val = val + self.value[v].scale(a)
            self.rows[s] = row
            for w in row:
                self.cols[w].add(s)
            self.value[s] = val
            self.forms[norm] = s
        return s, k

    # trail
    def push(self) -> None:
        self.marks.append(len(self.trail))

    def pop(self) -> None:
        mark = self.marks.pop()
        while len(self.trail) > mark:
            v, is_lower, old = self.trail.pop()
            if is_lower:
                self.lower[v] = old
            else:
                self.upper[v] = old

    # bounds
    def assert_lower(self, v: int, bound: DeltaRational, reason: tuple) -> None:
        cur = self.lower[v]
        if cur is not None and cur[0] >= bound:
            return
        up = self.upper[v]
        if up is not None and bound > up[0]:
            raise _Conflict(_merge([(reason, 1), (up[1], 1)]))
        self.trail.append((v, True, cur))
        self.lower[v] = (bound, reason)
        if v not in self.rows and self.value[v] < bound:
            self._update(v, bound)

    def assert_upper(self, v: int, bound: DeltaRational, reason: tuple) -> None:
        cur = self.upper[v]
        if cur is not None and cur[0] <= bound:
            return
        lo = self.lower[v]
        if lo is not None and bound < lo[0]:
            raise _Conflict(_merge([(reason, 1), (lo[1], 1)]))
        self.trail.append((v, False, cur))
        self.upper[v] = (bound, reason)
        if v not in self.rows and self.value[v] > bound:
            self._update(v, bound)

    def assert_atom(self, atom: LinearAtom, tag) -> None:
        if not atom.coeffs:
            if not atom.constant_truth():
                raise _Conflict({tag: Fraction(1)})
            return
        v, k = self.form_var(atom.coeffs)
        bound = -atom.constant / k
        factor = 1 / abs(k)
        if atom.rel == "=":
            b = DeltaRational(bound, 0)
            self.assert_lower(v, b, ((tag, factor),))
            self.assert_upper(v, b, ((tag, -factor),))
            return
        d = 1 if atom.rel == ">" else 0
        if k > 0:
            self.assert_lower(v, DeltaRational(bound, d), ((tag, factor),))
        else:
            self.assert_upper(v, DeltaRational(bound, -d), ((tag, factor),))

    # core
    def _update(self, v: int, new: DeltaRational) -> None:
        theta = new - self.value[v]
        value = self.value
        rows = self.rows
        for b in self.cols.get(v, ()):
            value[b] = value[b] + theta.scale(rows[b][v])
        value[v] = new

    def _pivot(self, r: int, s: int) -> None:
        rows, cols = self.rows, self.cols
        row = rows.pop(r)
        a = row.pop(s)
        for w in row:
            cols[w].discard(r)
        cols[s].discard(r)
        inv = 1 / a
        new_row = {w: -c * inv for w, c in row.items()}
        new_row[r] = inv
        for b in list(cols.get(s, ())):
            brow = rows[b]
            c = brow.pop(s)
            for w, cw in new_row.items():
                nv = brow.get(w, _ZERO) + c * cw
                if nv:
                    if w not in brow:
                        cols[w].add(b)
                    brow[w] = nv
                else:
                    if w in brow:
                        del brow[w]
                        cols[w].discard(b)
        cols.pop(s, None)
        rows[s] = new_row
        for w in new_row:
            cols[w].add(s)
        self.pivots += 1

    def _pivot_and_update(self, b: int, n: int, target: DeltaRational) -> None:
        a = self.rows[b][n]
        theta = (target - self.value[b]).scale(1 / a)
        self.value[b] = target
        self.value[n] = self.value[n] + theta
        rows = self.rows
        for k in self.cols.get(n, ()):
            if k != b:
                self.value[k] = self.value[k] + theta.scale(rows[k][n])
        self._pivot(b, n)

    def check(self) -> None:
        """Restore feasibility or raise :class:`_Conflict` (Bland's rule)."""
        value, lower, upper, rows = self.value, self.lower, self.upper, self.rows
        while True:
            bad = None
            for b in rows:
                if bad is not None and b > bad:
                    continue
                lo = lower[b]
                if lo is not None and value[b] < lo[0]:
                    bad, below = b, True
                    continue
                up = upper[b]
                if up is not None and value[b] > up[0]:
                    bad, below = b, False
            if bad is None:
                return
            row = rows[bad]
            entering = None
            for n in sorted(row):
                a = row[n]
                if below == (a > 0):
                    up = upper[n]
                    if up is None or value[n] < up[0]:
                        entering = n
                        break
                else:
                    lo = lower[n]
                    if lo is None or value[n] > lo[0]:
                        entering = n
                        break
            if entering is None:
                raise _Conflict(self._explain(bad, below))
            target = lower[bad][0] if below else upper[bad][0]
            self._pivot_and_update(bad, entering, target)

    def _explain(self, b: int, below: bool):
        own = self.lower[b] if below else self.upper[b]
        parts = [(own[1], Fraction(1))]
        for n, a in self.rows[b].items():
            if below == (a > 0):
                parts.append((self.upper[n][1], abs(a)))
            else:
                parts.append((self.lower[n][1], abs(a)))
        return _merge(parts)

    # models
    def assignment(self) -> Dict[Dimension, DeltaRational]:
        return {d: self.value[v] for d, v in self.index.items()}

    def push_off_boundary(self) -> None:
        """Move non-basic variables into the interior of their feasible range.

        Each non-basic variable sitting on a bound is moved half way towards
        the nearest blocking bound (or one unit if nothing blocks), which keeps
        the tableau feasible and makes non-binding atoms strictly true.
        """
        value, lower, upper, rows = self.value, self.lower, self.upper, self.rows
        half = Fraction(1, 2)
        for n in range(len(value)):
            if n in rows:
                continue
            lo, up = lower[n], upper[n]
            if lo is not None and up is not None and lo[0] == up[0]:
                continue
            if lo is not None and value[n] == lo[0]:
                direction = 1
            elif up is not None and value[n] == up[0]:
                direction = -1
            else:
                continue
            limit = None
            own = up if direction > 0 else lo
            if own is not None:
                limit = (own[0] - value[n]) if direction > 0 else (value[n] - own[0])
            for b in self.cols.get(n, ()):
                a = rows[b][n] * direction
                if a > 0:
                    ub = upper[b]
                    if ub is None:
                        continue
                    room = (ub[0] - value[b]).scale(1 / a)
                else:
                    lb = lower[b]
                    if lb is None:
                        continue
                    room = (value[b] - lb[0]).scale(-1 / a)
                if limit is None or room < limit:
                    limit = room
            if limit is None:
                step = DeltaRational(1, 0)
            elif limit <= _DZERO:
                continue
            else:
                step = limit.scale(half)
            self._update(n, value[n] + step.scale(direction))

    def delta_value(self) -> Fraction:
        """A positive rational for the infinitesimal under which all bounds hold."""
        delta = Fraction(1)
        for v, val in enumerate(self.value):
            lo, up = self.lower[v], self.upper[v]
            if lo is not None:
                l = lo[0]
                if l.standard < val.standard and l.delta > val.delta:
                    delta = min(delta, (val.standard - l.standard) / (l.delta - val.delta))
            if up is not None:
                u = up[0]
                if val.standard < u.standard and val.delta > u.delta:
                    delta = min(delta, (u.standard - val.standard) / (val.delta - u.delta))
        return delta / 2 if delta < 1 else delta


def _merge(parts) -> Dict[object, Fraction]:
    cert: Dict[object, Fraction] = {}
    for reason, mult in parts:
        for tag, factor in reason:
            cert[tag] = cert.get(tag, _ZERO) + factor * mult
    return {t: c for t, c in cert.items() if c}


# ----------------------------------------------------------------- solver

@dataclass
class CheckResult:
    sat: bool
    model: Optional[Dict[Dimension, DeltaRational]] = None
    certificate: Optional[Dict[int, Fraction]] = None
    delta: Optional[Fraction] = None

    def concrete_model(self) -> Dict[Dimension, Fraction]:
        delta = self.delta or Fraction(1)
        return {d: v.concretize(delta) for d, v in self.model.items()}


class Solver:
    """Assertion-stack solver over atoms and NNF formulas.

    Atoms are tagged with their insertion index so that Farkas certificates
    of purely conjunctive conflicts refer back to them.
    """

    def __init__(self, items: Iterable[LinearFormula] = ()):
        self.simplex = Simplex()
        self.atoms: List[LinearAtom] = []
        self.disjunctions: List[Disj] = []
        self._disj_marks: List[int] = []
        self.inconsistent: Optional[Dict[int, Fraction]] = None
        self._incon_marks: List[Optional[Dict[int, Fraction]]] = []
        for it in items:
            self.add(it)

    def push(self) -> None:
        self.simplex.push()
        self._disj_marks.append(len(self.disjunctions))
        self._incon_marks.append(self.inconsistent)

    def pop(self) -> None:
        self.simplex.pop()
        del self.disjunctions[self._disj_marks.pop():]
        self.inconsistent = self._incon_marks.pop()

    def add(self, item: LinearFormula) -> None:
        if self.inconsistent is not None:
            return
        if isinstance(item, LinearAtom):
            tag = len(self.atoms)
            self.atoms.append(item)
            try:
                self.simplex.assert_atom(item, tag)
            except _Conflict as c:
                self.inconsistent = c.certificate
        elif isinstance(item, Conj):
            for a in item.args:
                self.add(a)
        else:
            args = [a for a in item.args]
            if len(args) == 1:
                self.add(args[0])
            elif not args:
                self.inconsistent = {}
            else:
                # register the forms so that evaluation sees every dimension
                for a in _atoms_of(item):
                    for d in a.coeffs:
                        self.simplex.var(d)
                self.disjunctions.append(Disj(tuple(args)))

    def check(self, interior: bool = False, want_model: bool = True) -> CheckResult:
        if self.inconsistent is not None:
            return CheckResult(False, certificate=self.inconsistent)
        ok, cert = self._search()
        model = delta = None
        if ok and want_model:
            if interior:
                self.simplex.push_off_boundary()
            model = self.simplex.assignment()
            delta = self.simplex.delta_value()
        while self._branch_depth:
            self.pop()
            self._branch_depth -= 1
        if ok:
            return CheckResult(True, model=model, delta=delta)
        return CheckResult(False, certificate=cert)

    _branch_depth = 0

    def _search(self):
        try:
            self.simplex.check()
        except _Conflict as c:
            return False, c.certificate
        model = None
        target = None
        for i in range(len(self.disjunctions)):
            d = self.disjunctions[i]
            if model is None:
                model = self.simplex.assignment()
            if not formula_holds(d, model):
                target = i
                break
        if target is None:
            return True, None
        d = self.disjunctions[target]
        for branch in d.args:
            self.push()
            self._branch_depth += 1
            self.add(branch)
            if self.inconsistent is None:
                ok, _ = self._search()
                if ok:
                    return True, None
            self.pop()
            self._branch_depth -= 1
        return False, None


def _as_items(system) -> List[LinearFormula]:
    if isinstance(system, LinearSystem):
        return list(system.items)
    return list(system)


def check_sat(system, interior: bool = False) -> CheckResult:
    """Satisfiability with a delta-rational model or a Farkas certificate.

    The certificate (for conjunctive systems) maps atom positions to
    multipliers; equality atoms may carry negative multipliers.
    """
    return Solver(_as_items(system)).check(interior)


def entails(system, atom: LinearAtom) -> bool:
    solver = system if isinstance(system, Solver) else Solver(_as_items(system))
    for neg in atom.negations():
        solver.push()
        solver.add(neg)
        res = solver.check(want_model=False)
        solver.pop()
        if res.sat:
            return False
    return True


def entailment_certificate(system: Sequence[LinearAtom], atom: LinearAtom
                           ) -> Optional[Dict[int, Fraction]]:
    """Farkas multipliers for ``system ⊨ atom`` when the goal is an inequality.

    Returns a map from system positions to multipliers plus the key ``"goal"``
    for the negated goal, or None when the entailment fails.
    """
    if atom.rel == "=":
        raise ValueError("certificates are produced for inequality goals")
    items = list(system)
    neg = atom.negations()[0]
    solver = Solver(items + [neg])
    res = solver.check()
    if res.sat:
        return None
    cert = dict(res.certificate)
    goal = cert.pop(len(items), _ZERO)
    cert["goal"] = goal
    return cert


def verify_certificate(atoms: Sequence[LinearAtom], certificate: Dict[int, Fraction]) -> bool:
    """Check that the combination is a contradiction ``0 >= c`` with ``c > 0`` (or strict ``0 > 0``)."""
    total: Dict[Dimension, Fraction] = {}
    const = _ZERO
    strict = False
    for idx, mult in certificate.items():
        a = atoms[idx]
        if a.rel != "=" and mult < 0:
            return False
        for d, c in a.coeffs.items():
            total[d] = total.get(d, _ZERO) + mult * c
        const += mult * a.constant
        if a.rel == ">" and mult > 0:
            strict = True
    if any(total.values()):
        return False
    return const < 0 or (const == 0 and strict)


def houdini_filter(system, candidates: Sequence[LinearAtom]) -> List[LinearAtom]:
    """The candidates entailed by ``system``, found by countermodel elimination."""
    solver = system if isinstance(system, Solver) else Solver(_as_items(system))
    alive = list(range(len(candidates)))
    if not alive:
        return []
    first = solver.check(interior=True)
    if not first.sat:
        return list(candidates)
    alive = [i for i in alive if candidates[i].holds(first.model)]
    decided = set()
    while True:
        todo = [i for i in alive if i not in decided]
        if not todo:
            break
        i = todo[0]
        refuted = None
        for neg in candidates[i].negations():
            solver.push()
            solver.add(neg)
            res = solver.check(interior=True)
            solver.pop()
            if res.sat:
                refuted = res.model
                break
        if refuted is None:
            decided.add(i)
        else:
            alive = [j for j in alive if j in decided or candidates[j].holds(refuted)]
            alive = [j for j in alive if j != i]
    return [candidates[i] for i in alive]
