"""Sparse multivariate polynomials with exact rational coefficients.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable
name, with no zero exponents; ``()`` is the monomial 1.  A :class:`Poly` maps
monomials to non-zero :class:`~fractions.Fraction` coefficients.

Monomial orders are represented by :class:`MonomialOrder`, which turns a
monomial into a sort key (larger key means larger monomial).  Besides the
classical lex, deglex and grevlex orders it implements the effective-degree
order, which ranks a monomial by how much of it is made of variables outside
a keep-set, looking through a foreign-function map ``u -> f(p)`` so that a
fresh variable is as good or bad as the leading part of its argument.

Ties left by the effective-degree pair are broken first by the nesting level
of foreign-function variables (so ``u`` always beats the monomials of its own
argument) and then by grevlex over a variable priority list.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

Monomial = Tuple[Tuple[str, int], ...]
ONE_MONO: Monomial = ()


# ---------------------------------------------------------------- monomials

def mono(*pairs) -> Monomial:
    """Build a monomial from ``("x", 2), ("y", 1)`` style pairs or names."""
    exps: Dict[str, int] = {}
    for p in pairs:
        if isinstance(p, str):
            exps[p] = exps.get(p, 0) + 1
        else:
            v, e = p
            exps[v] = exps.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in exps.items() if e))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True when ``a`` divides ``b``."""
    if len(a) > len(b):
        return False
    db = dict(b)
    for v, e in a:
        if db.get(v, 0) < e:
            return False
    return True


def mono_div(b: Monomial, a: Monomial) -> Monomial:
    """``b / a``; the caller guarantees divisibility."""
    da = dict(a)
    out = []
    for v, e in b:
        r = e - da.get(v, 0)
        if r:
            out.append((v, r))
    return tuple(out)


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for v, e in b:
        if d.get(v, 0) < e:
            d[v] = e
    return tuple(sorted(d.items()))


def mono_gcd_is_one(a: Monomial, b: Monomial) -> bool:
    if not a or not b:
        return True
    vb = {v for v, _ in b}
    return not any(v in vb for v, _ in a)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_vars(m: Monomial) -> Tuple[str, ...]:
    return tuple(v for v, _ in m)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


# -------------------------------------------------------------- polynomials

def _coerce(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    """Immutable-by-convention polynomial ``{monomial: coefficient}``."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Fraction]] = None):
        self.terms: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = _coerce(c)
                if c:
                    self.terms[m] = c
        self._hash = None

    @classmethod
    def _wrap(cls, terms: Dict[Monomial, Fraction]) -> "Poly":
        p = object.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        c = _coerce(c)
        return cls._wrap({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls._wrap({((name, 1),): Fraction(1)})

    @classmethod
    def monomial(cls, m: Monomial, c=1) -> "Poly":
        c = _coerce(c)
        return cls._wrap({m: c} if c else {})

    # arithmetic
    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s += c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._wrap(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._wrap({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = -c
            else:
                s -= c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._wrap(out)

    def __rsub__(self, other) -> "Poly":
        return Poly.const(other) - self

    def scale(self, k) -> "Poly":
        k = _coerce(k)
        if not k:
            return Poly._wrap({})
        return Poly._wrap({m: c * k for m, c in self.terms.items()})

    def mul_term(self, m: Monomial, k: Fraction) -> "Poly":
        if not k:
            return Poly._wrap({})
        return Poly._wrap({mono_mul(m, mm): c * k for mm, c in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly._wrap(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # inspection
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def coeff(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def monomials(self) -> Iterator[Monomial]:
        return iter(self.terms)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def evaluate(self, env: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for x, e in m:
                v *= env[x] ** e
            total += v
        return total

    def substitute(self, subst: Mapping[str, "Poly"]) -> "Poly":
        """Replace variables by polynomials."""
        out = Poly()
        cache: Dict[Tuple[str, int], Poly] = {}
        for m, c in self.terms.items():
            term = Poly.const(c)
            rest = []
            for v, e in m:
                if v in subst:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = subst[v] ** e
                    term = term * cache[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term.mul_term(tuple(rest), Fraction(1))
            out = out + term
        return out

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` having coprime integer coefficients."""
        from math import gcd

        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        """Divide by the positive content (keeps the sign of every term)."""
        c = self.content()
        if c == 1:
            return self
        return self.scale(1 / c)

    def key(self) -> frozenset:
        return frozenset(self.terms.items())

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def to_str(self, order: Optional["MonomialOrder"] = None) -> str:
        if not self.terms:
            return "0"
        if order is None:
            order = MonomialOrder("grevlex", sorted(self.variables()))
        parts = []
        for m in order.sorted_desc(self.terms):
            c = self.terms[m]
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            if not m:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono_str(m)
            else:
                body = f"{_fmt_coeff(a)}*{mono_str(m)}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r})"


def _fmt_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def poly_arith(op: str, a: Poly, b) -> Poly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown polynomial operation {op!r}")


def parse_poly(text: str) -> Poly:
    """Parse ``x^2 - 2*x + 1/2*y`` style text (no function symbols)."""
    from .syntax import parse_term, term_to_poly

    return term_to_poly(parse_term(text))


# ---------------------------------------------------------- effective degree

EffDeg = Tuple[int, int]
ForeignMap = Mapping[str, Tuple[str, Poly]]


def effective_degree(tm: ForeignMap, keep: Iterable[str], m: Monomial,
                     _memo: Optional[Dict[str, EffDeg]] = None) -> EffDeg:
    """``(bad, good)`` weight of a monomial; see the module docstring."""
    keep = keep if isinstance(keep, (set, frozenset)) else set(keep)
    memo = {} if _memo is None else _memo
    bad = good = 0
    for v, e in m:
        b, g = _var_effdeg(tm, keep, v, memo, set())
        bad += b * e
        good += g * e
    return (bad, good)


def _var_effdeg(tm, keep, v, memo, active) -> EffDeg:
    hit = memo.get(v)
    if hit is not None:
        return hit
    if v not in tm:
        res = (0, 1) if v in keep else (1, 0)
    else:
        if v in active:
            raise ValueError(f"cyclic foreign-function map at {v}")
        active.add(v)
        _, arg = tm[v]
        res = (0, 0)
        for mm in arg.terms:
            bad = good = 0
            for w, e in mm:
                b, g = _var_effdeg(tm, keep, w, memo, active)
                bad += b * e
                good += g * e
            if (bad, good) > res:
                res = (bad, good)
        active.discard(v)
    memo[v] = res
    return res


def map_levels(tm: ForeignMap) -> Dict[str, int]:
    """Nesting level: 0 for plain variables, 1 + max over the argument otherwise."""
    levels: Dict[str, int] = {}

    def level(v, active):
        if v in levels:
            return levels[v]
        if v not in tm:
            return 0
        if v in active:
            raise ValueError(f"cyclic foreign-function map at {v}")
        active.add(v)
        lv = 1 + max((level(w, active) for w in tm[v][1].variables()), default=0)
        active.discard(v)
        levels[v] = lv
        return lv

    for u in tm:
        level(u, set())
    return levels


# ------------------------------------------------------------------- orders

ORDER_KINDS = ("lex", "deglex", "grevlex", "effective_degree")


class MonomialOrder:
    """A total, multiplicative monomial order with 1 as its minimum.

    ``variables`` lists every variable the order may meet, highest priority
    first.  For ``effective_degree`` a foreign-function map and keep-set are
    also required; the map is snapshotted, so rebuild the order whenever the
    map changes.
    """

    def __init__(self, kind: str, variables: Sequence[str],
                 tm: Optional[ForeignMap] = None, keep: Iterable[str] = ()):
        if kind == "effdeg":
            kind = "effective_degree"
        if kind not in ORDER_KINDS:
            raise ValueError(f"unknown monomial order {kind!r}")
        self.kind = kind
        self.variables = list(dict.fromkeys(variables))
        self.rank = {v: i for i, v in enumerate(self.variables)}
        self.tm = dict(tm or {})
        self.keep = frozenset(keep)
        self._cache: Dict[Monomial, tuple] = {}
        if kind == "effective_degree":
            self._levels = map_levels(self.tm)
            self._max_level = max(self._levels.values(), default=0)
            memo: Dict[str, EffDeg] = {}
            self._vdeg = {v: _var_effdeg(self.tm, self.keep, v, memo, set())
                          for v in self.variables}

    def _index(self, v: str) -> int:
        try:
            return self.rank[v]
        except KeyError:
            raise ValueError(f"variable {v!r} is not covered by the monomial order") from None

    def key(self, m: Monomial) -> tuple:
        k = self._cache.get(m)
        if k is not None:
            return k
        n = len(self.variables)
        exps = [0] * n
        for v, e in m:
            exps[self._index(v)] = e
        kind = self.kind
        if kind == "lex":
            k = tuple(exps)
        elif kind == "deglex":
            k = (sum(exps), tuple(exps))
        else:
            grev = (sum(exps), tuple(-exps[i] for i in range(n - 1, -1, -1)))
            if kind == "grevlex":
                k = grev
            else:
                bad = good = 0
                levels = [0] * (self._max_level + 1)
                for v, e in m:
                    b, g = self._vdeg[v]
                    bad += b * e
                    good += g * e
                    levels[self._levels.get(v, 0)] += e
                k = (bad, good, tuple(reversed(levels[1:])), grev)
        self._cache[m] = k
        return k

    def compare(self, a: Monomial, b: Monomial) -> int:
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def effdeg(self, m: Monomial) -> EffDeg:
        if self.kind != "effective_degree":
            raise ValueError("effective degree needs an effective_degree order")
        bad = good = 0
        for v, e in m:
            b, g = self._vdeg[v] if v in self._vdeg else _var_effdeg(self.tm, self.keep, v, {}, set())
            bad += b * e
            good += g * e
        return (bad, good)

    def leading(self, p: Poly) -> Tuple[Monomial, Fraction]:
        if not p.terms:
            raise ValueError("zero polynomial has no leading monomial")
        m = max(p.terms, key=self.key)
        return m, p.terms[m]

    def lm(self, p: Poly) -> Monomial:
        return max(p.terms, key=self.key)

    def sorted_desc(self, monos: Iterable[Monomial]) -> list:
        return sorted(monos, key=self.key, reverse=True)

    def poly_key(self, p: Poly) -> tuple:
        """Order polynomials by their descending monomial sequence, then coefficients."""
        ms = self.sorted_desc(p.terms)
        return (tuple(self.key(m) for m in ms), tuple(p.terms[m] for m in ms))

    def extended(self, more: Iterable[str]) -> "MonomialOrder":
        extra = [v for v in more if v not in self.rank]
        if not extra:
            return self
        return MonomialOrder(self.kind, self.variables + sorted(extra), self.tm, self.keep)

    def __repr__(self) -> str:
        return f"MonomialOrder({self.kind!r}, {self.variables!r})"


def compare_monomials(order: MonomialOrder, a: Monomial, b: Monomial) -> int:
    return order.compare(a, b)


def leading_monomial(p: Poly, order: MonomialOrder) -> Tuple[Monomial, Fraction]:
    return order.leading(p)
