"""Exact rationals and delta-rationals.

Rationals are plain :class:`fractions.Fraction` values, which are always kept
in lowest terms with a positive denominator.  A :class:`DeltaRational` is a
pair ``standard + delta_coefficient * d`` where ``d`` is a positive
infinitesimal; the simplex uses them to represent models of strict bounds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(value: RationalLike) -> Fraction:
    """Coerce ints, fractions and ``"p/q"`` / decimal strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"not a rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    """Render as ``p/q``, or ``p`` when the denominator is one."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_arith(op: str, a: RationalLike, b: RationalLike | None = None):
    """Exact field operation; ``cmp`` returns -1, 0 or 1.

    Division by zero raises :class:`ZeroDivisionError`.
    """
    a = rat(a)
    if op == "neg":
        return -a
    b = rat(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    if op == "cmp":
        return (a > b) - (a < b)
    raise ValueError(f"unknown rational operation {op!r}")


class DeltaRational:
    """``standard + delta * d`` for a symbolic positive infinitesimal ``d``."""

    __slots__ = ("standard", "delta")

    def __init__(self, standard: RationalLike = 0, delta: RationalLike = 0):
        self.standard = rat(standard)
        self.delta = rat(delta)

    @classmethod
    def _raw(cls, standard: Fraction, delta: Fraction) -> "DeltaRational":
        obj = object.__new__(cls)
        obj.standard = standard
        obj.delta = delta
        return obj

    def __add__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational._raw(self.standard + other.standard, self.delta + other.delta)

    def __sub__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational._raw(self.standard - other.standard, self.delta - other.delta)

    def __neg__(self) -> "DeltaRational":
        return DeltaRational._raw(-self.standard, -self.delta)

    def scale(self, k: Fraction) -> "DeltaRational":
        return DeltaRational._raw(self.standard * k, self.delta * k)

    def __mul__(self, k):
        if isinstance(k, DeltaRational):
            raise TypeError("delta-rationals only scale by rationals")
        return self.scale(rat(k))

    __rmul__ = __mul__

    def _key(self):
        return (self.standard, self.delta)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeltaRational):
            return NotImplemented
        return self.standard == other.standard and self.delta == other.delta

    def __hash__(self) -> int:
        return hash((self.standard, self.delta))

    def __lt__(self, other: "DeltaRational") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "DeltaRational") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "DeltaRational") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "DeltaRational") -> bool:
        return self._key() >= other._key()

    def concretize(self, delta_value: Fraction) -> Fraction:
        return self.standard + self.delta * delta_value

    def __repr__(self) -> str:
        return f"DeltaRational({format_rational(self.standard)}, {format_rational(self.delta)})"

    def __str__(self) -> str:
        if self.delta == 0:
            return format_rational(self.standard)
        return f"{format_rational(self.standard)}{'+' if self.delta > 0 else '-'}{format_rational(abs(self.delta))}d"


def delta_cmp(a: DeltaRational, b: DeltaRational) -> int:
    """Lexicographic comparison on (standard, delta): -1, 0 or 1."""
    ka, kb = a._key(), b._key()
    return (ka > kb) - (ka < kb)
