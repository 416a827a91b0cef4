"""Truncated Laurent series in s with coefficients in K.

A series stores its known coefficients together with ``prec``: the exponent
of the error term, so that the value is ``sum c_m s^m + O(s^prec)``. Exact
(finite) series have ``prec = INF``. Arithmetic propagates ``prec``
conservatively, so a result never claims coefficients it cannot know.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial, inf
from typing import Iterable, Mapping

from .field import FieldElement, ONE, ZERO, _lift

INF = inf


class TruncationError(ArithmeticError):
    """Raised when a requested coefficient lies beyond the tracked precision."""


class SymScalar:
    __slots__ = ("terms", "prec")

    def __init__(self, terms: Mapping[int, FieldElement] | None = None, prec: float = INF):
        clean = {}
        for m, c in (terms or {}).items():
            c = _lift(c)
            if m < prec and not c.is_zero():
                clean[int(m)] = c
        self.terms = clean
        self.prec = prec

    # constructors -------------------------------------------------------
    @staticmethod
    def const(c) -> "SymScalar":
        return SymScalar({0: _lift(c)})

    @staticmethod
    def monomial(c, m: int) -> "SymScalar":
        return SymScalar({m: _lift(c)})

    @staticmethod
    def zero(prec: float = INF) -> "SymScalar":
        return SymScalar({}, prec)

    # inspection ---------------------------------------------------------
    @property
    def valuation(self) -> float:
        """Lowest exponent with a known nonzero coefficient (``prec`` if none)."""
        return min(self.terms) if self.terms else self.prec

    def is_exact(self) -> bool:
        return self.prec == INF

    def is_zero(self) -> bool:
        """True when no nonzero coefficient is known (exact zero or pure O-term)."""
        return not self.terms

    def coeff(self, m: int) -> FieldElement:
        if m >= self.prec:
            raise TruncationError(f"coefficient of s^{m} is beyond the truncation O(s^{self.prec})")
        return self.terms.get(m, ZERO)

    def truncate(self, prec: float) -> "SymScalar":
        return SymScalar(self.terms, min(self.prec, prec))

    def part_below(self, m: int) -> "SymScalar":
        """Exact polynomial made of the terms of exponent < m (requires prec >= m)."""
        if m > self.prec:
            raise TruncationError(f"terms below s^{m} are not all known (O(s^{self.prec}))")
        return SymScalar({k: c for k, c in self.terms.items() if k < m})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymScalar):
            other = SymScalar.const(other)
        return self.prec == other.prec and self.terms == other.terms

    def agrees_with(self, other: "SymScalar") -> bool:
        """Equality of all coefficients known on both sides."""
        p = min(self.prec, other.prec)
        return self.truncate(p).terms == other.truncate(p).terms

    def __hash__(self) -> int:
        return hash((self.prec, frozenset(self.terms.items())))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "SymScalar":
        other = _lift_series(other)
        prec = min(self.prec, other.prec)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return SymScalar(out, prec)

    __radd__ = __add__

    def __neg__(self) -> "SymScalar":
        return SymScalar({m: -c for m, c in self.terms.items()}, self.prec)

    def __sub__(self, other) -> "SymScalar":
        return self + (-_lift_series(other))

    def __rsub__(self, other) -> "SymScalar":
        return _lift_series(other) - self

    def __mul__(self, other) -> "SymScalar":
        other = _lift_series(other)
        prec = min(self.prec + other.valuation, other.prec + self.valuation)
        out: dict[int, FieldElement] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 + m2
                if m < prec:
                    out[m] = out[m] + c1 * c2 if m in out else c1 * c2
        return SymScalar(out, prec)

    __rmul__ = __mul__

    def inverse(self, prec: float | None = None) -> "SymScalar":
        """Multiplicative inverse.

        Monomials invert exactly. Otherwise the result has precision
        ``prec - 2 v`` (v the valuation); exact multi-term inputs need an
        explicit ``prec`` for the result.
        """
        if not self.terms:
            raise TruncationError("cannot invert a series with no known nonzero coefficient")
        v = self.valuation
        lead = self.terms[v]
        if self.is_exact() and len(self.terms) == 1:
            return SymScalar({-v: lead.inverse()})
        target = self.prec - 2 * v
        if prec is not None:
            target = min(target, prec)
        if target == INF:
            raise TruncationError("inverse of an exact multi-term series needs a precision")
        inv_lead = lead.inverse()
        out: dict[int, FieldElement] = {}
        count = int(target - (-v))
        for k in range(count):
            acc = ZERO
            for j in range(1, k + 1):
                x = self.terms.get(v + j)
                y = out.get(-v + k - j)
                if x is not None and y is not None:
                    acc = acc + x * y
            out[-v + k] = inv_lead if k == 0 else -(inv_lead * acc)
        return SymScalar(out, target)

    def __truediv__(self, other) -> "SymScalar":
        other = _lift_series(other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "SymScalar":
        return _lift_series(other) * self.inverse()

    def __pow__(self, k: int) -> "SymScalar":
        out = SymScalar.const(1)
        for _ in range(k):
            out = out * self
        return out

    # display / numerics ---------------------------------------------------
    def evaluate(self, r: float, s: float) -> float:
        return sum(c.evaluate(r) * s**m for m, c in self.terms.items())

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*s^{m}" for m, c in sorted(self.terms.items())) or "0"
        return body if self.prec == INF else f"{body} + O(s^{self.prec})"


def _lift_series(x) -> SymScalar:
    if isinstance(x, SymScalar):
        return x
    return SymScalar.const(x)


def s() -> SymScalar:
    return SymScalar.monomial(ONE, 1)


def r() -> SymScalar:
    return SymScalar.const(FieldElement.r())


def a_r() -> SymScalar:
    return SymScalar.const(FieldElement.a())


def a_s(order: int) -> SymScalar:
    """sqrt(1 - s^2) expanded through s^order, i.e. with error O(s^(order+1))."""
    terms = {}
    for k in range(order // 2 + 1):
        # binom(1/2, k) (-1)^k s^(2k)
        num = Fraction(1)
        for j in range(k):
            num *= Fraction(1, 2) - j
        terms[2 * k] = FieldElement.const(num / factorial(k) * (-1) ** k)
    return SymScalar(terms, order + 1)


def series_sum(items: Iterable[SymScalar]) -> SymScalar:
    total = SymScalar.zero()
    for x in items:
        total = total + x
    return total


__all__ = ["SymScalar", "TruncationError", "INF", "s", "r", "a_r", "a_s", "series_sum"]
