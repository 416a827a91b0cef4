"""Exact arithmetic in K = Frac(Q[r, a] / (a^2 + r^2 - 1)).

An element is stored canonically as ``(p + q*a) / d`` with p, q, d in Q[r],
d monic and gcd(p, q, d) = 1. Since 1 - r^2 is not a square in Q(r), K is a
quadratic field extension of Q(r) and inverses are obtained by multiplying
with the conjugate ``p - q*a``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction]


class Poly:
    """Dense univariate polynomial over Q in the variable r."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @staticmethod
    def const(x: Number) -> "Poly":
        return Poly((x,))

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def __bool__(self) -> bool:
        return bool(self.c)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self) -> int:
        return hash(self.c)

    def __repr__(self) -> str:
        return f"Poly({[str(x) for x in self.c]})"

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        return Poly(tuple(x + y for x, y in zip(a, b)) + a[len(b):])

    def __neg__(self) -> "Poly":
        return Poly(-x for x in self.c)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.c, other.c
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly(out)

    def scale(self, k: Number) -> "Poly":
        return Poly(k * x for x in self.c)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        db, lead = other.degree, other.c[-1]
        quot = [Fraction(0)] * max(len(rem) - db, 0)
        for i in range(len(rem) - db - 1, -1, -1):
            f = rem[i + db] / lead
            quot[i] = f
            if f:
                for j, y in enumerate(other.c):
                    rem[i + j] -= f * y
        return Poly(quot), Poly(rem[:db])

    def monic(self) -> "Poly":
        return self.scale(1 / self.c[-1]) if self.c else self

    def __call__(self, x):
        acc = 0
        for coef in reversed(self.c):
            acc = acc * x + coef
        return acc


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, a.divmod(b)[1]
    return a.monic() if a else Poly.const(1)


ONE_MINUS_R2 = Poly((1, 0, -1))
_ZERO, _ONE = Poly(), Poly.const(1)


class FieldElement:
    """Element (p + q a_r) / d of K, always stored in canonical form."""

    __slots__ = ("p", "q", "d", "_hash")

    def __init__(self, p: Poly, q: Poly = _ZERO, d: Poly = _ONE):
        if not d:
            raise ZeroDivisionError("zero denominator")
        if not p and not q:
            self.p, self.q, self.d = _ZERO, _ZERO, _ONE
        else:
            g = poly_gcd(poly_gcd(p, q), d) if (p and q) else poly_gcd(p or q, d)
            if g.degree > 0:
                p, q, d = p.divmod(g)[0], q.divmod(g)[0], d.divmod(g)[0]
            lead = d.c[-1]
            if lead != 1:
                p, q, d = p.scale(1 / lead), q.scale(1 / lead), d.scale(1 / lead)
            self.p, self.q, self.d = p, q, d
        self._hash = None

    # constructors -------------------------------------------------------
    @staticmethod
    def const(x: Number) -> "FieldElement":
        return FieldElement(Poly.const(x))

    @staticmethod
    def r() -> "FieldElement":
        return FieldElement(Poly((0, 1)))

    @staticmethod
    def a() -> "FieldElement":
        return FieldElement(_ZERO, _ONE)

    # predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.p and not self.q

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = FieldElement.const(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.p == other.p and self.q == other.q and self.d == other.d

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.p, self.q, self.d))
        return self._hash

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "FieldElement":
        other = _lift(other)
        if self.d == other.d:
            return FieldElement(self.p + other.p, self.q + other.q, self.d)
        return FieldElement(self.p * other.d + other.p * self.d,
                            self.q * other.d + other.q * self.d, self.d * other.d)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        out = object.__new__(FieldElement)
        out.p, out.q, out.d, out._hash = -self.p, -self.q, self.d, None
        return out

    def __sub__(self, other) -> "FieldElement":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "FieldElement":
        return _lift(other) + (-self)

    def __mul__(self, other) -> "FieldElement":
        other = _lift(other)
        p = self.p * other.p + self.q * other.q * ONE_MINUS_R2
        q = self.p * other.q + self.q * other.p
        return FieldElement(p, q, self.d * other.d)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in K")
        norm = self.p * self.p - self.q * self.q * ONE_MINUS_R2
        return FieldElement(self.d * self.p, -(self.d * self.q), norm)

    def __truediv__(self, other) -> "FieldElement":
        return self * _lift(other).inverse()

    def __rtruediv__(self, other) -> "FieldElement":
        return _lift(other) * self.inverse()

    def __pow__(self, k: int) -> "FieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = FieldElement.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # evaluation and display ----------------------------------------------
    def evaluate(self, r: float) -> float:
        a = (1.0 - r * r) ** 0.5
        return (float(self.p(r)) + float(self.q(r)) * a) / float(self.d(r))

    def __repr__(self) -> str:
        return f"FieldElement({self})"

    def __str__(self) -> str:
        def fmt(poly: Poly) -> str:
            terms = []
            for k, c in enumerate(poly.c):
                if c:
                    terms.append(f"{c}" if k == 0 else f"{c}*r" if k == 1 else f"{c}*r^{k}")
            return " + ".join(terms) or "0"

        num = []
        if self.p:
            num.append(f"({fmt(self.p)})")
        if self.q:
            num.append(f"({fmt(self.q)})*a")
        text = " + ".join(num) or "0"
        return text if self.d == _ONE else f"[{text}] / ({fmt(self.d)})"


def _lift(x) -> FieldElement:
    if isinstance(x, FieldElement):
        return x
    if isinstance(x, (int, Fraction)):
        return FieldElement.const(x)
    raise TypeError(f"cannot lift {type(x).__name__} into K")


ZERO = FieldElement(_ZERO)
ONE = FieldElement(_ONE)
