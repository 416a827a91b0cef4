"""Exact arithmetic in K[s, 1/s, a_s] with a_s^2 = 1 - s^2.

The kappa coefficients are rational in a(s) = sqrt(1 - s^2); treating a(s) as
an algebraic element instead of a Taylor series makes the two-fold
coefficients and the p(eta_kl) values exact, with no truncation. Only
elements whose norm P^2 - Q^2 (1 - s^2) is a single power of s are inverted,
which covers 1 - a(s) = s^2 / (1 + a(s)).
"""
from __future__ import annotations

from .brackets import BracketExpr
from .field import FieldElement
from .series import SymScalar


def _exact(x) -> SymScalar:
    if isinstance(x, SymScalar):
        if not x.is_exact():
            raise ValueError("only exact Laurent polynomials embed in K[s, a_s]")
        return x
    return SymScalar.const(x)


class QuadS:
    """P + Q a_s with P, Q exact Laurent polynomials in s over K."""

    __slots__ = ("P", "Q")

    def __init__(self, P=0, Q=0):
        self.P, self.Q = _exact(P), _exact(Q)

    @staticmethod
    def lift(x) -> "QuadS":
        return x if isinstance(x, QuadS) else QuadS(x)

    def is_zero(self) -> bool:
        return self.P.is_zero() and self.Q.is_zero()

    def __eq__(self, other) -> bool:
        other = QuadS.lift(other)
        return (self - other).is_zero()

    def __hash__(self) -> int:
        return hash((self.P, self.Q))

    def __add__(self, other) -> "QuadS":
        other = QuadS.lift(other)
        return QuadS(self.P + other.P, self.Q + other.Q)

    __radd__ = __add__

    def __neg__(self) -> "QuadS":
        return QuadS(-self.P, -self.Q)

    def __sub__(self, other) -> "QuadS":
        return self + (-QuadS.lift(other))

    def __rsub__(self, other) -> "QuadS":
        return QuadS.lift(other) - self

    def __mul__(self, other) -> "QuadS":
        other = QuadS.lift(other)
        one_minus_s2 = SymScalar({0: FieldElement.const(1), 2: FieldElement.const(-1)})
        return QuadS(self.P * other.P + self.Q * other.Q * one_minus_s2,
                     self.P * other.Q + self.Q * other.P)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadS":
        return QuadS(self.P, -self.Q)

    def norm(self) -> SymScalar:
        prod = self * self.conjugate()
        return prod.P

    def inverse(self) -> "QuadS":
        n = self.norm()
        if len(n.terms) != 1:
            raise ZeroDivisionError("only elements with monomial norm are inverted exactly")
        return self.conjugate() * QuadS(n.inverse())

    def __truediv__(self, other) -> "QuadS":
        return self * QuadS.lift(other).inverse()

    def __rtruediv__(self, other) -> "QuadS":
        return QuadS.lift(other) * self.inverse()

    def evaluate(self, r: float, s: float) -> float:
        return self.P.evaluate(r, s) + self.Q.evaluate(r, s) * (1 - s * s) ** 0.5

    def __repr__(self) -> str:
        return f"({self.P}) + ({self.Q})*a_s"


class ExactGeometry:
    """The covectors and kappas of ``symbols.Geometry`` with exact a(s)."""

    def __init__(self):
        one, zero = QuadS(1), QuadS(0)
        self.order = float("inf")
        self.s = QuadS(SymScalar.monomial(1, 1))
        self.r = QuadS(SymScalar.const(FieldElement.r()))
        self.a_r = QuadS(SymScalar.const(FieldElement.a()))
        self.a_s = QuadS(0, 1)
        frac = (one + self.a_r) / (one - self.a_s)
        half = QuadS(FieldElement.const(1) / 2)
        self.kappa = (one - frac,
                      half * frac + half * self.r / self.s,
                      half * frac - half * self.r / self.s)
        from .symbols import CovectorSym
        self.eta = CovectorSym((one, -self.a_r, self.r, zero))
        self.xi = (CovectorSym((one, one, zero, zero)),
                   CovectorSym((one, self.a_s, self.s, zero)),
                   CovectorSym((one, self.a_s, -self.s, zero)))
        self.omega = (CovectorSym((zero, zero, one, zero)),
                      CovectorSym((self.s, zero, one, zero)),
                      CovectorSym((-self.s, zero, one, zero)))

    def eta_k(self, k: int):
        return self.xi[k - 1].scale(self.kappa[k - 1])

    def eta_kl(self, *ks: int):
        out = self.eta_k(ks[0])
        for k in ks[1:]:
            out = out + self.eta_k(k)
        return out


def exact_p(xi) -> QuadS:
    """-xi_0^2 + xi_1^2 + xi_2^2 + xi_3^2 in K[s, a_s]."""
    return -(xi[0] * xi[0]) + xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3]


def exact_two_fold_coefficients(k: int, l: int, geom: ExactGeometry | None = None) -> list[QuadS]:
    from .symbols import two_fold_numerator
    geom = geom or ExactGeometry()
    num = two_fold_numerator(k, l, geom)
    return [comp.coeff((k, l), zero=QuadS(0)) for comp in num.comps]


def printed_two_fold_coefficients(geom: ExactGeometry | None = None) -> dict[tuple[int, int], list[QuadS]]:
    """The reference lists of c_(kl),beta for beta = 0, 1, 2."""
    g = geom or ExactGeometry()
    k1, k2, k3 = g.kappa
    s, a = g.s, g.a_s
    return {
        (1, 2): [k1 + 2 * k2 * s * s - k2, k1 - a * k2, 2 * k1 * s + k2 * s],
        (1, 3): [k1 + 2 * k3 * s * s - k3, k1 - a * k3, -2 * k1 * s - k3 * s],
        (2, 3): [-3 * k2 * s * s + k2 + 3 * k3 * s * s - k3,
                 a * k2 * s * s + a * k2 - a * k3 * s * s - a * k3,
                 k2 * s * s * s - 3 * k2 * s + k3 * s * s * s - 3 * k3 * s],
    }


def printed_p_values(geom: ExactGeometry | None = None) -> dict[tuple[int, int], QuadS]:
    g = geom or ExactGeometry()
    k1, k2, k3 = g.kappa
    two = 2 * (g.a_r + g.a_s)
    return {(2, 3): two * (k1 - 1), (1, 2): two * k2, (1, 3): two * k3}


def generator_expr(k: int, coeff) -> BracketExpr:
    return BracketExpr.generator(k, coeff)
