"""Principal symbols of the one-, two- and three-wave interaction terms.

Three lightlike covectors xi_1, xi_2, xi_3 (the last two depending on a small
parameter s) decompose a target lightlike covector eta = (1, -a(r), r, 0) as
eta = sum kappa_k xi_k. The symbols below are the rescaled ("hatted")
quantities: all constant prefactors that do not depend on the gauge field are
dropped, so only the Laurent structure in s and the bracket structure in the
generators b_1, b_2, b_3 remain.

Index conventions: covector and 1-form components carry lower indices;
raising uses g = diag(-1, 1, 1, 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

from .brackets import BracketExpr, lie_bracket
from .field import FieldElement
from .series import SymScalar, TruncationError, a_r, a_s, r, s

METRIC = (-1, 1, 1, 1)
DEFAULT_ORDER = 6


@dataclass(frozen=True)
class CovectorSym:
    comps: tuple[SymScalar, SymScalar, SymScalar, SymScalar]

    def __add__(self, other: "CovectorSym") -> "CovectorSym":
        return CovectorSym(tuple(x + y for x, y in zip(self.comps, other.comps)))

    def scale(self, k: SymScalar) -> "CovectorSym":
        return CovectorSym(tuple(k * x for x in self.comps))

    def __getitem__(self, i: int) -> SymScalar:
        return self.comps[i]

    def pair(self, vec: "CovectorSym") -> SymScalar:
        """Minkowski pairing sum_a g^{aa} x_a y_a of two lower-index objects."""
        total = SymScalar.zero()
        for g, x, y in zip(METRIC, self.comps, vec.comps):
            total = total + (x * y if g == 1 else -(x * y))
        return total


@dataclass(frozen=True)
class SymbolVector:
    """A 1-form valued symbol: four BracketExpr components (lower index)."""

    comps: tuple[BracketExpr, BracketExpr, BracketExpr, BracketExpr]

    def __getitem__(self, i: int) -> BracketExpr:
        return self.comps[i]

    def __add__(self, other: "SymbolVector") -> "SymbolVector":
        return SymbolVector(tuple(x + y for x, y in zip(self.comps, other.comps)))

    def scale(self, k) -> "SymbolVector":
        return SymbolVector(tuple(x.scale(k) for x in self.comps))

    def upper(self, i: int) -> BracketExpr:
        return self.comps[i] if METRIC[i] == 1 else -self.comps[i]


def _c(x) -> SymScalar:
    return SymScalar.const(x)


class Geometry:
    """Covectors and kappa coefficients, computed once per truncation order."""

    def __init__(self, order: int = DEFAULT_ORDER):
        self.order = order
        one = _c(1)
        self.s, self.r, self.a_r = s(), r(), a_r()
        self.a_s = a_s(order)
        denom = one - self.a_s
        frac = (one + self.a_r) / denom
        half = _c(FieldElement.const(1) / 2)
        self.kappa = (one - frac,
                      half * frac + half * self.r / self.s,
                      half * frac - half * self.r / self.s)
        self.eta = CovectorSym((one, -self.a_r, self.r, _c(0)))
        self.xi = (CovectorSym((one, one, _c(0), _c(0))),
                   CovectorSym((one, self.a_s, self.s, _c(0))),
                   CovectorSym((one, self.a_s, -self.s, _c(0))))
        self.omega = (CovectorSym((_c(0), _c(0), one, _c(0))),
                      CovectorSym((self.s, _c(0), one, _c(0))),
                      CovectorSym((-self.s, _c(0), one, _c(0))))

    def eta_k(self, k: int) -> CovectorSym:
        return self.xi[k - 1].scale(self.kappa[k - 1])

    def eta_kl(self, *ks: int) -> CovectorSym:
        out = self.eta_k(ks[0])
        for k in ks[1:]:
            out = out + self.eta_k(k)
        return out


def kappas(order: int = DEFAULT_ORDER) -> tuple[SymScalar, SymScalar, SymScalar]:
    return Geometry(order).kappa


def minkowski_p(xi: CovectorSym) -> SymScalar:
    """p(xi) = -xi_0^2 + xi_1^2 + xi_2^2 + xi_3^2."""
    return xi.pair(xi)


def kappa_decomposition_residual(order: int = DEFAULT_ORDER) -> list[SymScalar]:
    """Componentwise eta - sum_k kappa_k xi_k; each entry should be O(s^prec) only."""
    g = Geometry(order)
    total = g.eta_kl(1, 2, 3)
    return [g.eta[i] - total[i] for i in range(4)]


def one_fold_symbol(k: int, geom: Geometry) -> SymbolVector:
    w = geom.omega[k - 1]
    return SymbolVector(tuple(BracketExpr.generator(k, w[i]) if not w[i].is_zero()
                              else BracketExpr() for i in range(4)))


def _contract(eta: CovectorSym, x: SymbolVector, y: SymbolVector, beta: int, geom) -> BracketExpr:
    """2 eta_a [x^a, y_b] - eta_b [x^a, y_a] (the quadratic interaction kernel)."""
    first = BracketExpr()
    second = BracketExpr()
    for a in range(4):
        xa = x.upper(a)
        if not xa.terms:
            continue
        if not eta[a].is_zero():
            first = first + lie_bracket(xa, y[beta]).scale(eta[a])
        second = second + lie_bracket(xa, y[a])
    out = first.scale(2)
    if not eta[beta].is_zero():
        out = out - second.scale(eta[beta])
    return out


def two_fold_numerator(k: int, l: int, geom: Geometry) -> SymbolVector:
    """p(eta_kl) times the two-fold symbol: c_(kl),b [b_k, b_l] per component."""
    if k == l or not {k, l} <= {1, 2, 3}:
        raise ValueError(f"invalid index pair ({k}, {l})")
    yk, yl = one_fold_symbol(k, geom), one_fold_symbol(l, geom)
    ek, el = geom.eta_k(k), geom.eta_k(l)
    return SymbolVector(tuple(_contract(el, yk, yl, b, geom) + _contract(ek, yl, yk, b, geom)
                              for b in range(4)))


def two_fold_coefficients(k: int, l: int, order: int = DEFAULT_ORDER) -> list[SymScalar]:
    """c_(kl),beta for beta = 0..3, read off as the coefficient of [b_k, b_l]."""
    num = two_fold_numerator(k, l, Geometry(order))
    return [comp.coeff((k, l), zero=SymScalar.zero()) for comp in num.comps]


def two_fold_symbol(k: int, l: int, geom: Geometry | None = None) -> SymbolVector:
    geom = geom or Geometry()
    num = two_fold_numerator(k, l, geom)
    inv_p = minkowski_p(geom.eta_kl(k, l)).inverse()
    return num.scale(inv_p)


def cubic_contribution(geom: Geometry | None = None) -> SymbolVector:
    """The derivative-free cubic terms 1/2 sum_pi 4 [Y_pi1^a, [Y_pi2,a, Y_pi3,b]]."""
    geom = geom or Geometry()
    ys = {k: one_fold_symbol(k, geom) for k in (1, 2, 3)}
    comps = []
    for b in range(4):
        total = BracketExpr()
        for p1, p2, p3 in permutations((1, 2, 3)):
            for a in range(4):
                inner = lie_bracket(ys[p2][a], ys[p3][b])
                total = total + lie_bracket(ys[p1].upper(a), inner)
        comps.append(total.scale(_c(2)))
    return SymbolVector(tuple(comps))


def three_fold_symbol(include_cubic: bool = False, order: int = DEFAULT_ORDER,
                      geom: Geometry | None = None) -> SymbolVector:
    """S_3-symmetrized three-wave symbol (antisymmetry normal form, no Jacobi).

    Raises TruncationError when the truncation order cannot resolve the
    s^0 coefficients of the beta = 0, 1 components.
    """
    geom = geom or Geometry(order)
    try:
        ys = {k: one_fold_symbol(k, geom) for k in (1, 2, 3)}
        pair = {}
        for k, l in ((1, 2), (1, 3), (2, 3)):
            pair[(k, l)] = pair[(l, k)] = two_fold_symbol(k, l, geom)
    except TruncationError as exc:
        raise TruncationError(f"truncation insufficient at N={geom.order}: {exc}; increase N") from exc
    comps = []
    for b in range(4):
        total = BracketExpr()
        for p1, p2, p3 in permutations((1, 2, 3)):
            total = total + _contract(geom.eta_k(p3), pair[(p1, p2)], ys[p3], b, geom)
            total = total + _contract(geom.eta_kl(p2, p3), ys[p1], pair[(p2, p3)], b, geom)
        comps.append(total.scale(_c(FieldElement.const(1) / 2)))
    sym = SymbolVector(tuple(comps))
    for b in (0, 1):
        prec = min((c.prec for c in sym[b].terms.values()), default=float("inf"))
        if prec < 1:
            raise TruncationError(
                f"truncation insufficient: component {b} only known to O(s^{prec}); "
                f"increase the order N (got N={geom.order})")
    if include_cubic:
        cubic = cubic_contribution(geom)
        for b in (0, 1):
            if laurent_order(cubic[b]) < 1:
                raise AssertionError(f"cubic contribution to component {b} is not O(s)")
        sym = sym + cubic
    return sym


def laurent_order(expr: BracketExpr) -> float:
    """Smallest exponent of s carrying a nonzero coefficient."""
    return min((c.valuation for c in expr.normalized(jacobi=True).terms.values()
                if c.terms), default=float("inf"))


def coefficient_at(expr: BracketExpr, m: int) -> BracketExpr:
    """The s^m part of an expression, with K-valued coefficients."""
    return BracketExpr({z: c.coeff(m) for z, c in expr.terms.items()}, jacobi=expr.jacobi)


class JacobiResidueError(ArithmeticError):
    pass


def jacobi_limit(sym: SymbolVector | BracketExpr, beta: int = 1) -> BracketExpr:
    """s -> 0 limit of a three-fold symbol component after Jacobi reduction.

    All negative powers of s must cancel in the reduced basis; otherwise
    JacobiResidueError is raised. Returns the s^0 part with K coefficients.
    """
    expr = sym[beta] if isinstance(sym, SymbolVector) else sym
    reduced = expr.normalized(jacobi=True)
    for z, c in reduced.terms.items():
        for m, v in c.terms.items():
            if m < 0:
                raise JacobiResidueError(f"nonzero s^{m} residue on monomial {z!r}: {v}")
    return BracketExpr({z: c.coeff(0) for z, c in reduced.terms.items()}, jacobi=True)


def temporal_symbol_transform(sym: SymbolVector, eta: CovectorSym) -> tuple[BracketExpr, ...]:
    """Spatial components sym_b - (eta_b / eta_0) sym_0 for b = 1, 2, 3."""
    if eta[0].is_zero():
        raise ZeroDivisionError("eta_0 vanishes")
    inv0 = eta[0].inverse()
    return tuple(sym[b] - sym[0].scale(eta[b] * inv0) for b in (1, 2, 3))


def expected_three_fold_terms() -> dict:
    """Printed coefficients: s^-1 on the three monomials and s^0 on the last two."""
    f = FieldElement
    three_r = f.const(3) * f.r() / (f.const(1) + f.a())
    return {
        -1: {(1, (2, 3)): f.const(-6), (2, (1, 3)): f.const(6), (3, (1, 2)): f.const(-6)},
        0: {(2, (1, 3)): three_r, (3, (1, 2)): three_r},
    }


def recover_nested_commutator(sym: SymbolVector, geom: Geometry | None = None) -> BracketExpr:
    """Apply the temporal-gauge relation, set b3 = b2 and divide the limit by 6r.

    For the three-wave symbol the result is the single monomial [b2, [b1, b2]].
    """
    geom = geom or Geometry()
    spatial = temporal_symbol_transform(sym, geom.eta)
    limit = jacobi_limit(spatial[0].substitute({3: 2}), beta=0)
    scale = (FieldElement.const(6) * FieldElement.r()).inverse()
    return limit.map_coeffs(lambda c: scale * c)
