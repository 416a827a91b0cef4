"""Formal Lie polynomials in abstract generators.

A monomial is either a generator (a positive int) or a pair ``(x, y)`` standing
for the bracket [x, y]. Expressions are finite linear combinations of
monomials with coefficients in any commutative ring supporting ``+``, ``*``,
negation and ``is_zero()`` (SymScalar in practice; FieldElement also works).

Normal form: antisymmetry is applied innermost first (inner pairs sorted, a
bare generator placed left of a bracket, [x, x] = 0). With ``jacobi=True``
every bracket [b_k, [b_i, b_j]] with k > j > i is then rewritten as
-[b_i, [b_j, b_k]] + [b_j, [b_i, b_k]], leaving the basis
{[b_i, [b_j, b_k]], [b_j, [b_i, b_k]]} for three distinct generators.
"""
from __future__ import annotations

from typing import Callable, Dict, Mapping, Tuple, Union

import numpy as np

Monomial = Union[int, Tuple["Monomial", "Monomial"]]


def degree(m: Monomial) -> int:
    return 1 if isinstance(m, int) else degree(m[0]) + degree(m[1])


def generators(m: Monomial) -> list[int]:
    return [m] if isinstance(m, int) else generators(m[0]) + generators(m[1])


def _key(m: Monomial):
    return (degree(m), m if isinstance(m, int) else (_key(m[0]), _key(m[1])))


def _bracket_normal(x: Monomial, y: Monomial) -> list[tuple[int, Monomial]]:
    """[x, y] for normal monomials x, y, as a signed list of normal monomials."""
    if x == y:
        return []
    if _key(x) > _key(y):
        return [(-sign, m) for sign, m in _bracket_normal(y, x)]
    return [(1, (x, y))]


def antisymmetry_form(m: Monomial) -> list[tuple[int, Monomial]]:
    if isinstance(m, int):
        return [(1, m)]
    out = []
    for s1, x in antisymmetry_form(m[0]):
        for s2, y in antisymmetry_form(m[1]):
            out.extend((s1 * s2 * s, z) for s, z in _bracket_normal(x, y))
    return out


def jacobi_rewrite(m: Monomial) -> list[tuple[int, Monomial]]:
    """Rewrite the designated redundant monomial [b_k,[b_i,b_j]] (i<j<k)."""
    if (isinstance(m, tuple) and isinstance(m[0], int) and isinstance(m[1], tuple)
            and isinstance(m[1][0], int) and isinstance(m[1][1], int)):
        k, (i, j) = m[0], m[1]
        if i < j < k:
            return [(-1, (i, (j, k))), (1, (j, (i, k)))]
    return [(1, m)]


def normal_form(m: Monomial, jacobi: bool = True) -> list[tuple[int, Monomial]]:
    terms = antisymmetry_form(m)
    if jacobi:
        terms = [(s1 * s2, z) for s1, y in terms for s2, z in jacobi_rewrite(y)]
    merged: Dict[Monomial, int] = {}
    for sign, z in terms:
        merged[z] = merged.get(z, 0) + sign
    return [(c, z) for z, c in merged.items() if c]


class BracketExpr:
    """Linear combination of Lie monomials, kept in normal form."""

    __slots__ = ("terms", "jacobi")

    def __init__(self, terms: Mapping[Monomial, object] | None = None, jacobi: bool = False,
                 _normal: bool = False):
        self.jacobi = jacobi
        if _normal:
            self.terms = dict(terms or {})
            return
        out: Dict[Monomial, object] = {}
        for m, c in (terms or {}).items():
            for sign, z in normal_form(m, jacobi):
                add = c if sign == 1 else -c if sign == -1 else c * sign
                out[z] = out[z] + add if z in out else add
        self.terms = {z: c for z, c in out.items() if not _exact_zero(c)}

    @staticmethod
    def generator(k: int, coeff) -> "BracketExpr":
        return BracketExpr({k: coeff})

    def normalized(self, jacobi: bool = True) -> "BracketExpr":
        return BracketExpr(self.terms, jacobi=jacobi)

    def __add__(self, other: "BracketExpr") -> "BracketExpr":
        out = dict(self.terms)
        for z, c in other.terms.items():
            out[z] = out[z] + c if z in out else c
        return BracketExpr({z: c for z, c in out.items() if not _exact_zero(c)},
                           jacobi=self.jacobi and other.jacobi, _normal=True)

    def __neg__(self) -> "BracketExpr":
        return BracketExpr({z: -c for z, c in self.terms.items()}, self.jacobi, _normal=True)

    def __sub__(self, other: "BracketExpr") -> "BracketExpr":
        return self + (-other)

    def scale(self, k) -> "BracketExpr":
        """Multiply every coefficient by the ring element ``k``."""
        return BracketExpr({z: k * c for z, c in self.terms.items()}, self.jacobi, _normal=True)

    def map_coeffs(self, fn: Callable) -> "BracketExpr":
        return BracketExpr({z: fn(c) for z, c in self.terms.items()}, self.jacobi, _normal=True)

    def coeff(self, m: Monomial, zero=None):
        """Coefficient of a monomial given in any form (normalized on lookup)."""
        forms = normal_form(m, self.jacobi)
        if len(forms) != 1:
            raise KeyError(f"{m!r} is not a single basis monomial in this normal form")
        sign, z = forms[0]
        c = self.terms.get(z)
        if c is None:
            return zero
        return c if sign == 1 else -c

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.terms.values())

    def substitute(self, mapping: Mapping[int, int]) -> "BracketExpr":
        """Rename generators (e.g. b3 -> b2) and renormalize."""
        out = BracketExpr(jacobi=self.jacobi)
        for z, c in self.terms.items():
            out = out + BracketExpr({_rename(z, mapping): c}, jacobi=self.jacobi)
        return out

    def evaluate(self, bindings: Mapping[int, np.ndarray], scalar: Callable = float) -> np.ndarray:
        """Evaluate with generators bound to matrices and coefficients mapped to numbers."""
        total = None
        for z, c in self.terms.items():
            val = scalar(c) * _eval_monomial(z, bindings)
            total = val if total is None else total + val
        if total is None:
            some = next(iter(bindings.values()))
            return np.zeros_like(some)
        return total

    def __repr__(self) -> str:
        return " + ".join(f"({c})*{show(z)}" for z, c in self.terms.items()) or "0"


def show(m: Monomial) -> str:
    return f"b{m}" if isinstance(m, int) else f"[{show(m[0])},{show(m[1])}]"


def _rename(m: Monomial, mapping: Mapping[int, int]) -> Monomial:
    if isinstance(m, int):
        return mapping.get(m, m)
    return (_rename(m[0], mapping), _rename(m[1], mapping))


def _eval_monomial(m: Monomial, bindings: Mapping[int, np.ndarray]) -> np.ndarray:
    if isinstance(m, int):
        if m not in bindings:
            raise KeyError(f"generator b{m} is unbound")
        return np.asarray(bindings[m])
    x, y = _eval_monomial(m[0], bindings), _eval_monomial(m[1], bindings)
    return x @ y - y @ x


def _is_zero(c) -> bool:
    return c.is_zero() if hasattr(c, "is_zero") else c == 0


def _exact_zero(c) -> bool:
    """Zero with no truncation information attached."""
    if hasattr(c, "terms") and hasattr(c, "prec"):
        return not c.terms and c.prec == float("inf")
    return _is_zero(c)


def lie_bracket(x: BracketExpr, y: BracketExpr) -> BracketExpr:
    """Bilinear extension of the bracket to expressions (antisymmetry normal form)."""
    out: Dict[Monomial, object] = {}
    for m1, c1 in x.terms.items():
        for m2, c2 in y.terms.items():
            prod = c1 * c2
            for sign, z in normal_form((m1, m2), jacobi=False):
                add = prod if sign == 1 else -prod
                out[z] = out[z] + add if z in out else add
    return BracketExpr({z: c for z, c in out.items() if not _exact_zero(c)}, _normal=True)
