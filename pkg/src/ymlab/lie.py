"""Matrix Lie algebras and groups.

Algebras are spanned by anti-Hermitian matrices with the inner product
``<X, Y> = -Re tr(XY)``. Elements carry their matrix; coefficient vectors in
the basis are obtained by solving the Gram system.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

RANK_RTOL = 1e-9


class LieAlgebraError(ValueError):
    pass


class LieAlgebra:
    """Finite-dimensional real Lie algebra of complex ``n x n`` matrices.

    Parameters
    ----------
    basis : sequence of (n, n) complex arrays
        Linearly independent anti-Hermitian matrices closed under commutators.
    labels : optional names for the basis elements.
    """

    def __init__(self, basis: Sequence[np.ndarray], labels: Sequence[str] | None = None,
                 name: str = "custom", tol: float = 1e-10):
        mats = np.asarray(basis, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise LieAlgebraError("basis must be a stack of square matrices")
        self.basis = mats
        self.basis.setflags(write=False)
        self.d, self.n = mats.shape[0], mats.shape[1]
        self.name = name
        self.labels = list(labels) if labels is not None else [f"e{a}" for a in range(self.d)]
        self.tol = tol
        if np.abs(mats + np.conj(np.swapaxes(mats, 1, 2))).max(initial=0.0) > tol:
            raise LieAlgebraError("basis matrices must be anti-Hermitian")
        self.ip = -np.einsum("aij,bji->ab", mats, mats).real
        if np.linalg.eigvalsh(self.ip).min(initial=1.0) <= tol:
            raise LieAlgebraError("basis is linearly dependent")
        self._ip_inv = np.linalg.inv(self.ip)
        comm = np.einsum("aij,bjk->abik", mats, mats)
        comm = comm - np.swapaxes(comm, 0, 1)
        f, resid = self._project(comm)
        if resid > 1e3 * tol * max(1.0, np.abs(comm).max(initial=0.0)):
            raise LieAlgebraError("basis is not closed under the bracket")
        self.structure = f  # f[a, b, c]: [e_a, e_b] = sum_c f[a,b,c] e_c
        self.structure.setflags(write=False)

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name}, n={self.n}, d={self.d})"

    def _project(self, mats: np.ndarray) -> tuple[np.ndarray, float]:
        v = -np.einsum("aij,...ji->...a", self.basis, mats).real
        c = v @ self._ip_inv
        back = np.einsum("...a,aij->...ij", c, self.basis)
        return c, float(np.abs(back - mats).max(initial=0.0))

    def coeffs(self, mats: np.ndarray, check: bool = False) -> np.ndarray:
        """Coefficients of a (batch of) matrices in the basis (Gram solve)."""
        c, resid = self._project(np.asarray(mats, dtype=complex))
        if check and resid > 1e3 * self.tol * max(1.0, np.abs(mats).max(initial=0.0)):
            raise LieAlgebraError(f"matrix lies outside the algebra (residual {resid:.3e})")
        return c

    def matrix(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("...a,aij->...ij", np.asarray(coeffs, dtype=float), self.basis)

    def bracket_coeffs(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bracket of coefficient arrays with trailing axis d (broadcasting)."""
        x, y = np.asarray(x), np.asarray(y)
        if x.dtype == object or y.dtype == object:
            xf = np.tensordot(x, self.exact_structure, axes=([-1], [0]))
            return (xf * y[..., :, None]).sum(axis=-2)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        out = np.zeros(shape)
        # sparse sum over the nonzero structure constants, grouped by output index
        for c, terms in self._sparse_structure:
            acc = out[..., c]
            for a, b, f in terms:
                acc += f * (x[..., a] * y[..., b])
        return out

    def bracket_leading(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bracket of coefficient arrays whose algebra axis is the first one."""
        shape = np.broadcast_shapes(x.shape[1:], y.shape[1:])
        out = np.zeros((self.d,) + shape)
        for c, terms in self._sparse_structure:
            acc = out[c]
            for a, b, f in terms:
                if f == 1.0:
                    acc += x[a] * y[b]
                elif f == -1.0:
                    acc -= x[a] * y[b]
                else:
                    acc += f * (x[a] * y[b])
        return out

    @functools.cached_property
    def _sparse_structure(self) -> list:
        scale = np.abs(self.structure).max(initial=0.0)
        out = []
        for c in range(self.d):
            terms = [(a, b, float(self.structure[a, b, c])) for a in range(self.d) for b in range(self.d)
                     if abs(self.structure[a, b, c]) > 1e-14 * max(scale, 1.0)]
            if terms:
                out.append((c, terms))
        return out

    @functools.cached_property
    def exact_structure(self) -> np.ndarray:
        """Structure constants as Fractions (for algebras with rational constants)."""
        out = np.empty(self.structure.shape, dtype=object)
        for idx, v in np.ndenumerate(self.structure):
            q = Fraction(float(v)).limit_denominator(10**6)
            if abs(float(q) - v) > 1e-9:
                raise LieAlgebraError("structure constants are not rational")
            out[idx] = q
        return out

    def ad_matrices(self) -> np.ndarray:
        """ad[a] is the d x d matrix of ad_{e_a} acting on coefficient vectors."""
        return np.swapaxes(self.structure, 1, 2)

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("...a,ab,...b->...", x, self.ip, y)

    def element(self, coeffs: Iterable[float]) -> "AlgebraElement":
        return AlgebraElement(self, self.matrix(np.asarray(list(coeffs), dtype=float)))

    def basis_element(self, a: int | str) -> "AlgebraElement":
        idx = self.labels.index(a) if isinstance(a, str) else a
        return AlgebraElement(self, self.basis[idx].copy())

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, np.zeros((self.n, self.n), dtype=complex))

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        return self.element(scale * rng.standard_normal(self.d))

    @functools.cached_property
    def centre_basis(self) -> np.ndarray:
        return centre(self)

    def descriptor(self) -> dict:
        m = re.fullmatch(r"(su|u)\((\d+)\)", self.name)
        if m:
            return {"group": m.group(1), "n": int(m.group(2))}
        return {"basis": [[[[float(z.real), float(z.imag)] for z in row] for row in m]
                          for m in self.basis]}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of a matrix Lie algebra; the matrix is authoritative."""

    alg: LieAlgebra
    mat: np.ndarray

    @property
    def coeffs(self) -> np.ndarray:
        return self.alg.coeffs(self.mat)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same(self, other)
        return AlgebraElement(self.alg, self.mat + other.mat)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same(self, other)
        return AlgebraElement(self.alg, self.mat - other.mat)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.alg, -self.mat)

    def __mul__(self, s: float) -> "AlgebraElement":
        return AlgebraElement(self.alg, float(s) * self.mat)

    __rmul__ = __mul__

    def norm(self) -> float:
        c = self.coeffs
        return float(np.sqrt(max(self.alg.inner(c, c), 0.0)))

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        return bool(np.abs(self.mat - other.mat).max() <= atol)


@dataclass(frozen=True, eq=False)
class GroupElement:
    mat: np.ndarray

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.mat @ other.mat)

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.mat))

    def unitarity_defect(self) -> float:
        n = self.mat.shape[0]
        return float(np.abs(self.mat.conj().T @ self.mat - np.eye(n)).max())

    def act(self, b: AlgebraElement) -> AlgebraElement:
        """Adjoint action U b U^{-1}."""
        return AlgebraElement(b.alg, self.mat @ b.mat @ np.linalg.inv(self.mat))

    @staticmethod
    def identity(n: int) -> "GroupElement":
        return GroupElement(np.eye(n, dtype=complex))


def _same(x: AlgebraElement, y: AlgebraElement) -> None:
    if x.alg is not y.alg and x.mat.shape != y.mat.shape:
        raise LieAlgebraError("elements belong to different algebras")


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Matrix commutator, checked to stay inside the algebra."""
    _same(x, y)
    m = x.mat @ y.mat - y.mat @ x.mat
    x.alg.coeffs(m, check=True)
    return AlgebraElement(x.alg, m)


def nested(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """c(X, Y) = [X, [X, Y]]."""
    return bracket(x, bracket(x, y))


def nested_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c(A, B) = [A, [A, B]] for plain matrices (numeric or sympy)."""
    inner = a @ b - b @ a
    return a @ inner - inner @ a


# ---------------------------------------------------------------------------
# Gell-Mann construction

def _e(n: int, j: int, k: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[j - 1, k - 1] = 1.0
    return m


def hermitian_gell_mann(n: int) -> dict[tuple, np.ndarray]:
    """Generalized Gell-Mann matrices keyed ('S', j, k), ('A', j, k), ('D', l).

    Indices are 1-based with j < k; D_l = diag(1, ..., 1, -l, 0, ...) is left
    unnormalized.
    """
    if n < 2:
        raise LieAlgebraError("n must be at least 2")
    out: dict[tuple, np.ndarray] = {}
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            out[("S", j, k)] = _e(n, j, k) + _e(n, k, j)
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            out[("A", j, k)] = -1j * _e(n, j, k) + 1j * _e(n, k, j)
    for l in range(1, n):
        diag = np.zeros(n, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        out[("D", l)] = np.diag(diag)
    return out


def gell_mann_basis(n: int) -> LieAlgebra:
    """su(n) with basis {i S_jk, i A_jk, i D_l}."""
    mats = hermitian_gell_mann(n)
    labels = [key[0] + "_".join(map(str, key[1:])) for key in mats]
    alg = LieAlgebra([1j * m for m in mats.values()], labels=labels, name=f"su({n})")
    alg.gell_mann_keys = list(mats)
    return alg


def u_algebra(n: int) -> LieAlgebra:
    """u(n): the su(n) basis plus i Id."""
    su = gell_mann_basis(n)
    return LieAlgebra(list(su.basis) + [1j * np.eye(n)], labels=su.labels + ["I"], name=f"u({n})")


def u1() -> LieAlgebra:
    return LieAlgebra([np.array([[1j]])], labels=["I"], name="u(1)")


def direct_sum(first: LieAlgebra, second: LieAlgebra) -> LieAlgebra:
    """Block-diagonal direct sum of two matrix algebras."""
    n = first.n + second.n
    mats = []
    for m in first.basis:
        big = np.zeros((n, n), dtype=complex)
        big[: first.n, : first.n] = m
        mats.append(big)
    for m in second.basis:
        big = np.zeros((n, n), dtype=complex)
        big[first.n:, first.n:] = m
        mats.append(big)
    return LieAlgebra(mats, labels=first.labels + second.labels,
                      name=f"{first.name}+{second.name}")


def from_descriptor(desc: dict) -> LieAlgebra:
    """Build an algebra from ``{"group": "su"|"u", "n": n}`` or ``{"basis": ...}``."""
    if "basis" in desc:
        raw = np.asarray(desc["basis"], dtype=float)
        if raw.ndim != 4 or raw.shape[-1] != 2:
            raise LieAlgebraError("explicit basis must be d x n x n arrays of [re, im] pairs")
        return LieAlgebra(raw[..., 0] + 1j * raw[..., 1])
    group, n = desc.get("group"), desc.get("n")
    if not isinstance(n, int):
        raise LieAlgebraError("descriptor needs an integer 'n'")
    if group == "su":
        return gell_mann_basis(n)
    if group == "u":
        return u1() if n == 1 else u_algebra(n)
    raise LieAlgebraError(f"unknown group {group!r}")


# ---------------------------------------------------------------------------
# Spans and centre

def numerical_rank(vectors: np.ndarray, rtol: float = RANK_RTOL) -> int:
    vectors = np.atleast_2d(vectors)
    if vectors.size == 0:
        return 0
    sv = np.linalg.svd(vectors, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def nested_span_dimension(alg: LieAlgebra, random_pairs: int = 0, seed: int = 0,
                          rtol: float = RANK_RTOL) -> int:
    """Rank of {[X,[X,Y]]} over all ordered basis pairs plus random pairs."""
    eye = np.eye(alg.d)
    xs, ys = np.repeat(eye, alg.d, axis=0), np.tile(eye, (alg.d, 1))
    if random_pairs:
        rng = np.random.default_rng(seed)
        xs = np.vstack([xs, rng.standard_normal((random_pairs, alg.d))])
        ys = np.vstack([ys, rng.standard_normal((random_pairs, alg.d))])
    vecs = alg.bracket_coeffs(xs, alg.bracket_coeffs(xs, ys))
    return numerical_rank(vecs, rtol)


def bracket_span_dimension(alg: LieAlgebra, rtol: float = RANK_RTOL) -> int:
    return numerical_rank(alg.structure.reshape(alg.d * alg.d, alg.d), rtol)


def centre(alg: LieAlgebra, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal (under ``ip``) coefficient basis of the centre, shape (k, d)."""
    # row (a, c), column b holds f[a, b, c]: X is central iff stacked @ X = 0
    stacked = np.transpose(alg.structure, (0, 2, 1)).reshape(alg.d * alg.d, alg.d)
    _, sv, vh = np.linalg.svd(stacked)
    cutoff = rtol * sv[0] if sv.size and sv[0] > 0 else np.inf
    rank = int(np.sum(sv > cutoff)) if np.isfinite(cutoff) else 0
    null = vh[rank:]
    if null.shape[0] == 0:
        return np.zeros((0, alg.d))
    # orthonormalize with respect to the Gram matrix
    gram = null @ alg.ip @ null.T
    w, v = np.linalg.eigh(gram)
    return (v / np.sqrt(w)).T @ null


def centre_split(x: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """Orthogonal decomposition X = X_Z + X_1 with X_Z central."""
    z = x.alg.centre_basis
    c = x.coeffs
    cz = (z @ x.alg.ip @ c) @ z if z.shape[0] else np.zeros_like(c)
    xz = AlgebraElement(x.alg, x.alg.matrix(cz))
    return xz, AlgebraElement(x.alg, x.mat - xz.mat)


# ---------------------------------------------------------------------------
# Diagonal recursion for the nested-commutator span of su(n)

def diagonal_recursion_check(alg: LieAlgebra, l: int) -> AlgebraElement:
    """Right-hand side of D_l = D_{l-1} - l/(2(l-1)) c(A_{l,l+1}, D_{l-1}).

    The identity is stated for Hermitian generators. With X = i A and Y = i D we
    have c(X, Y) = -i c(A, D), so in the anti-Hermitian basis the right-hand
    side reads i D_{l-1} + l/(2(l-1)) c(i A_{l,l+1}, i D_{l-1}).
    """
    n = alg.n
    keys = getattr(alg, "gell_mann_keys", None)
    if keys is None or n < 3:
        raise LieAlgebraError("recursion needs su(n) with n >= 3 in the Gell-Mann basis")
    if not 2 <= l <= n - 1:
        raise LieAlgebraError(f"l must lie in 2..{n - 1}")
    d_prev = alg.basis_element(keys.index(("D", l - 1)))
    a = alg.basis_element(keys.index(("A", l, l + 1)))
    return d_prev + (l / (2 * (l - 1))) * nested(a, d_prev)


def exact_gell_mann(n: int):
    """Hermitian Gell-Mann matrices as exact sympy matrices."""
    import sympy as sp

    return {key: sp.Matrix(n, n, lambda i, j: sp.nsimplify(complex(m[i, j]).real)
                           + sp.I * sp.nsimplify(complex(m[i, j]).imag))
            for key, m in hermitian_gell_mann(n).items()}


def diagonal_recursion_exact(n: int, l: int):
    """Exact sympy evaluation of the recursion's right-hand side (Hermitian form)."""
    import sympy as sp

    if n < 3 or not 2 <= l <= n - 1:
        raise LieAlgebraError(f"need n >= 3 and 2 <= l <= n-1, got n={n}, l={l}")
    g = exact_gell_mann(n)
    d_prev, a = g[("D", l - 1)], g[("A", l, l + 1)]
    c = nested_matrix(a, d_prev)
    return (d_prev - sp.Rational(l, 2 * (l - 1)) * c).expand()
