"""Slice-wise operators of the relative Lorenz system.

Public arrays of a 1-form on one time slice have shape (4, nx, ny, nz, d);
``Xt`` is the time derivative. With nabla_mu = d_mu + [A_mu, .] the equation

    box_A W + star[W, star F_A] + N(W) = J

is written as d_t^2 W + R(W) = J, where

    box_A W + star[W, star F_A] = -nabla^a nabla_a W_b + 2 [F^a_b, W_a],
    N(W) = Q(W, W) + C(W, W, W),
    Q(X, Z) = 1/2 d_A^*[X, Z] + star[X, star d_A Z],
    C(X, Y, Z) = 1/2 star[X, star[Y, Z]],

and Q, C are expanded with the bracket expansion identities.

Internally the algebra axis is moved to the front so each bracket works on
contiguous component planes.
"""
from __future__ import annotations

import numpy as np

from ..lie import LieAlgebra
from .background import BackgroundSlice

G = (-1.0, 1.0, 1.0, 1.0)


def d_space(X: np.ndarray, j: int, h: float) -> np.ndarray:
    """d/dx^j (j = 1, 2, 3) of arrays whose last three axes are x, y, z."""
    return np.gradient(X, h, axis=X.ndim + j - 4, edge_order=2)


def d_space_trailing(X: np.ndarray, j: int, h: float) -> np.ndarray:
    """d/dx^j for arrays shaped (..., nx, ny, nz, d)."""
    return np.gradient(X, h, axis=X.ndim + j - 5, edge_order=2)


def lap_1d(X: np.ndarray, j: int, h: float) -> np.ndarray:
    """Three-point second difference along x^j; zero on the two boundary faces."""
    ax = X.ndim + j - 4
    out = np.zeros_like(X)
    lo, mid, hi = ([slice(None)] * X.ndim for _ in range(3))
    lo[ax], mid[ax], hi[ax] = slice(None, -2), slice(1, -1), slice(2, None)
    out[tuple(mid)] = (X[tuple(hi)] - 2 * X[tuple(mid)] + X[tuple(lo)]) / (h * h)
    return out


def _first(X: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.moveaxis(X, -1, 0))


def _last(X: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.moveaxis(X, 0, -1))


class SliceOps:
    """Operators on one time slice with a fixed background slice."""

    def __init__(self, alg: LieAlgebra, bg: BackgroundSlice, h: float):
        self.alg, self.h = alg, h
        self.br = alg.bracket_leading
        self.A, self.dA, self.F = bg.A, bg.dA, bg.F   # algebra axis first
        self.a_on = [bool(np.any(bg.A[:, mu])) for mu in range(4)]
        self.da_on = [bool(np.any(bg.dA[:, mu, mu])) for mu in range(4)]
        self.f_on = {(a, b): bool(np.any(bg.F[:, a, b])) for a in range(4) for b in range(4)}
        self.zero_bg = not (any(self.a_on) or any(self.da_on) or any(self.f_on.values()))

    # -- algebra-first kernels ------------------------------------------

    def _Amu(self, mu: int) -> np.ndarray:
        """A_mu broadcastable against (d, 4, nx, ny, nz)."""
        return self.A[:, mu, None]

    def _partials(self, X: np.ndarray, Xt: np.ndarray) -> list[np.ndarray]:
        return [Xt] + [d_space(X, j, self.h) for j in (1, 2, 3)]

    def _nabla(self, X: np.ndarray, Xt: np.ndarray) -> list[np.ndarray]:
        """nabla_mu X_b for each mu: list of (d, 4, ...) arrays."""
        dX = self._partials(X, Xt)
        if self.zero_bg:
            return dX
        return [dX[mu] + self.br(self._Amu(mu), X) if self.a_on[mu] else dX[mu] for mu in range(4)]

    @staticmethod
    def _div(cov: list[np.ndarray]) -> np.ndarray:
        """d_A^* X = -nabla^a X_a, shape (d, ...)."""
        return -sum(G[a] * cov[a][:, a] for a in range(4))

    def _linear(self, W: np.ndarray, Wt: np.ndarray) -> np.ndarray:
        h = self.h
        out = -sum(lap_1d(W, j, h) for j in (1, 2, 3))
        if self.zero_bg:
            return out
        br, A, dA, F = self.br, self._Amu, self.dA, self.F
        if self.da_on[0]:
            out += br(dA[:, 0, 0, None], W)
        if self.a_on[0]:
            out += 2 * br(A(0), Wt) + br(A(0), br(A(0), W))
        for j in (1, 2, 3):
            if self.da_on[j]:
                out -= br(dA[:, j, j, None], W)
            if self.a_on[j]:
                out -= 2 * br(A(j), d_space(W, j, h)) + br(A(j), br(A(j), W))
        for b in range(4):
            for a in range(4):
                if a != b and self.f_on[(a, b)]:
                    out[:, b] += 2 * G[a] * br(F[:, a, b], W[:, a])
        return out

    def _quadratic(self, X, Xt, Z, Zt) -> np.ndarray:
        br = self.br
        cx, cz = self._nabla(X, Xt), self._nabla(Z, Zt)
        hx, hz = self._div(cx), self._div(cz)
        out = 0.5 * (br(hx[:, None], Z) - br(X, hz[:, None]))
        for a in range(4):
            g = G[a]
            Xa = X[:, a, None]
            # cz[b][:, a] = nabla_b Z_a, stacked over b
            czT = np.stack([cz[b][:, a] for b in range(4)], axis=1)
            out += 0.5 * g * br(cx[a], Z[:, a, None])
            out += g * (-1.5 * br(Xa, cz[a]) + br(Xa, czT))
        return out

    def _cubic(self, X, Y, Z) -> np.ndarray:
        br = self.br
        out = np.zeros_like(X)
        for a in range(4):
            Xa = X[:, a, None]
            out += 0.5 * G[a] * (-br(Xa, br(Y[:, a, None], Z)) + br(Xa, br(Y, Z[:, a, None])))
        return out

    # -- public layout: (4, nx, ny, nz, d) ---------------------------------
    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return _last(self.br(_first(x), _first(y)))

    def linear(self, W: np.ndarray, Wt: np.ndarray) -> np.ndarray:
        """R_lin(W) = (box_A W + star[W, star F_A]) - d_t^2 W."""
        return _last(self._linear(_first(W), _first(Wt)))

    def quadratic(self, X: np.ndarray, Xt: np.ndarray, Z: np.ndarray, Zt: np.ndarray) -> np.ndarray:
        """Q(X, Z) = 1/2 d_A^*[X, Z] + star[X, star d_A Z] in components."""
        return _last(self._quadratic(_first(X), _first(Xt), _first(Z), _first(Zt)))

    def cubic(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """C(X, Y, Z) = 1/2 star[X, star[Y, Z]] in components."""
        return _last(self._cubic(_first(X), _first(Y), _first(Z)))

    def nonlinear(self, W: np.ndarray, Wt: np.ndarray) -> np.ndarray:
        Wf, Wtf = _first(W), _first(Wt)
        return _last(self._quadratic(Wf, Wtf, Wf, Wtf) + self._cubic(Wf, Wf, Wf))

    def lin_plus_nonlinear(self, W: np.ndarray, Wt: np.ndarray, nonlinear: bool = True) -> np.ndarray:
        Wf, Wtf = _first(W), _first(Wt)
        out = self._linear(Wf, Wtf)
        if nonlinear and np.any(Wf):
            out += self._quadratic(Wf, Wtf, Wf, Wtf) + self._cubic(Wf, Wf, Wf)
        return _last(out)

    def lorenz_divergence(self, W: np.ndarray, Wt: np.ndarray) -> np.ndarray:
        """d_A^* W on the slice, shape (nx, ny, nz, d)."""
        return _last(self._div(self._nabla(_first(W), _first(Wt))))

    def compat_rhs(self, J: np.ndarray, W: np.ndarray | None = None) -> np.ndarray:
        """d^j J_j + [A^j + W^j, J_j] for spatial J (3, nx, ny, nz, d)."""
        Jf = _first(J)
        out = sum(d_space(Jf[:, j - 1], j, self.h) for j in (1, 2, 3))
        V = self.A if W is None else self.A + _first(W)
        for j in (1, 2, 3):
            if np.any(V[:, j]):
                out = out + self.br(V[:, j], Jf[:, j - 1])
        return _last(out)
