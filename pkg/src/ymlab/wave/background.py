"""Background connections for the wave solver, evaluated one time slice at a time.

A slice carries A_mu, the derivatives dA[mu][alpha] = d_mu A_alpha and the
curvature F[mu][alpha] = d_mu A_alpha - d_alpha A_mu + [A_mu, A_alpha]. Slice
arrays keep the algebra axis first, (d, 4, nx, ny, nz) and (d, 4, 4, nx, ny,
nz), so brackets act on contiguous planes. Keeping only slices lets fine
grids run without storing four-dimensional histories of every derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..forms import Connection, Grid
from ..lie import LieAlgebra, gell_mann_basis


@dataclass
class BackgroundSlice:
    A: np.ndarray    # (d, 4, nx, ny, nz)
    dA: np.ndarray   # (d, 4, 4, nx, ny, nz), dA[:, mu, alpha] = d_mu A_alpha
    F: np.ndarray    # (d, 4, 4, nx, ny, nz)

    @staticmethod
    def build(alg: LieAlgebra, A: np.ndarray, dA: np.ndarray) -> "BackgroundSlice":
        """From arrays in the trailing-algebra layout (4, ..., d) and (4, 4, ..., d)."""
        A = np.ascontiguousarray(np.moveaxis(A, -1, 0))
        dA = np.ascontiguousarray(np.moveaxis(dA, -1, 0))
        F = np.zeros_like(dA)
        for mu in range(4):
            for al in range(mu + 1, 4):
                F[:, mu, al] = dA[:, mu, al] - dA[:, al, mu] + alg.bracket_leading(A[:, mu], A[:, al])
                F[:, al, mu] = -F[:, mu, al]
        return BackgroundSlice(A, dA, F)

    def component(self, mu: int) -> np.ndarray:
        """A_mu in the trailing-algebra layout (nx, ny, nz, d)."""
        return np.moveaxis(self.A[:, mu], 0, -1)


class Background:
    """Interface: ``slice(n)`` returns the BackgroundSlice at time index n."""

    alg: LieAlgebra
    grid: Grid
    name: str = "background"

    def slice(self, n: int) -> BackgroundSlice:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False


class ZeroBackground(Background):
    name = "zero"

    def __init__(self, alg: LieAlgebra, grid: Grid):
        self.alg, self.grid = alg, grid
        shape = grid.shape[1:] + (alg.d,)
        self._slice = BackgroundSlice.build(alg, np.zeros((4,) + shape), np.zeros((4, 4) + shape))

    def slice(self, n: int) -> BackgroundSlice:
        return self._slice

    def is_zero(self) -> bool:
        return True


class ClosedFormBackground(Background):
    """A given by closed-form values and first derivatives.

    ``value(points) -> (..., 4, d)`` and ``deriv(points) -> (..., 4, 4, d)``
    with deriv[..., mu, alpha, :] = d_mu A_alpha.
    """

    def __init__(self, alg: LieAlgebra, grid: Grid, value: Callable, deriv: Callable, name: str = "closed-form"):
        self.alg, self.grid, self.name = alg, grid, name
        self._value, self._deriv = value, deriv
        self._cache: dict[int, BackgroundSlice] = {}
        ax = [grid.coords(m) for m in (1, 2, 3)]
        self._space = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)

    def points(self, n: int) -> np.ndarray:
        t = self.grid.coords(0)[n]
        return np.concatenate([np.full(self._space.shape[:-1] + (1,), t), self._space], axis=-1)

    def slice(self, n: int) -> BackgroundSlice:
        if n not in self._cache:
            if len(self._cache) > 4:
                self._cache.pop(min(self._cache))
            pts = self.points(n)
            A = np.moveaxis(self._value(pts), -2, 0)
            dA = np.moveaxis(np.moveaxis(self._deriv(pts), -3, 0), -2, 1)
            self._cache[n] = BackgroundSlice.build(self.alg, A, dA)
        return self._cache[n]


class GridBackground(Background):
    """A sampled on the grid; derivatives by the second-order stencil."""

    def __init__(self, A: Connection, name: str = "grid"):
        self.alg, self.grid, self.name = A.alg, A.grid, name
        self._A = np.stack([A.a.comps[(m,)] for m in range(4)], axis=1)  # (nt, 4, nx, ny, nz, d)

    def slice(self, n: int) -> BackgroundSlice:
        g = self.grid
        A = self._A[n]
        nt = self._A.shape[0]
        if 0 < n < nt - 1:
            dt = (self._A[n + 1] - self._A[n - 1]) / (2 * g.tau)
        elif n == 0:
            dt = (-3 * self._A[0] + 4 * self._A[1] - self._A[2]) / (2 * g.tau)
        else:
            dt = (3 * self._A[n] - 4 * self._A[n - 1] + self._A[n - 2]) / (2 * g.tau)
        dA = np.empty((4,) + A.shape)
        dA[0] = dt
        for j in (1, 2, 3):
            dA[j] = np.gradient(A, g.spacing[j], axis=j, edge_order=2)
        return BackgroundSlice.build(self.alg, A, dA)


def planewave(alg: LieAlgebra, grid: Grid, amplitude: float = 0.5, generator: int = 0,
              component: int = 2) -> ClosedFormBackground:
    """A_component = amplitude * sin(t - x^1) * e_generator.

    A single component along a fixed algebra direction has [A, A] = 0, and
    a function of t - x^1 in a transverse component solves the free wave
    equation with d^a A_a = 0; hence this is an exact Yang-Mills solution
    in Lorenz gauge, while still coupling non-abelianly to perturbations.
    """
    if component in (0, 1):
        raise ValueError("the plane wave must be polarized transversally (component 2 or 3)")
    e = np.zeros(alg.d)
    e[generator] = amplitude

    def value(p):
        out = np.zeros(p.shape[:-1] + (4, alg.d))
        out[..., component, :] = np.sin(p[..., 0] - p[..., 1])[..., None] * e
        return out

    def deriv(p):
        out = np.zeros(p.shape[:-1] + (4, 4, alg.d))
        c = np.cos(p[..., 0] - p[..., 1])[..., None] * e
        out[..., 0, component, :] = c
        out[..., 1, component, :] = -c
        return out

    return ClosedFormBackground(alg, grid, value, deriv, name="su2-planewave")


def from_field(alg: LieAlgebra, grid: Grid, field, name: str = "trig") -> ClosedFormBackground:
    """Background from a ``fields.TrigField`` (exact derivatives)."""
    def deriv(p):
        return np.stack([field.derivative(p, mu) for mu in range(4)], axis=-3)

    return ClosedFormBackground(alg, grid, field.value, deriv, name=name)


PRESETS = ("zero", "su2-planewave")


def preset(name: str, grid: Grid, alg: LieAlgebra | None = None, amplitude: float = 0.5) -> Background:
    alg = alg or gell_mann_basis(2)
    if name == "zero":
        return ZeroBackground(alg, grid)
    if name == "su2-planewave":
        return planewave(alg, grid, amplitude)
    raise ValueError(f"unknown background preset {name!r}; choose from {PRESETS}")
