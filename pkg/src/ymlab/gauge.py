"""Gauge transformations on the grid, temporal gauge fixing, gauge residuals.

A gauge map U acts on connections by B_mu = U^{-1} d_mu U + U^{-1} A_mu U.
Derivatives of U use the same second-order stencil as ``forms.partial``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .forms import Connection, GForm, Grid, d_A_star, one_form, partial
from .lie import LieAlgebra


class GaugeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Grid array of group elements, shape grid.shape + (n, n)."""

    U: np.ndarray
    grid: Grid

    def __post_init__(self):
        if self.U.shape[:4] != self.grid.shape or self.U.shape[-1] != self.U.shape[-2]:
            raise GaugeError("gauge array must have shape grid.shape + (n, n)")

    @staticmethod
    def identity(grid: Grid, n: int) -> "GaugeTransform":
        return GaugeTransform(np.broadcast_to(np.eye(n, dtype=complex), grid.shape + (n, n)).copy(), grid)

    @staticmethod
    def exp_of(alg: LieAlgebra, grid: Grid, generator: Callable[[np.ndarray], np.ndarray]) -> "GaugeTransform":
        """U = exp(X(p)) with X given as coefficients, generator(points) -> (..., d)."""
        X = alg.matrix(generator(grid.points()))
        return GaugeTransform(expm_batch(X), grid)

    @property
    def n(self) -> int:
        return self.U.shape[-1]

    def inverse(self) -> "GaugeTransform":
        return GaugeTransform(np.linalg.inv(self.U), self.grid)

    def __matmul__(self, other: "GaugeTransform") -> "GaugeTransform":
        return GaugeTransform(self.U @ other.U, self.grid)

    def unitarity_defect(self) -> float:
        eye = np.eye(self.n)
        return float(np.abs(np.conj(np.swapaxes(self.U, -1, -2)) @ self.U - eye).max())

    def derivative(self, mu: int) -> np.ndarray:
        return partial(self.U, mu, self.grid)

    def value_at(self, index: tuple[int, int, int, int]) -> np.ndarray:
        return self.U[index]


def expm_batch(X: np.ndarray) -> np.ndarray:
    """Matrix exponential of a stack of anti-Hermitian matrices via eigh of iX."""
    H = 1j * X
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _matrices(A: Connection) -> list[np.ndarray]:
    return [A.alg.matrix(A.a.comps[(m,)]) for m in range(4)]


def gauge_action(U: GaugeTransform, A: Connection, derivs: list[np.ndarray] | None = None) -> Connection:
    """B_mu = U^{-1} d_mu U + U^{-1} A_mu U (finite-difference d_mu U unless supplied)."""
    Ui = np.linalg.inv(U.U)
    mats = _matrices(A)
    comps = []
    for mu in range(4):
        dU = U.derivative(mu) if derivs is None else derivs[mu]
        comps.append(A.alg.coeffs(Ui @ dU + Ui @ mats[mu] @ U.U))
    return Connection(one_form(comps, A.alg, A.grid))


def conjugate_form(U: GaugeTransform, form: GForm) -> GForm:
    """U^{-1} omega U componentwise."""
    Ui = np.linalg.inv(U.U)
    alg = form.alg
    return form._like({k: alg.coeffs(Ui @ alg.matrix(v) @ U.U) for k, v in form.comps.items()})


# ---------------------------------------------------------------------------
# temporal gauge

def _rk4_step(U: np.ndarray, v0: np.ndarray, vh: np.ndarray, v1: np.ndarray, k) -> np.ndarray:
    """One RK4 step of U' = -V U; k may be an array broadcast over columns."""
    k = np.asarray(k)[..., None, None]
    k1 = -v0 @ U
    k2 = -vh @ (U + 0.5 * k * k1)
    k3 = -vh @ (U + 0.5 * k * k2)
    k4 = -v1 @ (U + k * k3)
    return U + (k / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _spline_at(spline: CubicSpline, times: np.ndarray) -> np.ndarray:
    """Evaluate a time spline at a different time in every spatial column."""
    knots = spline.x
    idx = np.clip(np.searchsorted(knots, times, side="right") - 1, 0, len(knots) - 2)
    dt = times - knots[idx]
    c = spline.c  # (4, intervals, *cols, n, n)
    out = 0
    for j in range(4):
        cj = np.take_along_axis(c[j], idx[None, ..., None, None], axis=0)[0]
        out = out + cj * (dt ** (3 - j))[..., None, None]
    return out


def initial_surface(grid: Grid) -> np.ndarray:
    """psi(x) = |x| - 1 for every spatial column."""
    _, x, y, z = grid.mesh()
    return np.sqrt(x**2 + y**2 + z**2)[0] - 1.0


def temporal_gauge(V: Connection) -> tuple[Connection, GaugeTransform]:
    """Solve d_t U = -V_0 U with U = id on t = psi(x) = |x| - 1; return (U.V, U).

    Each spatial column starts at its own surface time. A fractional RK4 step
    reaches the first node at or above the surface (and the last node below
    it for the backward sweep); V_0 between nodes comes from a cubic spline
    in time. The time component of U.V uses d_t U = -V_0 U exactly, so it
    vanishes up to rounding; spatial components use the grid stencil.
    """
    grid = V.grid
    alg = V.alg
    t = grid.coords(0)
    psi = initial_surface(grid)
    if psi.min() < t[0] - 1e-12 or psi.max() > t[-1] + 1e-12:
        raise GaugeError("grid does not cover the initial surface t = |x| - 1")
    V0 = alg.matrix(V.a.comps[(0,)])  # (nt, nx, ny, nz, n, n)
    spline = CubicSpline(t, V0, axis=0)
    n = alg.n
    cols = grid.shape[1:]
    U = np.empty(grid.shape + (n, n), dtype=complex)
    eye = np.broadcast_to(np.eye(n, dtype=complex), cols + (n, n))

    up = np.clip(np.searchsorted(t, psi - 1e-12, side="left"), 0, len(t) - 1)   # first node >= psi
    down = up - 1                                                                # last node < psi

    def fractional(target_idx):
        tt = t[np.clip(target_idx, 0, len(t) - 1)]
        k = tt - psi
        mid = psi + 0.5 * k
        return _rk4_step(eye.copy(), _spline_at(spline, psi), _spline_at(spline, mid),
                         _spline_at(spline, tt), k)

    start_up = fractional(up)
    start_down = fractional(down)
    tau = grid.tau
    mids = spline(t[:-1] + 0.5 * tau)
    # forward sweep: nodes i >= up
    cur = eye.copy()
    for i in range(len(t)):
        at_start = (up == i)[..., None, None]
        cur = np.where(at_start, start_up, cur)
        active = (i >= up)[..., None, None]
        U[i] = np.where(active, cur, 0)
        if i + 1 < len(t):
            nxt = _rk4_step(cur, V0[i], mids[i], V0[i + 1], tau)
            cur = np.where(active, nxt, cur)
    # backward sweep: nodes i <= down
    cur = eye.copy()
    for i in range(len(t) - 1, -1, -1):
        at_start = (down == i)[..., None, None]
        cur = np.where(at_start, start_down, cur)
        active = (i <= down)[..., None, None]
        U[i] = np.where(active, cur, U[i])
        if i > 0:
            prev = _rk4_step(cur, V0[i], mids[i - 1], V0[i - 1], -tau)
            cur = np.where(active, prev, cur)

    transform = GaugeTransform(U, grid)
    dt_U = -V0 @ U
    derivs = [dt_U] + [transform.derivative(mu) for mu in (1, 2, 3)]
    return gauge_action(transform, V, derivs), transform


# ---------------------------------------------------------------------------
# residuals

def relative_lorenz_residual(A: Connection, V: Connection) -> GForm:
    """d_A^*(V - A); zero iff V is in Lorenz gauge relative to A."""
    return d_A_star(A, V.a - A.a)


def stabilizer_check(U: GaugeTransform, A: Connection, mask: np.ndarray | None = None) -> float:
    """max |d_mu U - (A_mu U - U A_mu)|; zero when U fixes A."""
    mats = _matrices(A)
    worst = 0.0
    for mu in range(4):
        r = np.abs(U.derivative(mu) - (mats[mu] @ U.U - U.U @ mats[mu])).max(axis=(-1, -2))
        if mask is not None:
            r = r[mask]
        worst = max(worst, float(r.max(initial=0.0)))
    return worst


# ---------------------------------------------------------------------------
# snapshots

def save_csv(U: GaugeTransform, path) -> Path:
    """Columns t_idx, x_idx, y_idx, z_idx, then re/im of each matrix entry (row major)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = U.n
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t_idx", "x_idx", "y_idx", "z_idx"]
        header += [f"{part}_{i + 1}{j + 1}" for i in range(n) for j in range(n) for part in ("re", "im")]
        writer.writerow(header)
        for pos in np.ndindex(*U.grid.shape):
            row = list(pos)
            for z in U.U[pos].ravel():
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)
    return path


def load_csv(path, grid: Grid, n: int) -> GaugeTransform:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    U = np.zeros(grid.shape + (n, n), dtype=complex)
    pos = data[:, :4].astype(int)
    vals = data[:, 4::2] + 1j * data[:, 5::2]
    U[tuple(pos.T)] = vals.reshape(-1, n, n)
    return GaugeTransform(U, grid)
