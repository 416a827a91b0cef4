"""Leapfrog solver for the relative Lorenz system with the J_0 compatibility ODE.

Unknowns are W (a g-valued 1-form) and J_0; the spatial source J_1..J_3 is
prescribed. On each level

    W^{n+1} = 2 W^n - W^{n-1} + tau^2 (J^n - R_lin(W^n) - N(W^n)),

with d_t W^n from the backward three-level formula, and J_0 advances by the
trapezoidal rule applied to

    d_t J_0 + [A_0 + W_0, J_0] = d^j J_j + [A^j + W^j, J_j].

Faces of the spatial box are held at zero. Both updates are polynomial in
(W, J_0), so the linearized chain below is the exact polarization of the
discrete scheme: the epsilon-derivatives of discrete solutions coincide with
the discrete linearized solutions up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from ..forms import CFL_BOUND, Connection, Grid
from .background import Background, GridBackground, ZeroBackground
from .operators import SliceOps
from .sources import SourceSpec


class WaveError(ValueError):
    pass


class CFLError(WaveError):
    pass


class NonContraction(WaveError):
    pass


AMPLITUDE_GUARD = 0.1


def check_cfl(grid: Grid) -> None:
    if grid.tau / grid.h > CFL_BOUND + 1e-12:
        raise CFLError(f"tau/h = {grid.tau / grid.h:.4f} exceeds the CFL bound 1/sqrt(3) = {CFL_BOUND:.4f}")


def as_background(A, grid: Grid, alg=None) -> Background:
    if isinstance(A, Background):
        return A
    if isinstance(A, Connection):
        return GridBackground(A)
    if A is None:
        return ZeroBackground(alg, grid)
    raise TypeError(f"cannot use {type(A).__name__} as a background")


def zero_faces(X: np.ndarray) -> np.ndarray:
    """Dirichlet condition on the six faces of the spatial box (in place)."""
    for ax in (-4, -3, -2):
        idx = [slice(None)] * X.ndim
        idx[ax] = [0, -1]
        X[tuple(idx)] = 0.0
    return X


def bdf2(X: np.ndarray, X1: np.ndarray, X2: np.ndarray, tau: float) -> np.ndarray:
    """d_t X^n from levels n, n-1, n-2."""
    return (3 * X - 4 * X1 + X2) / (2 * tau)


def ad_matrix(alg, X: np.ndarray) -> np.ndarray:
    """Matrix of ad_X on coefficient vectors, shape X.shape + (d,)."""
    return np.einsum("...a,acb->...cb", X, alg.ad_matrices())


def trapezoid_step(alg, tau: float, y: np.ndarray, a_now: np.ndarray, a_next: np.ndarray,
                   g_now: np.ndarray, g_next: np.ndarray) -> np.ndarray:
    """One trapezoidal step of y' + [a, y] = g."""
    d = alg.d
    eye = np.eye(d)
    lhs = eye + 0.5 * tau * ad_matrix(alg, a_next)
    rhs = y - 0.5 * tau * alg.bracket_coeffs(a_now, y) + 0.5 * tau * (g_now + g_next)
    sol = np.linalg.solve(lhs.reshape(-1, d, d), rhs.reshape(-1, d, 1))
    return sol.reshape(y.shape)


@dataclass
class WaveState:
    """Levels n, n-1, n-2 of W (each (4, nx, ny, nz, d)) and J_0 at level n."""

    n: int
    W: np.ndarray
    W_prev: np.ndarray
    W_prev2: np.ndarray
    J0: np.ndarray

    @staticmethod
    def zero(grid: Grid, d: int, n: int = 0) -> "WaveState":
        z = np.zeros((4,) + grid.shape[1:] + (d,))
        return WaveState(n, z, z.copy(), z.copy(), np.zeros(grid.shape[1:] + (d,)))

    def velocity(self, tau: float) -> np.ndarray:
        return bdf2(self.W, self.W_prev, self.W_prev2, tau)

    def is_zero(self) -> bool:
        return not (np.any(self.W) or np.any(self.J0))


class LorenzSystem:
    """The relative Lorenz system on a grid for a background and a spatial source."""

    def __init__(self, A, source: SourceSpec, grid: Grid, alg=None, nonlinear: bool = True):
        check_cfl(grid)
        self.grid = grid
        self.bg = as_background(A, grid, alg)
        self.alg = self.bg.alg
        self.source = source
        self.nonlinear = nonlinear
        if source.d != self.alg.d:
            raise WaveError("source and algebra dimensions differ")

    @property
    def tau(self) -> float:
        return self.grid.tau

    @property
    def nt(self) -> int:
        return self.grid.shape[0]

    def ops(self, n: int) -> SliceOps:
        cache = self.__dict__.setdefault("_ops", {})
        if n not in cache:
            if len(cache) > 3:
                cache.pop(min(cache))
            cache[n] = SliceOps(self.alg, self.bg.slice(n), self.grid.h)
        return cache[n]

    def acceleration(self, n: int, W: np.ndarray, Wt: np.ndarray, J0: np.ndarray,
                     extra: np.ndarray | None = None) -> np.ndarray:
        """J^n - R_lin(W) - N(W): the discrete d_t^2 W."""
        acc = -self.ops(n).lin_plus_nonlinear(W, Wt, self.nonlinear)
        acc[0] += J0
        acc[1:] += self.source.spatial(self.grid, n)
        if extra is not None:
            acc += extra
        return acc

    def initial_state(self, W0: np.ndarray, Wt0: np.ndarray, J00: np.ndarray, n: int = 0) -> WaveState:
        """State at level n from Cauchy data, with Taylor ghost levels n-1, n-2."""
        acc = self.acceleration(n, W0, Wt0, J00)
        tau = self.tau
        g1 = W0 - tau * Wt0 + 0.5 * tau**2 * acc
        g2 = W0 - 2 * tau * Wt0 + 2 * tau**2 * acc
        return WaveState(n, W0.copy(), g1, g2, J00.copy())

    def j0_forcing(self, n: int, W: np.ndarray) -> np.ndarray:
        return self.ops(n).compat_rhs(self.source.spatial(self.grid, n), W if self.nonlinear else None)

    def step(self, state: WaveState) -> WaveState:
        n, tau = state.n, self.tau
        if n + 1 >= self.nt:
            raise WaveError("stepping past the last grid level")
        Wt = state.velocity(tau)
        acc = self.acceleration(n, state.W, Wt, state.J0)
        W1 = zero_faces(2 * state.W - state.W_prev + tau**2 * acc)
        A0, A1 = self.bg.slice(n).component(0), self.bg.slice(n + 1).component(0)
        if self.nonlinear:
            A0, A1 = A0 + state.W[0], A1 + W1[0]
        J1 = trapezoid_step(self.alg, tau, state.J0, A0, A1,
                            self.j0_forcing(n, state.W), self.j0_forcing(n + 1, W1))
        if not (np.all(np.isfinite(W1)) and np.all(np.isfinite(J1))):
            raise WaveError(f"non-finite values at time level {n + 1}")
        return WaveState(n + 1, W1, state.W, state.W_prev, J1)


def step_lorenz_system(A, state: WaveState, src: SourceSpec, grid: Grid | None = None) -> WaveState:
    """Advance one level. ``A`` is a Background or a Connection on ``grid``."""
    if grid is None:
        grid = A.grid
    return LorenzSystem(A, src, grid).step(state)


@dataclass
class Run:
    """Output of a march: final state, optional histories, observer records."""

    state: WaveState
    W: np.ndarray | None = None      # (nt, 4, nx, ny, nz, d)
    J0: np.ndarray | None = None     # (nt, nx, ny, nz, d)
    records: list = field(default_factory=list)


def march(system: LorenzSystem, state: WaveState | None = None, steps: int | None = None,
          keep: bool = False, observer: Callable | None = None) -> Run:
    """Time-march from ``state`` (zero data at level 0 by default).

    ``observer(system, state)`` is called on every level, including the
    first; non-None return values are collected in ``Run.records``.
    """
    state = state or WaveState.zero(system.grid, system.alg.d)
    last = system.nt - 1 if steps is None else min(system.nt - 1, state.n + steps)
    Ws, Js, records = [], [], []

    def visit(s):
        if keep:
            Ws.append(s.W)
            Js.append(s.J0)
        if observer is not None:
            rec = observer(system, s)
            if rec is not None:
                records.append(rec)

    visit(state)
    while state.n < last:
        state = system.step(state)
        visit(state)
    return Run(state, np.stack(Ws) if keep else None, np.stack(Js) if keep else None, records)


# ---------------------------------------------------------------------------
# linear solves and the fixed-point scheme

def linear_solve(system: LorenzSystem, f1: Callable[[int], np.ndarray],
                 f2: Callable[[int], np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Solve Lin(Y) = f1 + rho dx^0 with d_t rho + [A_0, rho] = f2, zero past.

    Lin is the linear part box_A + star[., star F_A] of the discrete scheme.
    ``f1(n)`` has shape (4, nx, ny, nz, d), ``f2(n)`` shape (nx, ny, nz, d).
    Returns histories Y (nt, 4, ...) and rho (nt, ...).
    """
    g, alg, tau = system.grid, system.alg, system.tau
    nt = system.nt
    shape = (4,) + g.shape[1:] + (alg.d,)
    Y = np.zeros((nt,) + shape)
    rho = np.zeros((nt,) + shape[1:])
    zero = np.zeros(shape)
    f2_now = f2(0)
    for n in range(nt - 1):
        Yp = Y[n - 1] if n >= 1 else zero
        Yp2 = Y[n - 2] if n >= 2 else zero
        Yt = bdf2(Y[n], Yp, Yp2, tau)
        acc = -system.ops(n).linear(Y[n], Yt) + f1(n)
        acc[0] += rho[n]
        Y[n + 1] = zero_faces(2 * Y[n] - Yp + tau**2 * acc)
        f2_next = f2(n + 1)
        rho[n + 1] = trapezoid_step(alg, tau, rho[n], system.bg.slice(n).component(0), system.bg.slice(n + 1).component(0),
                                    f2_now, f2_next)
        f2_now = f2_next
        if not np.all(np.isfinite(Y[n + 1])):
            raise WaveError(f"non-finite values at time level {n + 1}")
    return Y, rho


def _velocity_history(Y: np.ndarray, tau: float) -> Callable[[int], np.ndarray]:
    def vel(n):
        z = np.zeros_like(Y[0])
        return bdf2(Y[n], Y[n - 1] if n >= 1 else z, Y[n - 2] if n >= 2 else z, tau)
    return vel


def amplitude_guard(src: SourceSpec, grid: Grid) -> float:
    """The contraction proxy ||J'||_inf * T^2 with T the time span of the grid."""
    T = grid.tau * (grid.shape[0] - 1)
    return src.sup_norm() * T * T


@dataclass
class FixedPointResult:
    W: np.ndarray
    J0: np.ndarray
    iterations: int
    differences: list[float]
    guard: float


def solve_fixed_point(A, src: SourceSpec, grid: Grid, tol: float = 1e-12, max_iter: int = 50,
                      guard: float = AMPLITUDE_GUARD, alg=None) -> FixedPointResult:
    """Picard iteration u <- S K(u) for u = (W, J_0).

    K moves the nonlinear terms to the right-hand side using the previous
    iterate; S is ``linear_solve``. Stops when successive iterates differ by
    less than ``tol`` in max norm.
    """
    system = LorenzSystem(A, src, grid, alg)
    value = amplitude_guard(src, grid)
    if guard is not None and value > guard:
        raise NonContraction(f"source amplitude {value:.3g} = |J'| T^2 exceeds the contraction guard {guard}")
    nt, tau = system.nt, system.tau
    shape = (4,) + grid.shape[1:] + (system.alg.d,)
    W = np.zeros((nt,) + shape)
    J0 = np.zeros((nt,) + shape[1:])
    diffs: list[float] = []
    br = system.alg.bracket_coeffs
    for it in range(1, max_iter + 1):
        vel = _velocity_history(W, tau)

        def f1(n, W=W, vel=vel):
            out = np.zeros(shape)
            out[1:] = src.spatial(grid, n)
            if np.any(W[n]):
                out -= system.ops(n).nonlinear(W[n], vel(n))
            return out

        def f2(n, W=W, J0=J0):
            ops = system.ops(n)
            return ops.compat_rhs(src.spatial(grid, n), W[n]) - br(W[n][0], J0[n])

        Wn, Jn = linear_solve(system, f1, f2)
        diff = float(max(np.abs(Wn - W).max(), np.abs(Jn - J0).max()))
        diffs.append(diff)
        W, J0 = Wn, Jn
        if diff < tol:
            return FixedPointResult(W, J0, it, diffs, value)
        if not np.isfinite(diff) or diff > 1e6 or (len(diffs) >= 4 and diffs[-1] > diffs[-2] > diffs[-3] > diffs[-4]):
            raise NonContraction(f"Picard iteration diverges (differences {diffs[-4:]})")
    raise NonContraction(f"no convergence within {max_iter} iterations (last difference {diffs[-1]:.3g})")


# ---------------------------------------------------------------------------
# linearized chain

def _quad_hist(system: LorenzSystem, X: np.ndarray, Z: np.ndarray, n: int) -> np.ndarray:
    vx, vz = _velocity_history(X, system.tau), _velocity_history(Z, system.tau)
    return system.ops(n).quadratic(X[n], vx(n), Z[n], vz(n))


def linearized_solve(A, sources: Sequence[SourceSpec], grid: Grid, order: int = 3,
                     alg=None) -> dict[tuple[int, ...], np.ndarray]:
    """Y_(k), Y_(kl), Y_(123): epsilon-derivatives of W at epsilon = 0.

    The spatial source is sum_k eps_k J_(k). Each level solves
    Lin(Y) = -(nonlinear terms from lower orders) + rho dx^0 with rho from
    the matching derivative of the J_0 equation. Returns a dict of W
    histories keyed by sorted index tuples; rho histories are under
    ("rho",) + key.
    """
    if order not in (1, 2, 3):
        raise WaveError("order must be 1, 2 or 3")
    if order == 3 and len(sources) != 3:
        raise WaveError("the third-order term needs exactly three source families")
    if order == 2 and len(sources) < 2:
        raise WaveError("second-order terms need at least two source families")
    system = LorenzSystem(A, SourceSpec.zero(sources[0].d), grid, alg, nonlinear=False)
    br = system.alg.bracket_coeffs
    out: dict[tuple, np.ndarray] = {}
    shape = (4,) + grid.shape[1:] + (system.alg.d,)

    def J(k, n):
        return sources[k].spatial(grid, n)

    for k in range(len(sources)):
        def f1(n, k=k):
            out1 = np.zeros(shape)
            out1[1:] = J(k, n)
            return out1
        Y, rho = linear_solve(system, f1, lambda n, k=k: system.ops(n).compat_rhs(J(k, n)))
        out[(k,)], out[("rho", k)] = Y, rho
    if order == 1:
        return out

    def need(key):
        if key not in out:
            raise WaveError(f"missing lower-order input {key}")
        return out[key]

    pairs = [(k, l) for k in range(len(sources)) for l in range(k + 1, len(sources))]
    for k, l in pairs:
        Yk, Yl, rk, rl = need((k,)), need((l,)), need(("rho", k)), need(("rho", l))

        def f1(n, Yk=Yk, Yl=Yl):
            return -(_quad_hist(system, Yk, Yl, n) + _quad_hist(system, Yl, Yk, n))

        def f2(n, k=k, l=l, Yk=Yk, Yl=Yl, rk=rk, rl=rl):
            acc = -br(Yk[n][0], rl[n]) - br(Yl[n][0], rk[n])
            for j in (1, 2, 3):
                acc = acc + br(Yl[n][j], J(k, n)[j - 1]) + br(Yk[n][j], J(l, n)[j - 1])
            return acc

        Y, rho = linear_solve(system, f1, f2)
        out[(k, l)], out[("rho", k, l)] = Y, rho
    if order == 2:
        return out

    splits = [((0, 1), 2), ((0, 2), 1), ((1, 2), 0)]

    def f1(n):
        acc = np.zeros(shape)
        for kl, m in splits:
            acc -= _quad_hist(system, need(kl), need((m,)), n) + _quad_hist(system, need((m,)), need(kl), n)
        ops = system.ops(n)
        for p in permutations(range(3)):
            acc -= ops.cubic(need((p[0],))[n], need((p[1],))[n], need((p[2],))[n])
        return acc

    def f2(n):
        acc = np.zeros(shape[1:])
        for kl, m in splits:
            Ykl, Ym = need(kl)[n], need((m,))[n]
            acc = acc - br(Ykl[0], need(("rho", m))[n]) - br(Ym[0], need(("rho",) + kl)[n])
            for j in (1, 2, 3):
                acc = acc + br(Ykl[j], J(m, n)[j - 1])
        return acc

    Y, rho = linear_solve(system, f1, f2)
    out[(0, 1, 2)], out[("rho", 0, 1, 2)] = Y, rho
    return out


def run_family(A, sources: Sequence[SourceSpec], eps: Sequence[float], grid: Grid, alg=None,
               keep: bool = True) -> Run:
    """Nonlinear march with spatial source sum_k eps_k J_(k)."""
    total = sources[0].scaled(eps[0])
    for s, e in zip(sources[1:], eps[1:]):
        total = total + s.scaled(e)
    return march(LorenzSystem(A, total, grid, alg), keep=keep)
