"""Diagnostics for solutions of the relative Lorenz system.

Most checks run on the fly through ``SolverMonitor`` so fine grids never
store full histories. Energy and twin-run checks work on stored histories of
moderate size.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from ..forms import (Connection, Grid, d_A_star_composition, derivatives, curvature, partial)
from .background import Background, ClosedFormBackground
from .operators import d_space_trailing as d_space
from .solver import LorenzSystem, WaveError, WaveState, march, solve_fixed_point
from .sources import SourceSpec


def radius_grid(grid: Grid, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    ax = [grid.coords(m) - center[m - 1] for m in (1, 2, 3)]
    x, y, z = np.meshgrid(*ax, indexing="ij")
    return np.sqrt(x**2 + y**2 + z**2)


def diamond_mask(grid: Grid, t: float, r: np.ndarray, margin: float) -> np.ndarray:
    return (r <= t + 1 - margin) & (r <= 1 - t - margin)


def compat_residual(system: LorenzSystem, m: int, W: np.ndarray, J0_next: np.ndarray,
                    J0: np.ndarray, J0_prev: np.ndarray) -> np.ndarray:
    """d_V^* J at level m with V = A + W; central difference in time."""
    ops = system.ops(m)
    dtJ0 = (J0_next - J0_prev) / (2 * system.tau)
    V0 = system.bg.slice(m).component(0) + W[0]
    lhs = dtJ0 + system.alg.bracket_coeffs(V0, J0)
    return lhs - ops.compat_rhs(system.source.spatial(system.grid, m), W)


class SolverMonitor:
    """Observer for ``march``: constraint, compatibility and leakage diagnostics.

    Level m = n - 1 is evaluated when level n arrives (central differences
    in time). The Lorenz residual d_A^*W and the compatibility residual
    d_V^*J are measured on the causal diamond shrunk by ``margin``. Leakage is
    the largest |W| beyond radius rho + (t - t_on) + 2h, with rho the source
    support radius and t_on its onset.
    """

    def __init__(self, system: LorenzSystem, margin: float = 0.15):
        self.system = system
        g = system.grid
        self.margin = margin
        self.r = radius_grid(g)
        self.rho = system.source.support_radius()
        self.t_on = system.source.start_time()
        self.rows: list[dict] = []
        self._J0: list[np.ndarray] = []
        self.leakage = 0.0
        self.constraint_max = 0.0
        self.compat_max = 0.0
        self._c2 = 0.0
        self._j2 = 0.0

    def _leak(self, t: float, W: np.ndarray) -> float:
        if not np.isfinite(self.t_on):
            return float(np.abs(W).max())
        far = self.r > self.rho + max(t - self.t_on, 0.0) + 2 * self.system.grid.h
        if not far.any():
            return 0.0
        return float(np.abs(W).max(axis=(0, -1))[far].max())

    def __call__(self, system: LorenzSystem, state: WaveState):
        g = system.grid
        n = state.n
        self.leakage = max(self.leakage, self._leak(g.coords(0)[n], state.W))
        self._J0 = (self._J0 + [state.J0])[-3:]
        if n < 2:
            return None
        m = n - 1
        t = g.coords(0)[m]
        vol = g.h**3 * g.tau
        Wt = (state.W - state.W_prev2) / (2 * g.tau)
        div = np.linalg.norm(system.ops(m).lorenz_divergence(state.W_prev, Wt), axis=-1)
        comp = np.linalg.norm(compat_residual(system, m, state.W_prev, *self._J0[::-1]), axis=-1)
        mask = diamond_mask(g, t, self.r, self.margin)
        c = float(div[mask].max(initial=0.0))
        j = float(comp[mask].max(initial=0.0))
        self.constraint_max = max(self.constraint_max, c)
        self.compat_max = max(self.compat_max, j)
        self._c2 += float((div[mask] ** 2).sum()) * vol
        self._j2 += float((comp[mask] ** 2).sum()) * vol
        W = state.W_prev
        grad2 = sum((d_space(W, j_, g.h) ** 2).sum() for j_ in (1, 2, 3))
        row = {
            "t": float(t),
            "max_W": float(np.abs(W).max()),
            "max_J0": float(np.abs(self._J0[1]).max()),
            "lorenz_residual": c,
            "compat_residual": j,
            "leakage": self._leak(t, W),
            "energy": float(((Wt**2).sum() + grad2) * g.h**3),
        }
        self.rows.append(row)
        return row

    def summary(self) -> dict:
        return {
            "constraint_max": self.constraint_max,
            "constraint_l2": float(np.sqrt(self._c2)),
            "compat_max": self.compat_max,
            "compat_l2": float(np.sqrt(self._j2)),
            "leakage": self.leakage,
        }


def monitored_run(system: LorenzSystem, margin: float = 0.15, keep: bool = False):
    mon = SolverMonitor(system, margin)
    run = march(system, keep=keep, observer=mon)
    return run, mon


def observed_order(hs: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


# ---------------------------------------------------------------------------
# light-cone localization

def cone_shell_fraction(Y: np.ndarray, grid: Grid, src: SourceSpec, n: int, pad: float | None = None) -> float:
    """Fraction of the energy density of Y (at level n) outside the shell
    swept by the source's forward light cone: r_in <= |x - c| <= r_out with
    r_out = radius + (t - t_on) + pad and r_in = (t - t_off) - radius - pad.
    """
    if len(src.bumps) != 1:
        raise WaveError("cone shell fraction needs a single-bump source")
    b = src.bumps[0]
    pad = 2 * grid.h if pad is None else pad
    t = grid.coords(0)[n]
    t_on, t_off = b.center[0] - b.duration, b.center[0] + b.duration
    r = radius_grid(grid, b.center[1:])
    dens = _density(Y, grid, n)
    shell = (r <= b.radius + (t - t_on) + pad) & (r >= (t - t_off) - b.radius - pad)
    total = dens.sum()
    return float(dens[~shell].sum() / total) if total > 0 else 0.0


def _density(Y: np.ndarray, grid: Grid, n: int) -> np.ndarray:
    Yt = (Y[n + 1] - Y[n - 1]) / (2 * grid.tau) if 0 < n < len(Y) - 1 else np.zeros_like(Y[n])
    dens = (Yt**2).sum(axis=(0, -1))
    for j in (1, 2, 3):
        dens = dens + (d_space(Y[n], j, grid.h) ** 2).sum(axis=(0, -1))
    return dens


# ---------------------------------------------------------------------------
# scalar reference

def kirchhoff(src: SourceSpec, comp: int, point: Sequence[float], rmax: float = 2.0,
              n_dir: int = 1200, n_rad: int = 400) -> np.ndarray:
    """Retarded solution of box u = J_comp at (t, x): (1/4pi) int J(t-|x-y|, y)/|x-y| dy.

    Written as int_0^inf s * mean_{|w|=1} J(t - s, x + s w) ds, with a
    Fibonacci sphere for the mean and Gauss-Legendre nodes in s.
    """
    t, x = point[0], np.asarray(point[1:], dtype=float)
    k = np.arange(n_dir) + 0.5
    polar = np.arccos(1 - 2 * k / n_dir)
    az = np.pi * (1 + 5**0.5) * k
    dirs = np.stack([np.sin(polar) * np.cos(az), np.sin(polar) * np.sin(az), np.cos(polar)], axis=-1)
    nodes, weights = np.polynomial.legendre.leggauss(n_rad)
    s = 0.5 * rmax * (nodes + 1)
    w = 0.5 * rmax * weights
    total = np.zeros(src.d)
    for si, wi in zip(s, w):
        ts = t - si
        pts = x + si * dirs
        acc = np.zeros(src.d)
        for b in src.bumps:
            if not b.active(ts):
                continue
            acc += src.epsilon * b.profile(ts, pts).mean() * np.asarray(b.coeffs[comp], float)
        total += wi * si * acc
    return total


# ---------------------------------------------------------------------------
# energy estimate

@dataclass
class EnergyReport:
    times: np.ndarray
    E: np.ndarray
    F: np.ndarray
    C: float
    bound_ok: bool
    radii: np.ndarray = field(default=None)


def energy_series(V: np.ndarray, U: np.ndarray, grid: Grid, R: float, n0: int = 1,
                  center=(0.0, 0.0, 0.0)) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """E(t) = sum over B(R - (t - t0)) of |d_t v|^2 + |grad v|^2 + |v|^2 + |grad u|^2 + |u|^2.

    ``V`` has shape (nt, 4, nx, ny, nz, d) and ``U`` (nt, nx, ny, nz, d).
    d_t v uses central differences, so the series runs over interior levels
    starting at ``n0 >= 1``; t0 is the time of level n0.
    """
    if n0 < 1:
        raise WaveError("the energy series starts at a level with a central time difference (n0 >= 1)")
    half = 0.5 * (grid.shape[1] - 1) * grid.h
    off = max(abs(grid.origin[m] + half - center[m - 1]) for m in (1, 2, 3))
    if R + off > half + 1e-12:
        raise WaveError(f"ball of radius {R} exits the grid (half width {half:.3f})")
    r = radius_grid(grid, center)
    t = grid.coords(0)
    times, E, radii = [], [], []
    for n in range(n0, V.shape[0] - 1):
        rad = R - (t[n] - t[n0])
        if rad < grid.h:
            break
        ball = r <= rad
        v, u = V[n], U[n]
        vt = (V[n + 1] - V[n - 1]) / (2 * grid.tau)
        dens = (vt**2).sum(axis=(0, -1)) + (v**2).sum(axis=(0, -1)) + (u**2).sum(axis=-1)
        for j in (1, 2, 3):
            dens = dens + (d_space(v, j, grid.h) ** 2).sum(axis=(0, -1)) + (d_space(u, j, grid.h) ** 2).sum(axis=-1)
        times.append(t[n] - t[n0])
        E.append(float(dens[ball].sum() * grid.h**3))
        radii.append(rad)
    return np.array(times), np.array(E), np.array(radii)


def gronwall_holds(times: np.ndarray, E: np.ndarray, F: np.ndarray, C: float, rtol: float = 1e-12) -> bool:
    """E(t) <= e^{Ct} E(0) + C int_0^t e^{C(t-s)} F(s) ds at every sample (trapezoid rule)."""
    forced = bool(np.any(F))
    for i, t in enumerate(times):
        integral = 0.0
        with np.errstate(over="ignore"):
            if forced and i > 0:
                integral = trapezoid(np.exp(C * (t - times[: i + 1])) * F[: i + 1], times[: i + 1])
            bound = np.exp(C * t) * E[0] + C * integral
        if E[i] > bound * (1 + rtol) + 1e-300:
            return False
    return True


def fit_gronwall(times: np.ndarray, E: np.ndarray, F: np.ndarray | None = None, c_max: float = 1e3,
                 iters: int = 80) -> float:
    """Smallest C >= 0 satisfying the Gronwall bound, by bisection (inf if none up to c_max)."""
    F = np.zeros_like(E) if F is None else F
    if gronwall_holds(times, E, F, 0.0):
        return 0.0
    if not gronwall_holds(times, E, F, c_max):
        return float("inf")
    lo, hi = 0.0, c_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gronwall_holds(times, E, F, mid):
            hi = mid
        else:
            lo = mid
    return hi


def energy_report(V: np.ndarray, U: np.ndarray, grid: Grid, R: float, C_guess: float | None = None,
                  F: np.ndarray | None = None, n0: int = 1) -> EnergyReport:
    """E(t), F(t) over shrinking balls and the smallest Gronwall constant.

    With ``C_guess`` the bound is also checked for that constant.
    """
    times, E, radii = energy_series(V, U, grid, R, n0)
    F = np.zeros_like(E) if F is None else np.asarray(F)[: len(E)]
    C = fit_gronwall(times, E, F)
    ok = gronwall_holds(times, E, F, C if C_guess is None else C_guess)
    return EnergyReport(times, E, F, C, ok, radii)


def gronwall_experiment(n: int, bg_name: str = "su2-planewave", sigma: float = 0.35, speed: float = 5.0,
                        span: float = 0.6, R: float = 0.95, alg=None) -> EnergyReport:
    """Source-free run on [-1, 1]^3 over a time span from Gaussian data and the fitted constant.

    The initial velocity is ``speed`` times the initial field, which makes the
    zeroth-order term drive a clear early rise of E; without it the rise is a
    few grid-dependent percent and the fitted constant does not settle.
    """
    from ..lie import gell_mann_basis
    from .background import preset
    alg = alg or gell_mann_basis(2)
    h = 2.0 / (n - 1)
    grid = Grid((int(round(span / (h / 2))) + 1, n, n, n), (h / 2, h, h, h), (-span, -1.0, -1.0, -1.0))
    system = LorenzSystem(preset(bg_name, grid, alg), SourceSpec.zero(alg.d), grid)
    prof = np.exp(-(radius_grid(grid) / sigma) ** 2)[..., None]
    W0 = np.zeros((4, n, n, n, alg.d))
    e = np.eye(alg.d)
    W0[1] = prof * (0.2 * e[0] + 0.1 * e[-1])
    W0[3] = prof * 0.3 * e[1 % alg.d]
    J00 = prof * 0.4 * e[-1]
    run = march(system, state=system.initial_state(W0, speed * W0, J00), keep=True)
    return energy_report(run.W, run.J0, grid, R)


# ---------------------------------------------------------------------------
# twin runs and the alternative background extension

def smooth_step(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C-infinity step (0 for u <= 0, 1 for u >= 1) and its derivative."""
    u = np.asarray(u, float)

    def f(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos])
        return out

    def df(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos]) / v[pos] ** 2
        return out

    a, b = f(u), f(1 - u)
    s = a / (a + b)
    ds = (df(u) * b + a * df(1 - u)) / (a + b) ** 2
    return s, ds


def alternative_extension(bg: ClosedFormBackground, delta: float = 0.3) -> ClosedFormBackground:
    """chi * A with chi = 1 on the ball t^2 + |x|^2 <= 1 (which contains the
    diamond) and chi = 0 beyond radius 1 + delta: a different extension of the
    same field outside the diamond."""
    value, deriv = bg._value, bg._deriv

    def chi(p):
        q = np.sqrt((p**2).sum(axis=-1))
        s, ds = smooth_step((1 + delta - q) / delta)
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = np.where(q[..., None] > 0, -ds[..., None] * p / (delta * np.maximum(q, 1e-300)[..., None]), 0.0)
        return s, grad

    def new_value(p):
        s, _ = chi(p)
        return s[..., None, None] * value(p)

    def new_deriv(p):
        s, grad = chi(p)
        return s[..., None, None, None] * deriv(p) + grad[..., :, None, None] * value(p)[..., None, :, :]

    return ClosedFormBackground(bg.alg, bg.grid, new_value, new_deriv, name=bg.name + "-cutoff")


def difference_energy(run_a, run_b, grid: Grid, R: float) -> np.ndarray:
    _, E, _ = energy_series(run_a.W - run_b.W, run_a.J0 - run_b.J0, grid, R)
    return E


@dataclass
class TwinReport:
    identical: float
    fixed_point: float
    extension: float
    fixed_point_iterations: int


def twin_runs(bg: Background, src: SourceSpec, grid: Grid, R: float = 0.95, tol: float = 1e-13,
              extension: Background | None = None) -> TwinReport:
    """Max over t of the difference energy between solutions with identical data.

    ``identical``: two independent marches. ``fixed_point``: march against
    the Picard iteration. ``extension``: march against a march on a background
    that differs only outside the diamond.
    """
    a = march(LorenzSystem(bg, src, grid), keep=True)
    b = march(LorenzSystem(bg, src, grid), keep=True)
    fp = solve_fixed_point(bg, src, grid, tol=tol)
    fp_run = type(a)(a.state, fp.W, fp.J0)
    out = [float(difference_energy(a, b, grid, R).max()), float(difference_energy(a, fp_run, grid, R).max())]
    if extension is not None:
        c = march(LorenzSystem(extension, src, grid), keep=True)
        out.append(float(difference_energy(a, c, grid, R).max()))
    else:
        out.append(float("nan"))
    return TwinReport(out[0], out[1], out[2], fp.iterations)


# ---------------------------------------------------------------------------
# temporal-gauge reduction

@dataclass
class TemporalResiduals:
    constraint: float
    reduced: float
    reduced2: float
    replay: float
    scale: float


def temporal_constraint_residuals(A: Connection, mask: np.ndarray | None = None,
                                  a0_tol: float = 1e-8) -> TemporalResiduals:
    """Residuals of the temporal-gauge constraint and reduced equations.

    J = d_A^* F_A comes from the composition star d_A star F_A. With
    div = d^a A_a (a = 1, 2, 3):
      constraint  d_0 div + [A^a, d_0 A_a] - J_0
      reduced     d_j div - d^al d_al A_j + N~_j - J_j
      reduced2    box d_t A_j + N_j - (d_t J_j - d_j J_0)
    ``replay`` compares reduced2 with d_0(reduced) - d_j(constraint).
    Max norms are taken over ``mask`` (default: two cells in from every face).
    """
    alg, grid = A.alg, A.grid
    comp = [A.a.comps[(m,)] for m in range(4)]
    if np.abs(comp[0]).max() > a0_tol:
        raise WaveError("connection is not in temporal gauge (A_0 != 0)")
    br = alg.bracket_coeffs
    J = d_A_star_composition(A, curvature(A))
    Jc = [J.comps[(m,)] for m in range(4)]

    def p(x, mu):
        return partial(x, mu, grid)

    dA = [[p(comp[a], mu) for a in range(4)] for mu in range(4)]   # dA[mu][a] = d_mu A_a
    div = sum(dA[a][a] for a in (1, 2, 3))
    constraint = p(div, 0) + sum(br(comp[a], dA[0][a]) for a in (1, 2, 3)) - Jc[0]

    def n_tilde(j):
        acc = -br(div, comp[j])
        for a in (1, 2, 3):
            acc = acc - 2 * br(comp[a], dA[a][j]) + br(comp[a], dA[j][a]) - br(comp[a], br(comp[a], comp[j]))
        return acc

    def box(x):
        return p(p(x, 0), 0) - sum(p(p(x, a), a) for a in (1, 2, 3))

    reduced, reduced2, replay = [], [], []
    for j in (1, 2, 3):
        nt_j = n_tilde(j)
        red = p(div, j) + box(comp[j]) + nt_j - Jc[j]
        N_j = p(nt_j, 0)
        for a in (1, 2, 3):
            N_j = N_j - br(dA[j][a], dA[0][a]) - br(comp[a], p(dA[0][a], j))
        red2 = box(dA[0][j]) + N_j - (p(Jc[j], 0) - p(Jc[0], j))
        reduced.append(red)
        reduced2.append(red2)
        replay.append(red2 - (p(red, 0) - p(constraint, j)))
    if mask is None:
        mask = grid.interior(2)

    def mx(arrs):
        return float(max(np.abs(a).max(axis=-1)[mask].max(initial=0.0) for a in arrs))

    scale = float(max(np.abs(c).max() for c in Jc)) if Jc else 0.0
    return TemporalResiduals(mx([constraint]), mx(reduced), mx(reduced2), mx(replay), scale)
