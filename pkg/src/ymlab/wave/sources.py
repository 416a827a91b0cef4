"""Smooth compactly supported sources for the spatial components J_1, J_2, J_3."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..forms import Grid


class SourceError(ValueError):
    pass


def bump(u: np.ndarray, steepness: float = 1.0) -> np.ndarray:
    """C-infinity bump exp(c (1 - 1/(1 - u^2))) on |u| < 1, peak value 1 at u = 0.

    Larger c makes the profile more Gaussian; the high derivatives near
    |u| = 1 are then damped by the tiny tail values.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(steepness * (1.0 - 1.0 / (1.0 - u[inside] ** 2)))
    return out


def bump_slope(u: np.ndarray, steepness: float = 1.0) -> np.ndarray:
    """Derivative of ``bump``; a smooth pulse with zero time integral."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    ui = u[inside]
    out[inside] = -2 * steepness * ui / (1 - ui**2) ** 2 * np.exp(steepness * (1.0 - 1.0 / (1.0 - ui**2)))
    return out


@dataclass(frozen=True)
class Bump:
    """profile(t, x) = bump(|x - center_x| / radius) * bump((t - center_t) / duration).

    ``coeffs[j]`` is the algebra coefficient vector of J_{j+1}. With
    ``zero_mean`` the time factor is ``bump_slope`` instead, so the source
    integrates to zero in time and leaves no static charge J_0 behind.
    The default steepness 3 keeps fourth derivatives small enough for
    second-order convergence to show on 12 to 48 point grids.
    """

    center: tuple[float, float, float, float]
    radius: float
    duration: float
    coeffs: tuple  # 3 vectors of length d
    zero_mean: bool = False
    steepness: float = 3.0

    def support_ok(self, margin: float = 0.0) -> bool:
        """Support strictly inside the diamond |x| < t + 1, |x| < 1 - t."""
        t0, x0 = self.center[0], np.asarray(self.center[1:])
        reach = np.linalg.norm(x0) + self.radius + margin
        return bool(reach < t0 - self.duration + 1 and reach < 1 - (t0 + self.duration))

    def profile(self, t: float, space: np.ndarray) -> np.ndarray:
        rad = np.linalg.norm(space - np.asarray(self.center[1:]), axis=-1) / self.radius
        time = bump_slope if self.zero_mean else bump
        c = self.steepness
        return bump(rad, c) * float(time(np.array((t - self.center[0]) / self.duration), c))

    def active(self, t: float) -> bool:
        return abs(t - self.center[0]) < self.duration


@dataclass
class SourceSpec:
    """Sum of bumps scaled by an amplitude epsilon."""

    bumps: Sequence[Bump]
    epsilon: float = 1.0
    d: int = 3
    _space: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for b in self.bumps:
            if not b.support_ok():
                raise SourceError(f"source bump at {b.center} is not strictly inside the causal diamond")
            if np.asarray(b.coeffs).shape != (3, self.d):
                raise SourceError("each bump needs three coefficient vectors of the algebra dimension")

    def scaled(self, epsilon: float) -> "SourceSpec":
        return SourceSpec(self.bumps, epsilon, self.d)

    def __add__(self, other: "SourceSpec") -> "SourceSpec":
        """Superpose two families (amplitudes folded into the coefficients)."""
        def fold(spec):
            return [Bump(b.center, b.radius, b.duration,
                         tuple(tuple(spec.epsilon * np.asarray(c)) for c in b.coeffs), b.zero_mean,
                         b.steepness)
                    for b in spec.bumps]
        return SourceSpec(fold(self) + fold(other), 1.0, self.d)

    def _grid_space(self, grid: Grid) -> np.ndarray:
        key = (grid.shape, grid.spacing, grid.origin)
        if key not in self._space:
            ax = [grid.coords(m) for m in (1, 2, 3)]
            self._space[key] = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)
        return self._space[key]

    def spatial(self, grid: Grid, n: int) -> np.ndarray:
        """J_j at time index n: array (3, nx, ny, nz, d)."""
        t = grid.coords(0)[n]
        out = np.zeros((3,) + grid.shape[1:] + (self.d,))
        if self.epsilon == 0:
            return out
        space = self._grid_space(grid)
        for b in self.bumps:
            if not b.active(t):
                continue
            prof = b.profile(t, space)
            for j in range(3):
                out[j] += self.epsilon * prof[..., None] * np.asarray(b.coeffs[j], dtype=float)
        return out

    def sup_norm(self) -> float:
        return float(abs(self.epsilon) * max((np.linalg.norm(np.asarray(b.coeffs), axis=1).max()
                                              for b in self.bumps), default=0.0))

    def support_radius(self) -> float:
        return max((np.linalg.norm(b.center[1:]) + b.radius for b in self.bumps), default=0.0)

    def start_time(self) -> float:
        return min((b.center[0] - b.duration for b in self.bumps), default=np.inf)

    @staticmethod
    def zero(d: int) -> "SourceSpec":
        return SourceSpec([], 0.0, d)


def single_bump(d: int, coeffs, center=(-0.15, 0.0, 0.0, 0.0), radius: float = 0.4,
                duration: float = 0.4, epsilon: float = 1.0, zero_mean: bool = False,
                steepness: float = 3.0) -> SourceSpec:
    """One bump; the default is about as wide as the diamond allows, which keeps
    its derivatives moderate on coarse grids."""
    return SourceSpec([Bump(tuple(center), radius, duration, tuple(map(tuple, np.asarray(coeffs, float))),
                            zero_mean, steepness)], epsilon, d)
