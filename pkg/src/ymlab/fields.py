"""Closed-form smooth algebra-valued fields with exact derivatives.

A ``TrigField`` has ``ncomp`` components (1 for a 0-form, 4 for a 1-form),
each a sum of plane-wave sines ``amp * sin(k . x + phase)`` with coefficients
in the algebra basis. Values and derivatives of any order are exact, which
makes these fields the reference side of discretization checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TrigField:
    amps: np.ndarray     # (modes, ncomp, d)
    waves: np.ndarray    # (modes, 4)
    phases: np.ndarray   # (modes,)
    offset: np.ndarray | None = None  # (ncomp, d) constant part

    @staticmethod
    def random(rng: np.random.Generator, d: int, ncomp: int = 4, modes: int = 3,
               amplitude: float = 0.5, wavenumber: float = 1.5) -> "TrigField":
        return TrigField(amps=amplitude * rng.standard_normal((modes, ncomp, d)) / np.sqrt(modes),
                         waves=wavenumber * rng.uniform(-1, 1, (modes, 4)),
                         phases=rng.uniform(0, 2 * np.pi, modes),
                         offset=None)

    @property
    def ncomp(self) -> int:
        return self.amps.shape[1]

    def _arg(self, points: np.ndarray) -> np.ndarray:
        return np.einsum("...m,jm->...j", points, self.waves) + self.phases

    def value(self, points: np.ndarray) -> np.ndarray:
        """Shape points.shape[:-1] + (ncomp, d)."""
        out = np.einsum("...j,jca->...ca", np.sin(self._arg(points)), self.amps)
        if self.offset is not None:
            out = out + self.offset
        return out

    def derivative(self, points: np.ndarray, *axes: int) -> np.ndarray:
        """Mixed partial derivative along the given axes."""
        if not axes:
            return self.value(points)
        order = len(axes)
        # d^n/dx^n sin(u) = sin(u + n pi/2)
        trig = np.sin(self._arg(points) + order * np.pi / 2)
        factor = np.prod(self.waves[:, list(axes)], axis=1)
        return np.einsum("...j,j,jca->...ca", trig, factor, self.amps)


def grid_points(grid) -> np.ndarray:
    """All grid points as an array of shape grid.shape + (4,)."""
    axes = [grid.coords(mu) for mu in range(4)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)
