"""Parallel transport along polygonal space-time paths.

The principal transport solves U' + <A, gamma'> U = 0 with U(0) = id, and the
adjoint transport solves W' + [<A, gamma'>, W] = 0 with W(0) = b; here
<A, v> = A_mu v^mu. Both use classical RK4 with a fixed number of steps per
segment. The principal integrator projects back onto the unitary group after
every step (polar factor from an SVD).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .fields import TrigField
from .forms import Connection, Grid
from .lie import AlgebraElement, GroupElement, LieAlgebra

LIGHTLIKE_RTOL = 1e-9
DEFAULT_STEPS = 400


class TransportError(ValueError):
    pass


class SamplerExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# connections that can be evaluated anywhere

class PointConnection:
    """A connection that can be evaluated at arbitrary points.

    ``coeffs(points)`` returns shape points.shape[:-1] + (4, d).
    """

    def __init__(self, alg: LieAlgebra, fn: Callable[[np.ndarray], np.ndarray]):
        self.alg = alg
        self._fn = fn

    def coeffs(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(points, dtype=float)), dtype=float)

    def matrices(self, points: np.ndarray) -> np.ndarray:
        """Matrices A_mu at the points: shape (..., 4, n, n)."""
        return self.alg.matrix(self.coeffs(points))

    @staticmethod
    def zero(alg: LieAlgebra) -> "PointConnection":
        return PointConnection(alg, lambda p: np.zeros(p.shape[:-1] + (4, alg.d)))

    @staticmethod
    def constant(alg: LieAlgebra, comps: np.ndarray) -> "PointConnection":
        comps = np.asarray(comps, dtype=float).reshape(4, alg.d)
        return PointConnection(alg, lambda p: np.broadcast_to(comps, p.shape[:-1] + (4, alg.d)))

    @staticmethod
    def from_field(alg: LieAlgebra, f: TrigField) -> "PointConnection":
        return PointConnection(alg, f.value)

    @staticmethod
    def from_grid(A: Connection) -> "PointConnection":
        """Multilinear interpolation of a grid connection."""
        grid: Grid = A.grid
        values = np.stack([A.a.comps[(m,)] for m in range(4)], axis=-2)
        interp = RegularGridInterpolator([grid.coords(m) for m in range(4)], values,
                                         method="linear", bounds_error=True)
        return PointConnection(A.alg, interp)

    def gauge(self, u: Callable[[np.ndarray], np.ndarray],
              du: Callable[[np.ndarray], np.ndarray]) -> "PointConnection":
        """B_mu = U^{-1} d_mu U + U^{-1} A_mu U for a closed-form gauge map.

        ``u(points)`` gives (..., n, n) and ``du(points)`` gives (..., 4, n, n).
        """
        alg = self.alg

        def fn(points):
            U = u(points)
            Ui = np.linalg.inv(U)[..., None, :, :]
            B = Ui @ du(points) + Ui @ self.matrices(points) @ U[..., None, :, :]
            return alg.coeffs(B)

        return PointConnection(alg, fn)


def as_point_connection(A) -> PointConnection:
    if isinstance(A, PointConnection):
        return A
    if isinstance(A, Connection):
        return PointConnection.from_grid(A)
    raise TypeError(f"cannot evaluate {type(A).__name__} along paths")


# ---------------------------------------------------------------------------
# paths

@dataclass(frozen=True)
class Path:
    """Polyline through space-time points, affinely parametrized per segment.

    Segment i runs over a parameter interval of length ``durations[i]``
    (default 1), so the velocity is (p_{i+1} - p_i) / durations[i].
    """

    points: tuple
    durations: tuple | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4 or len(pts) < 2:
            raise TransportError("a path needs at least two space-time points")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0):
            raise TransportError("consecutive path points must be distinct")
        object.__setattr__(self, "points", tuple(map(tuple, pts)))
        if self.durations is None:
            object.__setattr__(self, "durations", (1.0,) * (len(pts) - 1))
        elif len(self.durations) != len(pts) - 1 or min(self.durations) <= 0:
            raise TransportError("need one positive duration per segment")

    @staticmethod
    def segment(p, q, duration: float = 1.0) -> "Path":
        return Path((tuple(p), tuple(q)), (duration,))

    def segments(self):
        pts = np.asarray(self.points)
        for i, T in enumerate(self.durations):
            yield pts[i], pts[i + 1], T

    def reversed(self) -> "Path":
        return Path(self.points[::-1], self.durations[::-1])

    def __add__(self, other: "Path") -> "Path":
        if not np.allclose(self.points[-1], other.points[0]):
            raise TransportError("paths do not join")
        return Path(self.points + other.points[1:], self.durations + other.durations)


@dataclass(frozen=True)
class BrokenTriple:
    """Points x < y < z joined by future lightlike segments x -> y -> z."""

    x: tuple
    y: tuple
    z: tuple
    tol: float = field(default=LIGHTLIKE_RTOL, compare=False)

    def __post_init__(self):
        for a, b, name in ((self.x, self.y, "x->y"), (self.y, self.z, "y->z")):
            dv = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
            if dv[0] <= 0:
                raise TransportError(f"segment {name} is not future pointing")
            if abs(np.linalg.norm(dv[1:]) - dv[0]) > self.tol * dv[0]:
                raise TransportError(f"segment {name} is not lightlike")

    def first(self) -> Path:
        return Path.segment(self.x, self.y)

    def second(self) -> Path:
        return Path.segment(self.y, self.z)

    def to_record(self) -> dict:
        return {"x": list(map(float, self.x)), "y": list(map(float, self.y)),
                "z": list(map(float, self.z))}


# ---------------------------------------------------------------------------
# integrators

def project_unitary(U: np.ndarray) -> np.ndarray:
    """Nearest unitary matrix (polar factor)."""
    w, _, vh = np.linalg.svd(U)
    return w @ vh


def _segment_fields(A: PointConnection, p, q, T: float, steps: int) -> tuple[np.ndarray, float]:
    """<A, gamma'> as matrices at the RK4 nodes t_i, t_i + k/2, t_i + k."""
    k = T / steps
    ts = np.arange(2 * steps + 1) * (k / 2)
    vel = (np.asarray(q) - np.asarray(p)) / T
    pts = np.asarray(p)[None, :] + (ts / T)[:, None] * (np.asarray(q) - np.asarray(p))[None, :]
    mats = np.einsum("tmij,m->tij", A.matrices(pts), vel)
    return mats, k


def _check_steps(steps: int) -> None:
    if steps < 1:
        raise TransportError(f"step count must be >= 1, got {steps}")


def principal_transport(A, path: Path, steps: int = DEFAULT_STEPS,
                        project: bool = True) -> GroupElement:
    """U(T) for U' = -<A, gamma'> U, U(0) = id (steps per segment)."""
    _check_steps(steps)
    A = as_point_connection(A)
    U = np.eye(A.alg.n, dtype=complex)
    for p, q, T in path.segments():
        a, k = _segment_fields(A, p, q, T, steps)
        for i in range(steps):
            a0, ah, a1 = a[2 * i], a[2 * i + 1], a[2 * i + 2]
            k1 = -a0 @ U
            k2 = -ah @ (U + 0.5 * k * k1)
            k3 = -ah @ (U + 0.5 * k * k2)
            k4 = -a1 @ (U + k * k3)
            U = U + (k / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if project:
                U = project_unitary(U)
    return GroupElement(U)


def _adjoint_batch(A: PointConnection, path: Path, W: np.ndarray, steps: int) -> np.ndarray:
    """Integrate W' = -[<A, gamma'>, W] for a stack of matrices W (..., n, n)."""
    W = np.array(W, dtype=complex)
    for p, q, T in path.segments():
        a, k = _segment_fields(A, p, q, T, steps)

        def rhs(m, x):
            return -(m @ x - x @ m)

        for i in range(steps):
            a0, ah, a1 = a[2 * i], a[2 * i + 1], a[2 * i + 2]
            k1 = rhs(a0, W)
            k2 = rhs(ah, W + 0.5 * k * k1)
            k3 = rhs(ah, W + 0.5 * k * k2)
            k4 = rhs(a1, W + k * k3)
            W = W + (k / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return W


def adjoint_transport(A, path: Path, b: AlgebraElement, steps: int = DEFAULT_STEPS) -> AlgebraElement:
    """W(T) for W' + [<A, gamma'>, W] = 0, W(0) = b (integrated directly)."""
    _check_steps(steps)
    A = as_point_connection(A)
    return AlgebraElement(b.alg, _adjoint_batch(A, path, b.mat, steps))


def adjoint_matrix(A, path: Path, alg: LieAlgebra, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """The adjoint transport as a d x d matrix on basis coefficients (columns = images)."""
    _check_steps(steps)
    A = as_point_connection(A)
    return alg.coeffs(_adjoint_batch(A, path, alg.basis, steps)).T


def broken_transform(A, triple: BrokenTriple, rep: str = "principal", steps: int = DEFAULT_STEPS):
    """S_{z<-y<-x} = P_{z<-y} P_{y<-x} in the principal or adjoint representation."""
    A = as_point_connection(A)
    if rep == "principal":
        return principal_transport(A, triple.second(), steps) @ principal_transport(A, triple.first(), steps)
    if rep == "adjoint":
        return (adjoint_matrix(A, triple.second(), A.alg, steps)
                @ adjoint_matrix(A, triple.first(), A.alg, steps))
    raise TransportError(f"unknown representation {rep!r}")


def ad_of(U: GroupElement, alg: LieAlgebra) -> np.ndarray:
    """Matrix of b -> U b U^{-1} on basis coefficients."""
    Ui = np.linalg.inv(U.mat)
    return np.stack([alg.coeffs(U.mat @ alg.basis[a] @ Ui) for a in range(alg.d)], axis=1)


def centre_discrepancy(A, B, triple: BrokenTriple, steps: int = DEFAULT_STEPS) -> GroupElement:
    """u = U^B_{x<-y} U^B_{y<-z} U^A_{z<-y} U^A_{y<-x}."""
    A, B = as_point_connection(A), as_point_connection(B)
    uA = principal_transport(A, triple.second(), steps) @ principal_transport(A, triple.first(), steps)
    uB = (principal_transport(B, triple.first().reversed(), steps)
          @ principal_transport(B, triple.second().reversed(), steps))
    return uB @ uA


def centre_membership(u: GroupElement, alg: LieAlgebra) -> float:
    """max over basis b of |u b - b u| (zero iff u commutes with the algebra)."""
    return float(max(np.abs(u.mat @ e - e @ u.mat).max() for e in alg.basis))


def homotopy_diagnostic(A, B, triple: BrokenTriple, scales: Sequence[float] = (1.0, 0.5, 0.25, 0.125),
                        steps: int = DEFAULT_STEPS) -> list[dict]:
    """Distance of u to the identity as y, z are pulled back towards x.

    The triple is rescaled about x (which keeps both segments lightlike).
    Continuity forces |u - id| -> 0; with a finite centre the values of u are
    then pinned to id. No rate is implied.
    """
    x = np.asarray(triple.x)
    out = []
    for lam in scales:
        t = BrokenTriple(tuple(x), tuple(x + lam * (np.asarray(triple.y) - x)),
                         tuple(x + lam * (np.asarray(triple.z) - x)))
        u = centre_discrepancy(A, B, t, steps)
        out.append({"scale": float(lam),
                    "distance_to_identity": float(np.abs(u.mat - np.eye(u.mat.shape[0])).max())})
    return out


# ---------------------------------------------------------------------------
# sampling

def in_diamond(p: np.ndarray, strict: bool = True) -> bool:
    t, r = p[0], np.linalg.norm(p[1:])
    if strict:
        return bool(r < t + 1 and r < 1 - t)
    return bool(r <= t + 1 and r <= 1 - t)


def in_observation_set(p: np.ndarray, eps0: float) -> bool:
    return in_diamond(p) and bool(np.linalg.norm(p[1:]) < eps0)


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def _sample_vertex(rng: np.random.Generator, eps0: float) -> np.ndarray:
    """A candidate point outside the observation set (may still leave the diamond)."""
    t = rng.uniform(-(1 - eps0), 1 - eps0)
    rad = rng.uniform(eps0, 1.0)
    return np.concatenate([[t], rad * _random_unit(rng)])


def _cone_hit(rng: np.random.Generator, y: np.ndarray, sign: int, eps0: float) -> np.ndarray | None:
    """A point y + sign * L (1, v), L > 0, with spatial part inside the eps0 ball."""
    v = _random_unit(rng)
    # |y + L v| < eps0  <=>  L between the roots of L^2 + 2 L y.v + |y|^2 - eps0^2
    yv = y[1:] @ v
    disc = yv * yv - y[1:] @ y[1:] + eps0 * eps0
    if disc <= 0:
        return None
    lo, hi = max(-yv - np.sqrt(disc), 0.0), -yv + np.sqrt(disc)
    if hi <= lo:
        return None
    L = rng.uniform(lo, hi)
    return y + L * np.concatenate([[float(sign)], v])


def sample_broken_triples(eps0: float, count: int, seed: int = 0,
                          max_attempts: int = 100_000) -> list[BrokenTriple]:
    """Rejection-sample triples with x, z in the observation set and y outside it.

    The vertex y is drawn in the diamond outside the observation set; x and
    z are drawn on its past and future light cones, with the cone parameter
    restricted to the interval where the spatial part lies in the eps0 ball.
    Candidates leaving the diamond are rejected.
    """
    if not 0 < eps0 < 1:
        raise TransportError("eps0 must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    out: list[BrokenTriple] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SamplerExhausted(f"found {len(out)} of {count} triples in {max_attempts} attempts")
        y = _sample_vertex(rng, eps0)
        if not in_diamond(y):
            continue
        x, z = _cone_hit(rng, y, -1, eps0), _cone_hit(rng, y, 1, eps0)
        if x is None or z is None:
            continue
        if not (in_observation_set(x, eps0) and in_observation_set(z, eps0)):
            continue
        out.append(BrokenTriple(tuple(x), tuple(y), tuple(z)))
    return out


def export_records(triples: Sequence[BrokenTriple], transforms: Sequence[GroupElement]) -> str:
    """JSON records {x, y, z, U: [[[re, im], ...], ...]}."""
    recs = []
    for t, U in zip(triples, transforms):
        rec = t.to_record()
        rec["U"] = [[[float(z.real), float(z.imag)] for z in row] for row in U.mat]
        recs.append(rec)
    return json.dumps(recs, indent=2, sort_keys=True)


def load_records(text: str) -> list[tuple[BrokenTriple, GroupElement]]:
    out = []
    for rec in json.loads(text):
        U = np.array([[complex(re, im) for re, im in row] for row in rec["U"]])
        out.append((BrokenTriple(tuple(rec["x"]), tuple(rec["y"]), tuple(rec["z"])), GroupElement(U)))
    return out
