"""Algebra-valued differential forms on Minkowski space R^{1+3}.

Coordinates are (x^0, x^1, x^2, x^3) = (t, x, y, z) with the metric
g = diag(-1, 1, 1, 1) and volume form vol = dx^0 ^ dx^1 ^ dx^2 ^ dx^3.

A k-form is stored by its components on strictly increasing multi-indices,
``omega = sum_{I increasing} omega_I dx^I``; every component is an array of
shape ``lead_shape + (d,)`` holding coefficients in the algebra basis.
Looking up a permuted index returns the sign-adjusted component.

Coordinate formulas that are quoted with full index sums
(``Y = Y_ab dx^a ^ dx^b`` over all a, b) are evaluated with
``Y_ab = stored component`` for a < b and zero otherwise.
"""
from __future__ import annotations

import csv
import functools
import itertools
from dataclasses import dataclass
from math import sqrt
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .lie import LieAlgebra

METRIC = (-1, 1, 1, 1)
CFL_BOUND = 1.0 / sqrt(3.0)


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid with axes (t, x, y, z).

    ``spacing`` is (tau, h, h, h); ``origin`` gives the coordinates of index 0.
    """

    shape: tuple[int, int, int, int]
    spacing: tuple[float, float, float, float]
    origin: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.shape) != 4 or min(self.shape) < 3:
            raise FormError(f"all grid extents must be >= 3, got {self.shape}")
        tau, *hs = self.spacing
        if tau / min(hs) > CFL_BOUND + 1e-12:
            raise FormError(f"tau/h = {tau / min(hs):.4f} exceeds the CFL bound {CFL_BOUND:.4f}")

    @staticmethod
    def box(n: int, nt: int | None = None, half_width: float = 1.0, t0: float = -1.0,
            ratio: float = 0.5) -> "Grid":
        """Cube [-L, L]^3 with n points per axis and tau = ratio * h starting at t0."""
        h = 2 * half_width / (n - 1)
        tau = ratio * h
        if nt is None:
            nt = int(np.ceil(2 * half_width / tau)) + 1
        return Grid((nt, n, n, n), (tau, h, h, h), (t0, -half_width, -half_width, -half_width))

    @property
    def h(self) -> float:
        return self.spacing[1]

    @property
    def tau(self) -> float:
        return self.spacing[0]

    def coords(self, mu: int) -> np.ndarray:
        return self.origin[mu] + self.spacing[mu] * np.arange(self.shape[mu])

    def mesh(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays t, x, y, z."""
        out = []
        for mu in range(4):
            shape = [1, 1, 1, 1]
            shape[mu] = self.shape[mu]
            out.append(self.coords(mu).reshape(shape))
        return out

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*[self.coords(m) for m in range(4)], indexing="ij"), axis=-1)

    def causal_mask(self, margin: float = 0.0) -> np.ndarray:
        """Boolean mask of the diamond |x| <= t + 1, |x| <= 1 - t shrunk by margin."""
        t, x, y, z = self.mesh()
        rad = np.sqrt(x**2 + y**2 + z**2)
        return (rad <= t + 1 - margin) & (rad <= 1 - t - margin)

    def region(self, lo: Sequence[float], hi: Sequence[float]) -> np.ndarray:
        """Boolean mask of points inside the coordinate box [lo, hi]."""
        mask = np.ones(self.shape, dtype=bool)
        for mu, c in enumerate(self.mesh()):
            mask = mask & (c >= lo[mu] - 1e-12) & (c <= hi[mu] + 1e-12)
        return mask

    def interior(self, margin: int = 2) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[tuple(slice(margin, n - margin) for n in self.shape)] = True
        return mask


# ---------------------------------------------------------------------------
# index bookkeeping

def perm_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@functools.lru_cache(maxsize=None)
def multi_indices(k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(4), k))


@functools.lru_cache(maxsize=None)
def star_table(k: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...], int], ...]:
    """Entries (I, J, c) with star(dx^I) = c dx^J.

    From dx^I ^ star(dx^I) = <dx^I, dx^I> vol with <dx^I, dx^I> = prod g^{ii}.
    """
    out = []
    for idx in multi_indices(k):
        comp = tuple(m for m in range(4) if m not in idx)
        norm = int(np.prod([METRIC[m] for m in idx]))
        out.append((idx, comp, norm * perm_sign(idx + comp)))
    return tuple(out)


# ---------------------------------------------------------------------------
# forms

class GForm:
    """Algebra-valued k-form with antisymmetric (increasing index) storage."""

    def __init__(self, degree: int, comps: Mapping[tuple[int, ...], np.ndarray],
                 alg: LieAlgebra, grid: Grid | None = None):
        if not 0 <= degree <= 4:
            raise FormError(f"degree {degree} out of range")
        keys = multi_indices(degree)
        missing = [k for k in keys if k not in comps]
        if missing:
            raise FormError(f"missing components {missing}")
        extra = set(comps) - set(keys)
        if extra:
            raise FormError(f"components must use increasing indices, got {sorted(extra)}")
        self.degree = degree
        self.alg = alg
        self.grid = grid
        self.comps = {k: _as_array(comps[k]) for k in keys}
        shapes = {v.shape for v in self.comps.values()}
        if len(shapes) != 1:
            raise FormError("component shapes differ")
        self.shape = next(iter(shapes))[:-1]
        if next(iter(shapes))[-1] != alg.d:
            raise FormError("trailing axis must equal the algebra dimension")

    @staticmethod
    def zeros(degree: int, alg: LieAlgebra, shape: tuple[int, ...], grid: Grid | None = None) -> "GForm":
        return GForm(degree, {k: np.zeros(shape + (alg.d,)) for k in multi_indices(degree)}, alg, grid)

    @staticmethod
    def from_components(degree: int, values: Sequence[np.ndarray], alg: LieAlgebra,
                        grid: Grid | None = None) -> "GForm":
        return GForm(degree, dict(zip(multi_indices(degree), values)), alg, grid)

    def __getitem__(self, idx) -> np.ndarray:
        if isinstance(idx, int):
            idx = (idx,)
        idx = tuple(idx)
        sign = perm_sign(idx)
        if sign == 0:
            return np.zeros(self.shape + (self.alg.d,))
        return sign * self.comps[tuple(sorted(idx))]

    def _like(self, comps: Mapping) -> "GForm":
        return GForm(self.degree, comps, self.alg, self.grid)

    def __add__(self, other: "GForm") -> "GForm":
        _check(self, other)
        return self._like({k: v + other.comps[k] for k, v in self.comps.items()})

    def __sub__(self, other: "GForm") -> "GForm":
        _check(self, other)
        return self._like({k: v - other.comps[k] for k, v in self.comps.items()})

    def __neg__(self) -> "GForm":
        return self._like({k: -v for k, v in self.comps.items()})

    def __mul__(self, c: float) -> "GForm":
        return self._like({k: c * v for k, v in self.comps.items()})

    __rmul__ = __mul__

    def list(self) -> list[np.ndarray]:
        return [self.comps[k] for k in multi_indices(self.degree)]

    def max_norm(self, mask: np.ndarray | None = None) -> float:
        """Max over points (optionally masked) of the Euclidean coefficient norm."""
        best = 0.0
        for v in self.comps.values():
            mag = np.sqrt(np.sum(v * v, axis=-1))
            if mask is not None:
                mag = mag[mask]
            if mag.size:
                best = max(best, float(mag.max()))
        return best

    def matrices(self, idx) -> np.ndarray:
        return self.alg.matrix(self[idx])


def _as_array(v) -> np.ndarray:
    # object arrays (e.g. of Fractions) are kept for exact arithmetic
    arr = np.asarray(v)
    return arr if arr.dtype == object else arr.astype(float)


def _zeros(form: GForm) -> np.ndarray:
    """Zero component matching the shape and dtype of ``form``."""
    return np.zeros_like(next(iter(form.comps.values())))


def _check(a: GForm, b: GForm) -> None:
    if a.degree != b.degree or a.shape != b.shape:
        raise FormError("incompatible forms")


def one_form(values: Sequence[np.ndarray], alg: LieAlgebra, grid: Grid | None = None) -> GForm:
    return GForm.from_components(1, values, alg, grid)


def zero_form(value: np.ndarray, alg: LieAlgebra, grid: Grid | None = None) -> GForm:
    return GForm(0, {(): value}, alg, grid)


def sample(grid: Grid, alg: LieAlgebra, field, degree: int = 1) -> GForm:
    """Sample a closed-form field (see ``fields.TrigField``) on a grid."""
    vals = field.value(grid.points())
    if degree == 0:
        return zero_form(vals[..., 0, :], alg, grid)
    return one_form([vals[..., m, :] for m in range(4)], alg, grid)


def sample_derivatives(grid: Grid, alg: LieAlgebra, field, degree: int = 1) -> list[GForm]:
    """Exact first derivatives [d_0 f, ..., d_3 f] of a closed-form field."""
    pts = grid.points()
    out = []
    for mu in range(4):
        vals = field.derivative(pts, mu)
        out.append(zero_form(vals[..., 0, :], alg, grid) if degree == 0
                   else one_form([vals[..., m, :] for m in range(4)], alg, grid))
    return out


def sample_second_derivatives(grid: Grid, alg: LieAlgebra, field) -> list[list[GForm]]:
    pts = grid.points()
    return [[one_form([field.derivative(pts, mu, nu)[..., m, :] for m in range(4)], alg, grid)
             for nu in range(4)] for mu in range(4)]


# ---------------------------------------------------------------------------
# algebraic operations

def wedge(omega: GForm, eta: GForm, product: Callable | None = None) -> GForm:
    """sum_{I, J} product(omega_I, eta_J) dx^I ^ dx^J (elementwise product by default)."""
    p, q = omega.degree, eta.degree
    if p + q > 4:
        raise FormError(f"degree overflow: {p} + {q} > 4")
    product = np.multiply if product is None else product
    zero = _zeros(omega) if p else _zeros(eta)
    out = {k: zero.copy() for k in multi_indices(p + q)}
    for i in multi_indices(p):
        for j in multi_indices(q):
            sign = perm_sign(i + j)
            if sign:
                out[tuple(sorted(i + j))] = out[tuple(sorted(i + j))] + sign * product(omega.comps[i], eta.comps[j])
    return GForm(p + q, out, omega.alg, omega.grid)


def graded_bracket(omega: GForm, eta: GForm) -> GForm:
    """[omega, eta] = omega ^ eta - (-1)^{pq} eta ^ omega.

    In components this is sum_{I, J} [omega_I, eta_J] dx^I ^ dx^J.
    """
    return wedge(omega, eta, omega.alg.bracket_coeffs)


def hodge_star(omega: GForm) -> GForm:
    out = {}
    for idx, comp, c in star_table(omega.degree):
        out[comp] = c * omega.comps[idx]
    return GForm(4 - omega.degree, out, omega.alg, omega.grid)


def pointwise_bracket(x: np.ndarray, y: np.ndarray, alg: LieAlgebra) -> np.ndarray:
    return alg.bracket_coeffs(x, y)


# ---------------------------------------------------------------------------
# differential operators

def partial(arr: np.ndarray, mu: int, grid: Grid) -> np.ndarray:
    """Second-order difference along axis mu (centered; one-sided at faces)."""
    if grid is None:
        raise FormError("derivatives need a grid")
    return np.gradient(arr, grid.spacing[mu], axis=mu, edge_order=2)


def derivatives(omega: GForm) -> list[GForm]:
    """Finite-difference partials [d_0 omega, ..., d_3 omega] componentwise."""
    return [omega._like({k: partial(v, mu, omega.grid) for k, v in omega.comps.items()})
            for mu in range(4)]


def d(omega: GForm) -> GForm:
    k = omega.degree
    if k == 4:
        raise FormError("d of a 4-form vanishes identically")
    out = {key: np.zeros(omega.shape + (omega.alg.d,)) for key in multi_indices(k + 1)}
    for idx in multi_indices(k):
        for mu in range(4):
            sign = perm_sign((mu,) + idx)
            if sign:
                out[tuple(sorted((mu,) + idx))] += sign * partial(omega.comps[idx], mu, omega.grid)
    return GForm(k + 1, out, omega.alg, omega.grid)


class Connection:
    """Gauge field A (an algebra-valued 1-form) with lazily cached curvature."""

    def __init__(self, a: GForm):
        if a.degree != 1:
            raise FormError("a connection is a 1-form")
        self.a = a

    @property
    def alg(self) -> LieAlgebra:
        return self.a.alg

    @property
    def grid(self) -> Grid | None:
        return self.a.grid

    @functools.cached_property
    def curvature(self) -> GForm:
        return curvature(self)

    @staticmethod
    def zero(alg: LieAlgebra, grid: Grid) -> "Connection":
        return Connection(GForm.zeros(1, alg, grid.shape, grid))


def d_A(A: Connection, omega: GForm) -> GForm:
    return d(omega) + graded_bracket(A.a, omega)


def curvature(A: Connection) -> GForm:
    """F_A = dA + 1/2 [A, A]."""
    return d(A.a) + 0.5 * graded_bracket(A.a, A.a)


def d_A_star_composition(A: Connection, omega: GForm) -> GForm:
    """The adjoint via its definition star d_A star (valid in R^{1+3})."""
    return hodge_star(d_A(A, hodge_star(omega)))


def _raise(mu: int) -> int:
    return METRIC[mu]


def d_A_star(A: Connection, omega: GForm, deriv: Sequence[GForm] | None = None) -> GForm:
    """Coordinate formulas for d_A^* on 1- and 2-forms.

    1-form X:  d_A^* X = -(d^a X_a + [A^a, X_a]).
    2-form Y:  (d^a Y_ba + [A^a, Y_ba]) dx^b - (d^a Y_ab + [A^a, Y_ab]) dx^b,
    with Y_ab the stored component for a < b and zero otherwise.
    ``deriv`` optionally supplies [d_0 omega, ..., d_3 omega] (e.g. exact).
    """
    alg = omega.alg
    deriv = derivatives(omega) if deriv is None else deriv
    if omega.degree == 1:
        total = np.zeros(omega.shape + (alg.d,))
        for a in range(4):
            total += _raise(a) * (deriv[a].comps[(a,)]
                                  + alg.bracket_coeffs(A.a.comps[(a,)], omega.comps[(a,)]))
        return zero_form(-total, alg, omega.grid)
    if omega.degree == 2:
        def upper(form: GForm, a: int, b: int) -> np.ndarray | None:
            return form.comps[(a, b)] if a < b else None

        out = []
        for b in range(4):
            acc = np.zeros(omega.shape + (alg.d,))
            for a in range(4):
                g = _raise(a)
                ba, ab = upper(omega, b, a), upper(omega, a, b)
                if ba is not None:
                    acc += g * (upper(deriv[a], b, a) + alg.bracket_coeffs(A.a.comps[(a,)], ba))
                if ab is not None:
                    acc -= g * (upper(deriv[a], a, b) + alg.bracket_coeffs(A.a.comps[(a,)], ab))
            out.append(acc)
        return one_form(out, alg, omega.grid)
    raise FormError(f"d_A_star coordinate formula supports degrees 1 and 2, got {omega.degree}")


def star_bracket_star(X: GForm, Y: GForm) -> GForm:
    """star[X, star Y] = [X^a, Y_ba] dx^b - [X^a, Y_ab] dx^b (coordinate formula)."""
    alg = X.alg
    out = []
    for b in range(4):
        acc = _zeros(X)
        for a in range(4):
            xa = _raise(a) * X.comps[(a,)]
            if b < a:
                acc += alg.bracket_coeffs(xa, Y.comps[(b, a)])
            if a < b:
                acc -= alg.bracket_coeffs(xa, Y.comps[(a, b)])
        out.append(acc)
    return one_form(out, alg, X.grid)


def star_bracket_star_composition(X: GForm, Y: GForm) -> GForm:
    return hodge_star(graded_bracket(X, hodge_star(Y)))


def ym_residual(A: Connection, dA: Sequence[GForm] | None = None,
                ddA: Sequence[Sequence[GForm]] | None = None) -> GForm:
    """Closed-form components of d_A^* F_A.

    d^a d_b A_a - d^a d_a A_b - [d^a A_a, A_b] - 2[A^a, d_a A_b]
    + [A^a, d_b A_a] - [A^a, [A_a, A_b]].
    ``dA[mu]`` and ``ddA[mu][nu]`` may supply exact derivatives.
    """
    a_form = A.a
    alg = a_form.alg
    if dA is None:
        dA = derivatives(a_form)
    if ddA is None:
        ddA = [derivatives(dA[mu]) for mu in range(4)]
    comp = [a_form.comps[(m,)] for m in range(4)]
    br = alg.bracket_coeffs
    div = sum(_raise(a) * dA[a].comps[(a,)] for a in range(4))
    out = []
    for b in range(4):
        acc = -br(div, comp[b])
        for a in range(4):
            g = _raise(a)
            acc = acc + g * (ddA[a][b].comps[(a,)] - ddA[a][a].comps[(b,)])
            acc = acc - 2 * g * br(comp[a], dA[a].comps[(b,)])
            acc = acc + g * br(comp[a], dA[b].comps[(a,)])
            acc = acc - g * br(comp[a], br(comp[a], comp[b]))
        out.append(acc)
    return one_form(out, alg, a_form.grid)


# ---------------------------------------------------------------------------
# expansion identities for brackets of 1-forms

def _cov(A: Connection, Z: GForm, dZ: Sequence[GForm], a: int, b: int) -> np.ndarray:
    """d_a Z_b + [A_a, Z_b]."""
    return dZ[a].comps[(b,)] + Z.alg.bracket_coeffs(A.a.comps[(a,)], Z.comps[(b,)])


def dastar_bracket_rhs(A: Connection, X: GForm, Z: GForm, dX: Sequence[GForm],
                       dZ: Sequence[GForm]) -> GForm:
    """[d_A^*X, Z] - [X, d_A^*Z] + ([d^aX_b + [A^a,X_b], Z_a] - [X_a, d^aZ_b + [A^a,Z_b]]) dx^b."""
    br = X.alg.bracket_coeffs
    hx = d_A_star(A, X, dX).comps[()]
    hz = d_A_star(A, Z, dZ).comps[()]
    out = []
    for b in range(4):
        acc = br(hx, Z.comps[(b,)]) - br(X.comps[(b,)], hz)
        for a in range(4):
            g = _raise(a)
            acc = acc + g * (br(_cov(A, X, dX, a, b), Z.comps[(a,)])
                             - br(X.comps[(a,)], _cov(A, Z, dZ, a, b)))
        out.append(acc)
    return one_form(out, X.alg, X.grid)


def wstardaw_rhs(A: Connection, X: GForm, Z: GForm, dZ: Sequence[GForm]) -> GForm:
    """-[X^a, d_aZ_b + [A_a,Z_b]] + [X^a, d_bZ_a + [A_b,Z_a]]."""
    br = X.alg.bracket_coeffs
    out = []
    for b in range(4):
        acc = np.zeros(X.shape + (X.alg.d,))
        for a in range(4):
            xa = _raise(a) * X.comps[(a,)]
            acc = acc - br(xa, _cov(A, Z, dZ, a, b)) + br(xa, _cov(A, Z, dZ, b, a))
        out.append(acc)
    return one_form(out, X.alg, X.grid)


def cubic_rhs(X: GForm, Y: GForm, Z: GForm) -> GForm:
    """-[X^a, [Y_a, Z_b]] + [X^a, [Y_b, Z_a]]."""
    br = X.alg.bracket_coeffs
    out = []
    for b in range(4):
        acc = _zeros(X)
        for a in range(4):
            xa = _raise(a) * X.comps[(a,)]
            acc = acc - br(xa, br(Y.comps[(a,)], Z.comps[(b,)])) + br(xa, br(Y.comps[(b,)], Z.comps[(a,)]))
        out.append(acc)
    return one_form(out, X.alg, X.grid)


def expansion_identities(X: GForm, Y: GForm, Z: GForm, A: Connection,
                         dX: Sequence[GForm] | None = None, dZ: Sequence[GForm] | None = None,
                         mask: np.ndarray | None = None) -> dict[str, float]:
    """Max-norm discrepancies of the three bracket expansion identities.

    Left sides are composed from grid operators (finite differences); right
    sides are the coordinate formulas, using ``dX``/``dZ`` when supplied (e.g.
    exact derivatives of closed-form fields) and finite differences otherwise.
    """
    dX = derivatives(X) if dX is None else dX
    dZ = derivatives(Z) if dZ is None else dZ
    lhs1 = d_A_star(A, graded_bracket(X, Z))
    lhs2 = star_bracket_star_composition(X, d_A(A, Z))
    lhs3 = star_bracket_star_composition(X, graded_bracket(Y, Z))
    return {
        "dastar_bracket": (lhs1 - dastar_bracket_rhs(A, X, Z, dX, dZ)).max_norm(mask),
        "wstardaw": (lhs2 - wstardaw_rhs(A, X, Z, dZ)).max_norm(mask),
        "cubic": (lhs3 - cubic_rhs(X, Y, Z)).max_norm(mask),
    }


# ---------------------------------------------------------------------------
# basis forms (constant, pointwise) for sign checks

def basis_form(degree: int, idx: Sequence[int], alg: LieAlgebra, coeff: np.ndarray | None = None,
               shape: tuple[int, ...] = ()) -> GForm:
    """The constant form coeff * dx^idx (idx in any order, sign applied)."""
    coeff = np.ones(alg.d) if coeff is None else np.asarray(coeff, dtype=float)
    form = GForm.zeros(degree, alg, shape)
    sign = perm_sign(tuple(idx))
    if sign:
        form.comps[tuple(sorted(idx))] = sign * np.broadcast_to(coeff, shape + (alg.d,)).copy()
    return form


def scalar_form_value(form: GForm, idx: Sequence[int] = ()) -> np.ndarray:
    return form[tuple(idx)]


def apply(fn: Callable[[np.ndarray], np.ndarray], form: GForm) -> GForm:
    return form._like({k: fn(v) for k, v in form.comps.items()})


# ---------------------------------------------------------------------------
# snapshots

def save_csv(form: GForm, directory, prefix: str = "form") -> list:
    """One CSV per component: columns t_idx, x_idx, y_idx, z_idx, coeff_1..coeff_d."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, arr in form.comps.items():
        path = directory / f"{prefix}_{''.join(map(str, idx)) or 'scalar'}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_idx", "x_idx", "y_idx", "z_idx"]
                            + [f"coeff_{a + 1}" for a in range(form.alg.d)])
            for pos in np.ndindex(*form.shape):
                writer.writerow(list(pos) + [repr(float(v)) for v in arr[pos]])
        paths.append(path)
    return paths


def load_csv(directory, degree: int, alg: LieAlgebra, shape: tuple[int, ...],
             prefix: str = "form", grid: Grid | None = None) -> GForm:
    comps = {}
    for idx in multi_indices(degree):
        path = Path(directory) / f"{prefix}_{''.join(map(str, idx)) or 'scalar'}.csv"
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        arr = np.zeros(shape + (alg.d,))
        pos = data[:, :4].astype(int)
        arr[tuple(pos.T)] = data[:, 4:]
        comps[idx] = arr
    return GForm(degree, comps, alg, grid)


# ---------------------------------------------------------------------------
# refinement study of the coordinate formulas

def dual_path_study(h: float, seed: int = 0, alg: LieAlgebra | None = None, half: float = 0.08,
                    pad: int = 3) -> dict[str, float]:
    """Composition-path vs coordinate-formula discrepancies at spacing ``h``.

    Random closed-form fields X, Y, Z, A are sampled on a box covering the
    measured cube [-half, half]^4 plus ``pad`` cells; boundary stencils never
    reach the cube, so the discrepancies are pure interior truncation error.
    Exact derivatives feed the coordinate side.
    """
    from .fields import TrigField
    from .lie import gell_mann_basis

    alg = alg or gell_mann_basis(2)
    rng = np.random.default_rng(seed)
    fx, fy, fz, fa = (TrigField.random(rng, alg.d) for _ in range(4))
    tau = 0.5 * h
    ns = 2 * int(round((half + pad * h) / h)) + 1
    nt = 2 * int(round((half + pad * tau) / tau)) + 1
    grid = Grid((nt, ns, ns, ns), (tau, h, h, h),
                (-(nt // 2) * tau, -(ns // 2) * h, -(ns // 2) * h, -(ns // 2) * h))
    X, Y, Z, a = (sample(grid, alg, f) for f in (fx, fy, fz, fa))
    A = Connection(a)
    mask = grid.region([-half] * 4, [half] * 4)
    out = expansion_identities(X, Y, Z, A, sample_derivatives(grid, alg, fx),
                               sample_derivatives(grid, alg, fz), mask)
    F = A.curvature
    exact_ym = ym_residual(A, sample_derivatives(grid, alg, fa), sample_second_derivatives(grid, alg, fa))
    out["ym_coord"] = (d_A_star(A, F) - exact_ym).max_norm(mask)
    out["dastar_2form"] = (d_A_star(A, F) - d_A_star_composition(A, F)).max_norm(mask)
    out["dastar_1form"] = (d_A_star(A, X) - d_A_star_composition(A, X)).max_norm(mask)
    out["star_bracket"] = (star_bracket_star(X, F) - star_bracket_star_composition(X, F)).max_norm(mask)
    return out
