import numpy as np
import pytest

from ymlab.fields import TrigField
from ymlab.forms import Connection, Grid, curvature, one_form, sample
from ymlab.gauge import (GaugeError, GaugeTransform, conjugate_form, expm_batch, gauge_action,
                         initial_surface, load_csv, relative_lorenz_residual, save_csv,
                         stabilizer_check, temporal_gauge)
from ymlab.lie import gell_mann_basis, u1, u_algebra

SU2 = gell_mann_basis(2)


def random_connection(grid, seed, alg=SU2, amplitude=0.5):
    return Connection(sample(grid, alg, TrigField.random(np.random.default_rng(seed), alg.d, amplitude=amplitude)))


def smooth_gauge(grid, seed, alg=SU2):
    f = TrigField.random(np.random.default_rng(seed), alg.d, ncomp=1, amplitude=0.7)
    return GaugeTransform.exp_of(alg, grid, lambda p: f.value(p)[..., 0, :])


def test_identity_gauge_fixes_connection():
    g = Grid.box(7)
    A = random_connection(g, 0)
    B = gauge_action(GaugeTransform.identity(g, 2), A)
    assert (B.a - A.a).max_norm() < 1e-14


def test_expm_batch_matches_scipy():
    from scipy.linalg import expm
    X = SU2.matrix(np.random.default_rng(1).standard_normal((5, 3)))
    assert np.abs(expm_batch(X) - np.stack([expm(x) for x in X])).max() < 1e-13


def test_abelian_gauge_adds_gradient():
    # u(1): U = exp(i phi) sends A to A + d phi
    alg = u1()
    phi = lambda p: (p[..., 0] ** 2 + p[..., 1] * p[..., 2] - 0.5 * p[..., 3])[..., None]
    errs = []
    for n in (9, 17):
        g = Grid.box(n)
        U = GaugeTransform.exp_of(alg, g, phi)
        A = random_connection(g, 2, alg)
        t, x, y, z = g.mesh()
        grads = [np.broadcast_to(v, g.shape) for v in (2 * t + 0 * x, y + 0 * t, x + 0 * t, -0.5 + 0 * t * x)]
        exact = gauge_action(U, A, [1j * gr[..., None, None] * U.U for gr in grads])
        fd = gauge_action(U, A)
        for mu in range(4):
            assert np.abs(exact.a[(mu,)][..., 0] - A.a[(mu,)][..., 0] - grads[mu]).max() < 1e-12
        errs.append((fd.a - exact.a).max_norm(g.interior(1)))
    assert errs[0] / errs[1] > 3  # 3.3 at h = 0.25, 0.125


def test_group_action_law():
    # (U W).A = W.(U.A), up to the stencil error
    errs = []
    for n in (9, 17):
        g = Grid.box(n)
        A, U, W = random_connection(g, 3), smooth_gauge(g, 4), smooth_gauge(g, 5)
        lhs = gauge_action(U @ W, A)
        rhs = gauge_action(W, gauge_action(U, A))
        errs.append((lhs.a - rhs.a).max_norm(g.interior(2)))
    assert errs[0] / errs[1] > 3


def test_curvature_covariance():
    # F(U.A) = U^{-1} F(A) U, up to the stencil error
    errs = []
    for n in (9, 17):
        g = Grid.box(n)
        A, U = random_connection(g, 6), smooth_gauge(g, 7)
        lhs = curvature(gauge_action(U, A))
        rhs = conjugate_form(U, curvature(A))
        errs.append((lhs - rhs).max_norm(g.interior(3)))
    assert errs[0] / errs[1] > 3


def test_gauge_transform_validation():
    g = Grid.box(5)
    with pytest.raises(GaugeError):
        GaugeTransform(np.zeros((2, 2)), g)
    assert smooth_gauge(g, 8).unitarity_defect() < 1e-13


def test_temporal_gauge_kills_time_component():
    g = Grid.box(12)
    V = random_connection(g, 0)
    B, U = temporal_gauge(V)
    assert B.a.max_norm() > 0.1
    assert np.abs(B.a[(0,)]).max() < 1e-8
    assert U.unitarity_defect() < 1e-6


def test_temporal_gauge_is_identity_on_surface_column():
    # the column at x = 0 starts at t = -1, the first grid time
    g = Grid.box(13)
    _, U = temporal_gauge(random_connection(g, 1))
    c = 6
    assert initial_surface(g)[c, c, c] == pytest.approx(-1.0)
    assert np.abs(U.U[0, c, c, c] - np.eye(2)).max() < 1e-14


def test_temporal_gauge_abelian_quadrature():
    # V_0 = (cos 3t + 1/2) i: U = exp(-i (F(t) - F(psi(x)))) with F' = cos 3t + 1/2
    g = Grid.box(12)
    alg = u1()
    t = g.mesh()[0]
    comps = [np.zeros(g.shape + (1,)) for _ in range(4)]
    comps[0] = np.broadcast_to((np.cos(3 * t) + 0.5)[..., None], g.shape + (1,)).copy()
    _, U = temporal_gauge(Connection(one_form(comps, alg, g)))
    F = lambda s: np.sin(3 * s) / 3 + 0.5 * s
    exact = np.exp(-1j * (F(t) - F(initial_surface(g)[None])))
    assert np.abs(U.U[..., 0, 0] - exact).max() < 2e-5  # frozen 1.17e-5


def test_temporal_gauge_recomposition_converges():
    # U^{-1}.(U.V) = V with finite-difference derivatives of U^{-1}
    errs = []
    for n in (12, 24):
        g = Grid.box(n)
        V = random_connection(g, 0)
        B, U = temporal_gauge(V)
        errs.append((gauge_action(U.inverse(), B).a - V.a).max_norm(g.interior(2)))
    # frozen 9.63e-4, 2.36e-4
    assert errs[1] < 5e-4 and errs[0] / errs[1] > 3.5


def test_relative_lorenz_residual():
    g = Grid.box(9)
    A = random_connection(g, 9)
    assert relative_lorenz_residual(A, A).max_norm() == 0
    # abelian, A = 0, V = d phi: d*(d phi) = phi_tt - Lap phi (+Box phi)
    alg = u1()
    t, x, y, z = g.mesh()
    grads = [2 * t + 0 * x, -4 * x + y + 0 * t, x + 0 * t, 0 * t * x]  # phi = t^2 - 2x^2 + xy
    V = Connection(one_form([np.broadcast_to(v, g.shape)[..., None].copy() for v in grads], alg, g))
    res = relative_lorenz_residual(Connection.zero(alg, g), V)
    assert np.abs(res[()][..., 0][g.interior(1)] - 6.0).max() < 1e-12


def test_lorenz_residual_of_zero_gauge_perturbation():
    g = Grid.box(9)
    alg = u1()
    res = relative_lorenz_residual(Connection.zero(alg, g), Connection.zero(alg, g))
    assert res.max_norm() == 0


def test_stabilizer_check():
    g = Grid.box(7)
    u2 = u_algebra(2)
    A = random_connection(g, 10, u2)
    # constant central element fixes every connection
    centre = GaugeTransform(np.broadcast_to(np.exp(0.4j) * np.eye(2), g.shape + (2, 2)).copy(), g)
    assert stabilizer_check(centre, A) < 1e-14
    assert stabilizer_check(smooth_gauge(g, 11, u2), A) > 1e-2


def test_gauge_csv_roundtrip(tmp_path):
    g = Grid.box(4, nt=3)
    U = smooth_gauge(g, 12)
    back = load_csv(save_csv(U, tmp_path / "u.csv"), g, 2)
    assert np.array_equal(back.U, U.U)
