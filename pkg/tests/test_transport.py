import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from ymlab.fields import TrigField
from ymlab.forms import Connection, Grid, sample
from ymlab.lie import bracket, gell_mann_basis, u_algebra
from ymlab.suites import pinned_gauge
from ymlab.transport import (BrokenTriple, Path, PointConnection, SamplerExhausted, TransportError, ad_of,
                             adjoint_matrix, adjoint_transport, as_point_connection, broken_transform,
                             centre_discrepancy, centre_membership, export_records, homotopy_diagnostic,
                             in_diamond, in_observation_set, load_records, principal_transport,
                             sample_broken_triples)

SU2 = gell_mann_basis(2)
TRIPLES = sample_broken_triples(0.9, 6, seed=3)


def field_connection(seed, amplitude=0.5):
    return PointConnection.from_field(SU2, TrigField.random(np.random.default_rng(seed), 3, amplitude=amplitude))


def test_zero_connection_identity():
    A = PointConnection.zero(SU2)
    p = Path.segment((0, 0, 0, 0), (0.5, 0.3, 0.4, 0))
    assert np.allclose(principal_transport(A, p).mat, np.eye(2))
    b = SU2.basis_element(1)
    assert adjoint_transport(A, p, b).allclose(b)
    assert np.allclose(broken_transform(A, TRIPLES[0], rep="adjoint"), np.eye(3))


def test_constant_connection_matches_expm():
    c = np.random.default_rng(0).standard_normal((4, 3))
    A = PointConnection.constant(SU2, c)
    p, q = np.zeros(4), np.array([0.5, 0.3, 0.1, -0.2])
    U = principal_transport(A, Path.segment(p, q))
    a = np.einsum("mij,m->ij", SU2.matrix(c), q - p)
    assert np.abs(U.mat - expm(-a)).max() < 1e-12


def test_forward_backward_is_identity():
    A = field_connection(1)
    tr = TRIPLES[0]
    U = principal_transport(A, Path((tr.x, tr.y, tr.x)))
    assert np.abs(U.mat - np.eye(2)).max() < 1e-8


def test_unitarity_after_projection():
    A = field_connection(2, amplitude=2.0)
    U = principal_transport(A, TRIPLES[1].first())
    assert U.unitarity_defect() < 1e-10
    assert abs(np.linalg.det(U.mat) - 1) < 1e-10


def test_centre_element_unchanged():
    u2 = u_algebra(2)
    A = PointConnection.from_field(u2, TrigField.random(np.random.default_rng(3), 4))
    b = u2.element([0, 0, 0, 1.3])
    assert adjoint_transport(A, TRIPLES[0].first(), b).allclose(b, atol=1e-12)


@pytest.mark.parametrize("tr", TRIPLES[:3])
def test_ad_consistency_and_bracket_product(tr):
    A = field_connection(4)
    U = broken_transform(A, tr)
    S = broken_transform(A, tr, rep="adjoint")
    assert np.abs(S - ad_of(U, SU2)).max() < 1e-8
    rng = np.random.default_rng(5)
    b1, b2 = SU2.random_element(rng), SU2.random_element(rng)
    assert np.abs(S @ bracket(b1, b2).coeffs - SU2.bracket_coeffs(S @ b1.coeffs, S @ b2.coeffs)).max() < 1e-8
    W = adjoint_transport(A, tr.first(), b1)
    Uf = principal_transport(A, tr.first())
    assert np.abs(W.mat - Uf.mat @ b1.mat @ np.linalg.inv(Uf.mat)).max() < 1e-8


def test_reparametrization_and_composition():
    A = field_connection(6)
    tr = TRIPLES[2]
    p1 = principal_transport(A, Path.segment(tr.x, tr.y, 1.0))
    p2 = principal_transport(A, Path.segment(tr.x, tr.y, 3.7))
    assert np.abs(p1.mat - p2.mat).max() < 1e-9
    whole = principal_transport(A, Path((tr.x, tr.y, tr.z)))
    assert np.abs(whole.mat - broken_transform(A, tr).mat).max() < 1e-8
    mid = tuple(0.3 * np.array(tr.x) + 0.7 * np.array(tr.y))
    split = principal_transport(A, Path.segment(mid, tr.y)) @ principal_transport(A, Path.segment(tr.x, mid))
    assert np.abs(split.mat - p1.mat).max() < 1e-8


def test_rk4_fourth_order():
    # error against a fine reference drops ~16x per halving
    A = field_connection(7, amplitude=1.5)
    path = TRIPLES[0].first()
    ref = principal_transport(A, path, 800, project=False).mat
    e1 = np.abs(principal_transport(A, path, 10, project=False).mat - ref).max()
    e2 = np.abs(principal_transport(A, path, 20, project=False).mat - ref).max()
    assert 12 < e1 / e2 < 20


def test_gauge_covariance_of_transport():
    # U^B_gamma = u(end)^{-1} U^A_gamma u(start) for B = u.A
    A = field_connection(8)
    tr = TRIPLES[0]
    rng = np.random.default_rng(9)
    u, du = pinned_gauge(SU2, np.array(tr.x) + 0.1, np.array(tr.z) - 0.1, rng.standard_normal(3))
    B = A.gauge(u, du)
    path = tr.first()
    UA, UB = principal_transport(A, path).mat, principal_transport(B, path).mat
    start, end = u(np.array(tr.x)), u(np.array(tr.y))
    assert np.abs(UB - np.linalg.inv(end) @ UA @ start).max() < 1e-8


def test_centre_discrepancy_cases():
    A = field_connection(10)
    tr = TRIPLES[1]
    same = centre_discrepancy(A, A, tr)
    assert np.abs(same.mat - np.eye(2)).max() < 1e-10
    u, du = pinned_gauge(SU2, tr.x, tr.z, np.random.default_rng(11).standard_normal(3))
    assert centre_membership(centre_discrepancy(A, A.gauge(u, du), tr), SU2) < 1e-8
    other = field_connection(12, amplitude=1.0)
    assert centre_membership(centre_discrepancy(A, other, tr), SU2) > 1e-3


def test_homotopy_diagnostic_shrinks():
    A, B = field_connection(13), field_connection(14)
    rows = homotopy_diagnostic(A, B, TRIPLES[0], steps=100)
    dist = [r["distance_to_identity"] for r in rows]
    assert all(a > b for a, b in zip(dist, dist[1:]))


def test_grid_connection_interpolation():
    g = Grid.box(9)
    f = TrigField.random(np.random.default_rng(15), 3)
    A_grid = as_point_connection(Connection(sample(g, SU2, f)))
    A_exact = PointConnection.from_field(SU2, f)
    tr = TRIPLES[0]
    diff = np.abs(principal_transport(A_grid, tr.first()).mat - principal_transport(A_exact, tr.first()).mat).max()
    assert diff < 5e-2


def test_triple_validation():
    with pytest.raises(TransportError):
        BrokenTriple((0, 0, 0, 0), (0.5, 0.1, 0, 0), (1, 0.6, 0, 0))  # timelike
    with pytest.raises(TransportError):
        BrokenTriple((0, 0, 0, 0), (-0.5, 0.5, 0, 0), (0, 1, 0, 0))  # past pointing
    with pytest.raises(TransportError):
        Path(((0, 0, 0, 0), (0, 0, 0, 0)))
    with pytest.raises(TransportError):
        principal_transport(PointConnection.zero(SU2), TRIPLES[0].first(), steps=0)
    with pytest.raises(TransportError):
        broken_transform(PointConnection.zero(SU2), TRIPLES[0], rep="spin")


def test_sampler_invariants():
    tris = sample_broken_triples(0.9, 10, seed=0)
    assert len(tris) == 10
    for t in tris:
        x, y, z = map(np.asarray, (t.x, t.y, t.z))
        assert in_observation_set(x, 0.9) and in_observation_set(z, 0.9)
        assert in_diamond(y) and not in_observation_set(y, 0.9)
        for a, b in ((x, y), (y, z)):
            assert abs(np.linalg.norm(b[1:] - a[1:]) - (b[0] - a[0])) <= 1e-9 * (b[0] - a[0])
    assert sample_broken_triples(0.9, 10, seed=0) == tris


def test_sampler_exhaustion():
    with pytest.raises(SamplerExhausted):
        sample_broken_triples(0.9999, 5, seed=0, max_attempts=2000)
    with pytest.raises(TransportError):
        sample_broken_triples(1.0, 1)


def test_records_roundtrip():
    A = field_connection(16)
    Us = [broken_transform(A, t, steps=50) for t in TRIPLES[:2]]
    back = load_records(export_records(TRIPLES[:2], Us))
    for (t, U), t0, U0 in zip(back, TRIPLES, Us):
        assert t == t0 and np.array_equal(U.mat, U0.mat)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31))
def test_adjoint_matrix_is_automorphism(seed):
    A = field_connection(seed % 1000)
    M = adjoint_matrix(A, TRIPLES[seed % len(TRIPLES)].second(), SU2, steps=100)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    assert np.abs(M @ SU2.bracket_coeffs(x, y) - SU2.bracket_coeffs(M @ x, M @ y)).max() < 1e-9
    # orthogonal for the invariant inner product
    assert np.abs(M.T @ SU2.ip @ M - SU2.ip).max() < 1e-9
