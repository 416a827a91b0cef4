import numpy as np
import pytest

from ymlab.fields import TrigField
from ymlab.lie import bracket, gell_mann_basis
from ymlab.symbolic.brackets import BracketExpr
from ymlab.symbolic.bridge import BridgeError, homogeneity_residual, homogeneous_symbol, symbol_transport_bridge
from ymlab.symbolic.field import FieldElement
from ymlab.transport import PointConnection, sample_broken_triples

SU2 = gell_mann_basis(2)
TRIPLE = sample_broken_triples(0.9, 1, seed=5)[0]
NESTED = BracketExpr({(2, (1, 2)): 1.0, (1, (2, 3)): -0.5})


def bindings(seed):
    rng = np.random.default_rng(seed)
    return {k: SU2.random_element(rng) for k in (1, 2, 3)}


def test_zero_connection_evaluates_in_place():
    b = bindings(0)
    res = symbol_transport_bridge(PointConnection.zero(SU2), TRIPLE, NESTED, b)
    direct = bracket(b[2], bracket(b[1], b[2])) + (-0.5) * bracket(b[1], bracket(b[2], b[3]))
    assert np.abs(res.value.mat - direct.mat).max() < 1e-14
    assert res.product_residual < 1e-14


def test_transport_commutes_with_brackets():
    A = PointConnection.from_field(SU2, TrigField.random(np.random.default_rng(1), 3))
    sources = {1: TRIPLE.x, 2: TRIPLE.x, 3: tuple(np.asarray(TRIPLE.y) - [0.05, 0.05, 0, 0])}
    res = symbol_transport_bridge(A, TRIPLE, NESTED, bindings(2), sources=sources)
    assert res.product_residual < 1e-8
    assert res.value.norm() > 1e-3


def test_bridge_errors():
    with pytest.raises(BridgeError):
        symbol_transport_bridge(PointConnection.zero(SU2), TRIPLE, NESTED, {1: SU2.basis_element(0)})
    exact = BracketExpr({(1, 2): FieldElement.const(1)})
    with pytest.raises(BridgeError):
        symbol_transport_bridge(PointConnection.zero(SU2), TRIPLE, exact, bindings(3))


def test_homogeneity():
    A = PointConnection.from_field(SU2, TrigField.random(np.random.default_rng(4), 3))
    b = SU2.basis_element(1)
    y, xi = (-0.2, 0.1, 0, 0), (-1.0, 0.6, 0.8, 0.0)
    assert homogeneity_residual(A, y, xi, b, q=2.0) < 1e-12  # frozen ~1e-15
    # q = 0 leaves the transported value independent of the scale
    s1 = homogeneous_symbol(A, y, xi, b, 0.0)
    s3 = homogeneous_symbol(A, y, xi, b, 0.0, lam=3.0)
    assert np.abs(s1.mat - s3.mat).max() < 1e-12
    with pytest.raises(BridgeError):
        homogeneous_symbol(A, y, (0.0, 1, 0, 0), b, 1.0)
