from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from ymlab.lie import gell_mann_basis
from ymlab.symbolic.brackets import BracketExpr, degree, generators, lie_bracket, normal_form
from ymlab.symbolic.exact import (ExactGeometry, QuadS, exact_p, exact_two_fold_coefficients,
                                  printed_p_values, printed_two_fold_coefficients)
from ymlab.symbolic.field import FieldElement, Poly, poly_gcd
from ymlab.symbolic.series import SymScalar, TruncationError, a_s, s
from ymlab.symbolic.symbols import (Geometry, JacobiResidueError, coefficient_at, cubic_contribution,
                                    expected_three_fold_terms, jacobi_limit, kappa_decomposition_residual,
                                    laurent_order, minkowski_p, recover_nested_commutator,
                                    temporal_symbol_transform, three_fold_symbol, two_fold_coefficients,
                                    two_fold_numerator)

F = FieldElement
fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def field_elements(draw):
    p = Poly([draw(fracs) for _ in range(3)])
    q = Poly([draw(fracs) for _ in range(2)])
    d = Poly([draw(fracs), draw(fracs), Fraction(1)])  # monic, hence nonzero
    return FieldElement(p, q, d)


# the field K

def test_poly_division_and_gcd():
    a, b = Poly([-1, 0, 1]), Poly([1, 1])  # (r-1)(r+1), r+1
    q, rem = a.divmod(b)
    assert q == Poly([-1, 1]) and not rem
    assert poly_gcd(a, Poly([2, 2])) == Poly([1, 1])
    with pytest.raises(ZeroDivisionError):
        a.divmod(Poly())


def test_field_relation_and_canonical_form():
    a, r = F.a(), F.r()
    assert a * a == 1 - r * r
    # (1 - a)(1 + a) = r^2, so r / (1 + a) = (1 - a) / r
    assert r / (1 + a) == (1 - a) / r
    assert str(F.const(Fraction(1, 2))) == "(1/2)"
    with pytest.raises(ZeroDivisionError):
        F.const(0).inverse()


@settings(max_examples=60, deadline=None)
@given(field_elements(), field_elements(), field_elements())
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == F.const(0)
    if not x.is_zero():
        assert x * x.inverse() == F.const(1)


@settings(max_examples=40, deadline=None)
@given(field_elements(), field_elements(), st.floats(0.1, 0.9))
def test_field_evaluation_is_a_homomorphism(x, y, r):
    try:
        vx, vy = x.evaluate(r), y.evaluate(r)
        prod = (x * y).evaluate(r)
    except ZeroDivisionError:
        return
    assert prod == pytest.approx(vx * vy, rel=1e-9, abs=1e-9)
    assert (x + y).evaluate(r) == pytest.approx(vx + vy, rel=1e-9, abs=1e-9)


# truncated series

def test_series_precision_tracking():
    x = SymScalar({0: F.const(1), 1: F.const(1)}, prec=5)  # 1 + s + O(s^5)
    inv = x.inverse()
    assert inv.prec == 5
    assert [inv.coeff(m) for m in range(5)] == [F.const((-1) ** m) for m in range(5)]
    with pytest.raises(TruncationError):
        inv.coeff(5)
    assert (x * inv - 1).is_zero()
    assert (s() * s().inverse()) == SymScalar.const(1)
    with pytest.raises(TruncationError):
        SymScalar.zero(3).inverse()
    with pytest.raises(TruncationError):
        SymScalar({0: F.const(1), 1: F.const(1)}).inverse()


def test_a_s_matches_sympy_series():
    N = 8
    ref = sp.series(sp.sqrt(1 - sp.Symbol("s") ** 2), sp.Symbol("s"), 0, N + 1).removeO()
    poly = sp.Poly(ref, sp.Symbol("s"))
    ours = a_s(N)
    for (m,), c in poly.terms():
        assert ours.coeff(m) == F.const(Fraction(int(c.p), int(c.q)))
    assert ours.prec == N + 1
    sq = ours * ours
    assert sq.prec == N + 1 and (sq - SymScalar({0: F.const(1), 2: F.const(-1)})).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.lists(fracs, min_size=3, max_size=3), st.lists(fracs, min_size=3, max_size=3))
def test_series_ring_axioms(c1, c2):
    x = SymScalar({m - 1: F.const(c) for m, c in enumerate(c1)}, prec=4)
    y = SymScalar({m: F.const(c) for m, c in enumerate(c2)}, prec=5)
    assert (x * y).agrees_with(y * x)
    assert ((x + y) - y) == x.truncate(min(x.prec, y.prec))
    assert (x * (y + y)).agrees_with(x * y + x * y)


# exact K[s, a_s]

def test_quads_arithmetic():
    one, a = QuadS(1), QuadS(0, 1)
    s_ = QuadS(SymScalar.monomial(1, 1))
    assert a * a == one - s_ * s_
    assert (one - a) * (one + a) == s_ * s_
    assert (one - a) * (one - a).inverse() == one
    with pytest.raises(ZeroDivisionError):
        (one + s_).inverse()
    assert (one + a).evaluate(0.3, 0.2) == pytest.approx(1 + np.sqrt(1 - 0.04))


def test_kappa_against_sympy_linear_solve():
    # oracle: solve eta = sum kappa_k xi_k directly
    r, s_ = sp.symbols("r s", positive=True)
    k = sp.symbols("k1:4")
    ar, as_ = sp.sqrt(1 - r**2), sp.sqrt(1 - s_**2)
    xi = [(1, 1, 0), (1, as_, s_), (1, as_, -s_)]
    eta = (1, -ar, r)
    sol = sp.solve([sum(k[j] * xi[j][i] for j in range(3)) - eta[i] for i in range(3)], k, dict=True)[0]
    eg = ExactGeometry()
    for rv, sv in [(0.6, 0.2), (0.3, 0.05), (0.9, 0.5)]:
        for j in range(3):
            want = float(sol[k[j]].subs({r: rv, s_: sv}))
            assert eg.kappa[j].evaluate(rv, sv) == pytest.approx(want, rel=1e-12)


def test_kappa_identities_exact():
    eg = ExactGeometry()
    total = eg.eta_kl(1, 2, 3)
    assert all((eg.eta[i] - total[i]).is_zero() for i in range(4))
    k1, k2, k3 = eg.kappa
    assert (k2 - k3 - eg.r / eg.s).is_zero()
    assert exact_p(eg.eta).is_zero()
    assert all(exact_p(x).is_zero() for x in eg.xi)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_kappa_decomposition_truncated(N):
    res = kappa_decomposition_residual(N)
    assert all(x.is_zero() for x in res)
    assert min(x.prec for x in res) >= N - 3


def test_kappa_spot_value():
    eg = ExactGeometry()
    r, s_ = 0.6, 0.2
    ar, as_ = 0.8, np.sqrt(1 - 0.04)
    closed = (1 - (1 + ar) / (1 - as_), 0.5 * (1 + ar) / (1 - as_) + 1.5, 0.5 * (1 + ar) / (1 - as_) - 1.5)
    assert max(abs(k.evaluate(r, s_) - c) for k, c in zip(eg.kappa, closed)) < 1e-9


@pytest.mark.parametrize("kl", [(1, 2), (1, 3), (2, 3)])
def test_two_fold_coefficients_exact(kl):
    eg = ExactGeometry()
    got = exact_two_fold_coefficients(*kl, eg)
    want = printed_two_fold_coefficients(eg)[kl]
    for beta in range(3):
        assert (got[beta] - want[beta]).is_zero()
    assert got[3].is_zero()
    assert (exact_p(eg.eta_kl(*kl)) - printed_p_values(eg)[kl]).is_zero()


def test_two_fold_coefficients_numeric_oracle():
    # independent route: floats for kappa, omega, xi and the contraction kernel
    r, s_ = 0.6, 0.2
    eg = ExactGeometry()
    kap = [k.evaluate(r, s_) for k in eg.kappa]
    as_ = np.sqrt(1 - s_ * s_)
    xi = np.array([[1, 1, 0, 0], [1, as_, s_, 0], [1, as_, -s_, 0]])
    om = np.array([[0, 0, 1, 0], [s_, 0, 1, 0], [-s_, 0, 1, 0]])
    g = np.diag([-1.0, 1, 1, 1])
    for k, l in [(1, 2), (1, 3), (2, 3)]:
        ek, el = kap[k - 1] * xi[k - 1], kap[l - 1] * xi[l - 1]
        wk, wl = om[k - 1], om[l - 1]
        # 2 el.wk^# wl_b - el_b wk.wl^# + 2 ek.wl^# (-wk_b) + ek_b wl.wk^#, on [b_k, b_l]
        c = 2 * (el @ g @ wk) * wl - el * (wk @ g @ wl) - 2 * (ek @ g @ wl) * wk + ek * (wl @ g @ wk)
        got = [x.evaluate(r, s_) for x in exact_two_fold_coefficients(k, l, eg)]
        assert np.allclose(got, c, atol=1e-12)


def test_two_fold_invalid_pair():
    with pytest.raises(ValueError):
        two_fold_numerator(1, 1, Geometry(4))


def test_truncated_two_fold_agree_with_exact():
    c = two_fold_coefficients(1, 2, order=6)
    eg = ExactGeometry()
    exact = exact_two_fold_coefficients(1, 2, eg)
    for x, e in zip(c, exact):
        assert x.evaluate(0.6, 1e-3) == pytest.approx(e.evaluate(0.6, 1e-3), rel=1e-6, abs=1e-9)


# bracket normal form

def test_antisymmetry_normal_form():
    assert normal_form((1, 1)) == []
    assert normal_form((2, 1)) == [(-1, (1, 2))]
    assert normal_form(((1, 2), 3), jacobi=False) == [(-1, (3, (1, 2)))]
    # with Jacobi: -[b3,[b1,b2]] = [b1,[b2,b3]] - [b2,[b1,b3]]
    assert sorted(normal_form(((1, 2), 3))) == [(-1, (2, (1, 3))), (1, (1, (2, 3)))]
    assert degree((1, (2, 3))) == 3 and generators((1, (2, 3))) == [1, 2, 3]


def test_jacobi_identity_reduces_to_zero():
    one = F.const(1)
    cyc = BracketExpr({(1, (2, 3)): one, (2, (3, 1)): one, (3, (1, 2)): one}, jacobi=True)
    assert cyc.is_zero()
    plain = BracketExpr({(1, (2, 3)): one, (2, (3, 1)): one, (3, (1, 2)): one})
    assert not plain.is_zero()
    assert plain.normalized(jacobi=True).is_zero()


monomials = st.recursive(st.integers(1, 3), lambda inner: st.tuples(inner, inner), max_leaves=4)


@settings(max_examples=80, deadline=None)
@given(monomials, st.integers(0, 2**31))
def test_normal_form_preserves_value(m, seed):
    # evaluating with random matrices is unchanged by normalization; normalizing twice is a no-op
    rng = np.random.default_rng(seed)
    alg = gell_mann_basis(3)
    B = {k: alg.random_element(rng).mat for k in (1, 2, 3)}
    raw = BracketExpr({m: 1.0}, _normal=True)
    for jac in (False, True):
        nf = BracketExpr({m: 1.0}, jacobi=jac)
        assert np.abs(nf.evaluate(B) - raw.evaluate(B)).max() < 1e-10
        assert nf.normalized(jacobi=jac).terms == nf.terms


def test_lie_bracket_bilinear_and_antisymmetric():
    one = F.const(1)
    x = BracketExpr({1: one, 2: F.r()})
    y = BracketExpr({3: F.a()})
    assert (lie_bracket(x, y) + lie_bracket(y, x)).is_zero()
    assert lie_bracket(x, x).is_zero()
    z = BracketExpr({2: one})
    assert (lie_bracket(x + z, y) - lie_bracket(x, y) - lie_bracket(z, y)).is_zero()


# three-fold symbol

@pytest.fixture(scope="module")
def sym6():
    g = Geometry(6)
    return g, three_fold_symbol(geom=g)


def test_three_fold_printed_coefficients(sym6):
    _, sym = sym6
    exp = expected_three_fold_terms()
    for m, want in exp.items():
        coeffs = coefficient_at(sym[1], m)
        for mono, val in want.items():
            assert coeffs.coeff(mono, zero=F.const(0)) == val
    assert all(coefficient_at(sym[0] - sym[1], m).is_zero() for m in (-1, 0))


def test_jacobi_limit_and_specialization(sym6):
    _, sym = sym6
    three_r = F.const(3) * F.r() / (1 + F.a())
    lim = jacobi_limit(sym, 1)
    want = BracketExpr({(2, (1, 3)): three_r, (3, (1, 2)): three_r}).normalized(jacobi=True)
    assert (lim - want).is_zero()
    special = lim.substitute({3: 2}).map_coeffs(lambda c: (1 + F.a()) / (F.const(6) * F.r()) * c)
    assert (special - BracketExpr({(2, (1, 2)): F.const(1)}, jacobi=True)).is_zero()


def test_jacobi_limit_numeric(sym6):
    # bound to su(3) matrices the s^-1 pole cancels and the value tends to the limit
    _, sym = sym6
    lim = jacobi_limit(sym, 1)
    alg = gell_mann_basis(3)
    rng = np.random.default_rng(0)
    B = {k: alg.random_element(rng).mat for k in (1, 2, 3)}
    r = 0.6
    target = lim.evaluate(B, scalar=lambda c: c.evaluate(r))
    errs = [np.abs(sym[1].evaluate(B, scalar=lambda c: c.evaluate(r, s_)) - target).max() for s_ in (1e-2, 1e-3)]
    assert errs[0] / errs[1] == pytest.approx(10, rel=0.01)  # O(s)
    assert errs[1] < 0.02


def test_jacobi_violating_pole_rejected(sym6):
    _, sym = sym6
    bad = sym[1] + BracketExpr({(1, (2, 3)): SymScalar.monomial(1, -1)})
    with pytest.raises(JacobiResidueError):
        jacobi_limit(bad)


def test_cubic_contribution_order(sym6):
    g, _ = sym6
    cubic = cubic_contribution(g)
    orders = [laurent_order(cubic[b]) for b in range(4)]
    assert orders[0] >= 1 and orders[1] >= 1
    assert orders == [1, float("inf"), 2, float("inf")]  # frozen


def test_three_fold_with_cubic(sym6):
    g, sym = sym6
    full = three_fold_symbol(include_cubic=True, geom=g)
    assert (jacobi_limit(full, 1) - jacobi_limit(sym, 1)).is_zero()


def test_truncation_order_errors():
    with pytest.raises(TruncationError, match="N=4"):
        three_fold_symbol(order=4)
    with pytest.raises(TruncationError, match="truncation insufficient at N=2"):
        three_fold_symbol(order=2)
    three_fold_symbol(order=5)


def test_temporal_transform_and_recovery(sym6):
    g, sym = sym6
    spatial = temporal_symbol_transform(sym, g.eta)
    diff = spatial[0] - sym[1].scale(g.a_r + 1)
    assert all(coefficient_at(diff, m).is_zero() for m in (-1, 0))
    rec = recover_nested_commutator(sym, g)
    assert list(rec.terms) == [(2, (1, 2))] and not rec.terms[(2, (1, 2))].is_zero()


def test_minkowski_p_truncated():
    g = Geometry(6)
    assert minkowski_p(g.eta).is_zero()
    assert all(minkowski_p(x).is_zero() for x in g.xi)
