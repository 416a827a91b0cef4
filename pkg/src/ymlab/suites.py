"""Verification suites behind the command-line interface.

Each suite returns a ``Report``; mathematical failures become FAIL checks,
while invalid requests raise ``UsageError``.
"""
from __future__ import annotations

from math import sqrt

import numpy as np

from .report import Report


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# symbols

def verify_symbols(order: int = 6) -> Report:
    from .symbolic.brackets import BracketExpr
    from .symbolic.exact import (ExactGeometry, exact_p, exact_two_fold_coefficients,
                                 printed_p_values, printed_two_fold_coefficients)
    from .symbolic.field import FieldElement
    from .symbolic.series import TruncationError
    from .symbolic.symbols import (Geometry, JacobiResidueError, coefficient_at, cubic_contribution,
                                   jacobi_limit, kappa_decomposition_residual, laurent_order,
                                   recover_nested_commutator, temporal_symbol_transform,
                                   three_fold_symbol)

    if order < 1:
        raise UsageError("the truncation order N must be a positive integer")
    rep = Report("verify-symbols", extra={"order": order})

    res = kappa_decomposition_residual(order)
    rep.add(f"kappa decomposition to O(s^N), N={order}", all(x.is_zero() for x in res), 0.0,
            "lightlike decomposition of eta into xi_1, xi_2, xi_3")

    eg = ExactGeometry()
    total = eg.eta_kl(1, 2, 3)
    rep.add("kappa decomposition, exact in a(s)", all((eg.eta[i] - total[i]).is_zero() for i in range(4)), 0.0,
            "lightlike decomposition of eta into xi_1, xi_2, xi_3")
    k1, k2, k3 = eg.kappa
    rep.add("kappa_2 - kappa_3 = r/s", (k2 - k3 - eg.r / eg.s).is_zero(), 0.0, "kappa coefficients")
    r_, s_ = 0.6, 0.2
    ar, as_ = sqrt(1 - r_**2), sqrt(1 - s_**2)
    closed = (1 - (1 + ar) / (1 - as_), 0.5 * (1 + ar) / (1 - as_) + 0.5 * r_ / s_,
              0.5 * (1 + ar) / (1 - as_) - 0.5 * r_ / s_)
    diff = max(abs(k.evaluate(r_, s_) - c) for k, c in zip(eg.kappa, closed))
    rep.add("kappa spot check at r=3/5, s=1/5", diff < 1e-9, diff, "kappa coefficients")
    rep.add("p(eta) = 0", exact_p(eg.eta).is_zero(), 0.0, "Minkowski quadratic form")

    printed = printed_two_fold_coefficients(eg)
    for kl, expected in printed.items():
        got = exact_two_fold_coefficients(*kl, eg)
        for beta in range(3):
            ok = (got[beta] - expected[beta]).is_zero()
            rep.add(f"c_({kl[0]}{kl[1]}),{beta}", ok, 0.0 if ok else None,
                    "two-fold interaction coefficients",
                    None if ok else f"difference {got[beta] - expected[beta]}")
    for kl, expected in printed_p_values(eg).items():
        diff_p = exact_p(eg.eta_kl(*kl)) - expected
        rep.add(f"p(eta_({kl[0]}{kl[1]}))", diff_p.is_zero(), 0.0 if diff_p.is_zero() else None,
                "quadratic form on the two-fold covectors")

    try:
        geom = Geometry(order)
        sym = three_fold_symbol(include_cubic=False, geom=geom)
    except TruncationError as exc:
        rep.add("three-fold symbol", False, None, "three-fold principal symbol", str(exc))
        return rep

    agree = all(coefficient_at(sym[0] - sym[1], m).is_zero() for m in (-1, 0))
    rep.add("beta=0 and beta=1 components agree through s^0", agree, 0.0, "three-fold principal symbol")
    f = FieldElement
    lead = coefficient_at(sym[1], -1)
    want = {(1, (2, 3)): f.const(-6), (2, (1, 3)): f.const(6), (3, (1, 2)): f.const(-6)}
    for mono, val in want.items():
        got = lead.coeff(mono, zero=f.const(0))
        rep.add(f"s^-1 coefficient of {_show(mono)}", got == val, 0.0, "three-fold principal symbol",
                None if got == val else f"got {got}")
    zeroth = coefficient_at(sym[1], 0)
    three_r = f.const(3) * f.r() / (f.const(1) + f.a())
    for mono in ((2, (1, 3)), (3, (1, 2))):
        got = zeroth.coeff(mono, zero=f.const(0))
        rep.add(f"s^0 coefficient of {_show(mono)} = 3r/(1+a(r))", got == three_r, 0.0,
                "three-fold principal symbol", None if got == three_r else f"got {got}")

    try:
        limit = jacobi_limit(sym, 1)
        expected = BracketExpr({(2, (1, 3)): three_r, (3, (1, 2)): three_r}).normalized(jacobi=True)
        ok = (limit - expected).is_zero()
        rep.add("Jacobi cancellation of s^-1 and the s -> 0 limit", ok, 0.0, "Jacobi cancellation")
    except JacobiResidueError as exc:
        rep.add("Jacobi cancellation of s^-1 and the s -> 0 limit", False, None, "Jacobi cancellation", str(exc))
        limit = None
    if limit is not None:
        special = limit.substitute({3: 2}).map_coeffs(lambda c: (f.const(1) + f.a()) / (f.const(6) * f.r()) * c)
        ok = (special - BracketExpr({(2, (1, 2)): f.const(1)}, jacobi=True)).is_zero()
        rep.add("b_3 = b_2: (1+a(r))/(6r) limit = [b2,[b1,b2]]", ok, 0.0, "specialization b_3 = b_2")

    bad = sym[1] + BracketExpr({(1, (2, 3)): _pole(order)})
    try:
        jacobi_limit(bad)
        rep.add("inserted Jacobi-violating pole is rejected", False, None, "Jacobi cancellation")
    except JacobiResidueError:
        rep.add("inserted Jacobi-violating pole is rejected", True, 0.0, "Jacobi cancellation")

    cubic = cubic_contribution(geom)
    for beta in (0, 1):
        v = laurent_order(cubic[beta])
        rep.add(f"cubic contribution to beta={beta} is O(s)", v >= 1, None, "order of the cubic terms",
                f"Laurent order {v}")

    spatial = temporal_symbol_transform(sym, geom.eta)
    one_plus_a = geom.a_r + 1
    # sym_0 = sym_1 holds through s^0, so the relation is checked there
    diff_t = spatial[0] - sym[1].scale(one_plus_a)
    ok = all(coefficient_at(diff_t, m).is_zero() for m in (-1, 0))
    rep.add("temporal-gauge relation: beta=1 output = (1+a(r)) sym_1 through s^0", ok, 0.0,
            "temporal-gauge symbol relation")
    rec = recover_nested_commutator(sym, geom)
    mono = list(rec.terms)
    ok = mono == [(2, (1, 2))] and not rec.terms[(2, (1, 2))].is_zero()
    rep.add("recovery of [b2,[b1,b2]] up to a nonzero scalar", ok, 0.0, "temporal-gauge symbol relation",
            f"scalar {rec.terms.get((2, (1, 2)))}")
    return rep


def _pole(order: int):
    from .symbolic.field import FieldElement
    from .symbolic.series import SymScalar
    return SymScalar.monomial(FieldElement.const(1), -1)


def _show(m) -> str:
    from .symbolic.brackets import show
    return show(m)


# ---------------------------------------------------------------------------
# algebra

def verify_algebra(n_max: int = 5, seed: int = 0, random_pairs: int = 0) -> Report:
    from .lie import (centre, diagonal_recursion_exact, exact_gell_mann, gell_mann_basis,
                      nested_span_dimension, u_algebra)

    if n_max < 2:
        raise UsageError(f"n_max must be at least 2 (got {n_max})")
    rep = Report("verify-algebra", seed=seed, extra={"n_max": n_max})
    dims = []
    for n in range(2, n_max + 1):
        alg = gell_mann_basis(n)
        dim = nested_span_dimension(alg, random_pairs=random_pairs, seed=seed)
        dims.append(dim)
        rep.add(f"nested span dimension su({n}) = {n * n - 1}", dim == n * n - 1, float(n * n - 1 - dim),
                "nested-commutator span")
        f = alg.structure
        jac = np.einsum("bcd,ade->abce", f, f) + np.einsum("cad,bde->abce", f, f) + np.einsum("abd,cde->abce", f, f)
        rep.add(f"Jacobi identity on su({n}) basis", np.abs(jac).max() < 1e-12, np.abs(jac).max(),
                "Lie algebra axioms")
        adinv = np.einsum("zxc,cy->zxy", f, alg.ip) + np.einsum("zyc,xc->zxy", f, alg.ip)
        rep.add(f"Ad-invariance of the inner product on su({n})", np.abs(adinv).max() < 1e-12,
                np.abs(adinv).max(), "bi-invariant metric")
        if n >= 3:
            g = exact_gell_mann(n)
            for l in range(2, n):
                diff = diagonal_recursion_exact(n, l) - g[("D", l)]
                ok = all(x == 0 for x in diff)
                rep.add(f"diagonal recursion su({n}), l={l}", ok, 0.0 if ok else None,
                        "diagonal generator recursion")
    rep.extra["span_dimensions"] = dims
    rep.add("centre of u(2) is one-dimensional", centre(u_algebra(2)).shape[0] == 1, None, "centre splitting")
    return rep


# ---------------------------------------------------------------------------
# transport

def pinned_gauge(alg, x, z, coeffs, amplitude: float = 0.7):
    """U(p) = exp(f(p) X) with f = amplitude |p - x|^2 |p - z|^2, so U(x) = U(z) = id.

    Returns closed-form callables (u, du) for ``PointConnection.gauge``.
    """
    X = alg.matrix(np.asarray(coeffs, float))
    w, V = np.linalg.eig(X)
    Vi = np.linalg.inv(V)
    x, z = np.asarray(x, float), np.asarray(z, float)

    def f(p):
        return amplitude * ((p - x) ** 2).sum(-1) * ((p - z) ** 2).sum(-1)

    def df(p):
        a, b = ((p - x) ** 2).sum(-1), ((p - z) ** 2).sum(-1)
        return amplitude * (2 * (p - x) * b[..., None] + 2 * (p - z) * a[..., None])

    def u(p):
        e = np.exp(f(p)[..., None] * w)
        return (V * e[..., None, :]) @ Vi

    def du(p):
        U = u(p)
        return df(p)[..., :, None, None] * (X @ U)[..., None, :, :]

    return u, du


def verify_transport(preset: str = "gauge-pair", count: int = 10, seed: int = 0, eps0: float = 0.9,
                     steps: int = 400, triples: list | None = None, tol: float = 1e-8) -> Report:
    from .fields import TrigField
    from .lie import bracket, gell_mann_basis
    from .transport import (BrokenTriple, Path, PointConnection, TransportError, adjoint_matrix,
                            adjoint_transport, broken_transform, centre_discrepancy,
                            centre_membership, principal_transport, sample_broken_triples)

    if preset not in ("zero", "gauge-pair"):
        raise UsageError(f"unknown transport preset {preset!r}")
    alg = gell_mann_basis(2)
    rng = np.random.default_rng(seed)
    if triples is None:
        trs = sample_broken_triples(eps0, count, seed=seed)
    else:
        try:
            trs = [BrokenTriple(tuple(t["x"]), tuple(t["y"]), tuple(t["z"])) for t in triples]
        except (TransportError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed triple: {exc}") from exc
    rep = Report("transport", seed=seed, extra={"preset": preset, "count": len(trs)})
    worst = {k: 0.0 for k in ("identity", "ad_consistency", "reparametrization", "composition",
                              "bracket_product", "centre_discrepancy")}
    for tr in trs:
        if preset == "zero":
            A = PointConnection.zero(alg)
            U = broken_transform(A, tr).mat
            worst["identity"] = max(worst["identity"], float(np.abs(U - np.eye(2)).max()))
            M = broken_transform(A, tr, rep="adjoint")
            worst["identity"] = max(worst["identity"], float(np.abs(M - np.eye(alg.d)).max()))
            continue
        A = PointConnection.from_field(alg, TrigField.random(rng, alg.d))
        b1, b2 = alg.random_element(rng), alg.random_element(rng)
        seg = tr.first()
        Ufirst = principal_transport(A, seg, steps).mat
        W = adjoint_transport(A, seg, b1, steps).mat
        worst["ad_consistency"] = max(worst["ad_consistency"],
                                      float(np.abs(W - Ufirst @ b1.mat @ np.linalg.inv(Ufirst)).max()))
        slow = principal_transport(A, Path.segment(tr.x, tr.y, duration=2.7), steps).mat
        worst["reparametrization"] = max(worst["reparametrization"], float(np.abs(slow - Ufirst).max()))
        mid = tuple(0.5 * (np.asarray(tr.x) + np.asarray(tr.y)) + 0.1 * (np.asarray(tr.y) - np.asarray(tr.x)))
        split = (principal_transport(A, Path.segment(mid, tr.y), steps)
                 @ principal_transport(A, Path.segment(tr.x, mid), steps))
        worst["composition"] = max(worst["composition"], float(np.abs(split.mat - Ufirst).max()))
        S = adjoint_matrix(A, tr.second(), alg, steps) @ adjoint_matrix(A, tr.first(), alg, steps)
        lhs = S @ bracket(b1, b2).coeffs
        rhs = alg.bracket_coeffs(S @ b1.coeffs, S @ b2.coeffs)
        worst["bracket_product"] = max(worst["bracket_product"], float(np.abs(lhs - rhs).max()))
        u, du = pinned_gauge(alg, tr.x, tr.z, rng.standard_normal(alg.d))
        B = A.gauge(u, du)
        uu = centre_discrepancy(A, B, tr, steps)
        worst["centre_discrepancy"] = max(worst["centre_discrepancy"], centre_membership(uu, alg))
    refs = {"identity": "transport of the zero connection",
            "ad_consistency": "adjoint transport as conjugation by the principal transport",
            "reparametrization": "independence of the parametrization",
            "composition": "transport over a split segment",
            "bracket_product": "transport commutes with the bracket",
            "centre_discrepancy": "finite-centre reduction for gauge-equivalent pairs"}
    keys = ["identity"] if preset == "zero" else [k for k in worst if k != "identity"]
    for k in keys:
        rep.add(k, worst[k] < tol, worst[k], refs[k])
    return rep


# ---------------------------------------------------------------------------
# wave solver

WAVE_PRESETS = ("zero", "su2-bump", "su2-planewave")


def run_wave(preset: str = "su2-bump", n: int = 16, nt: int | None = None, ratio: float = 0.5,
             epsilon: float = 0.5, nonlinear: bool = True, margin: float = 0.15,
             leakage_tol: float = 1e-10, constraint_h2: float = 0.5, seed: int = 0) -> tuple[Report, list[dict]]:
    """March one preset and report the on-the-fly diagnostics.

    ``zero``: zero background, zero source. ``su2-bump``: zero background with
    the default bump source. ``su2-planewave``: the plane-wave background
    with the same source. The Lorenz residual must stay below
    ``constraint_h2 * h^2``.
    """
    from .forms import Grid
    from .lie import gell_mann_basis
    from .wave.background import preset as background
    from .wave.diagnostics import monitored_run
    from .forms import CFL_BOUND
    from .wave.solver import CFLError, LorenzSystem
    from .wave.sources import SourceSpec, single_bump

    if ratio > CFL_BOUND + 1e-12:
        raise CFLError(f"tau/h = {ratio:.4f} exceeds the CFL bound 1/sqrt(3) = {CFL_BOUND:.4f}")
    if preset not in WAVE_PRESETS:
        raise UsageError(f"unknown wave preset {preset!r}; choose from {WAVE_PRESETS}")
    if n < 5:
        raise UsageError("the grid needs at least 5 points per axis")
    alg = gell_mann_basis(2)
    grid = Grid.box(n, nt, ratio=ratio)
    bg = background("su2-planewave" if preset == "su2-planewave" else "zero", grid, alg)
    src = SourceSpec.zero(alg.d) if preset == "zero" else single_bump(alg.d, np.eye(3), epsilon=epsilon)
    system = LorenzSystem(bg, src, grid, nonlinear=nonlinear)
    _, mon = monitored_run(system, margin)
    s = mon.summary()
    rep = Report("run-wave", seed=seed, extra={"preset": preset, "grid": list(grid.shape), "h": grid.h,
                                                "tau": grid.tau, "summary": s})
    rep.add("finite propagation speed (leakage)", s["leakage"] < leakage_tol, s["leakage"],
            "finite speed of propagation")
    bound = constraint_h2 * grid.h**2
    rep.add("relative Lorenz residual", s["constraint_max"] <= bound, s["constraint_max"],
            "constraint propagation", f"bound {bound:.3e}")
    rep.add("compatibility residual is finite", bool(np.isfinite(s["compat_max"])), s["compat_max"],
            "compatibility of the assembled source")
    return rep, mon.rows


def write_rows(rows: list[dict], path) -> None:
    import csv
    fields = ["t", "max_W", "max_J0", "lorenz_residual", "compat_residual", "leakage", "energy"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(float(row[k])) for k in fields})
