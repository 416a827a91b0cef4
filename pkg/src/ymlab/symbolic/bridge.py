"""Reconnect free-generator symbols to matrix parallel transports.

The symbolic engine treats the transported generators as free symbols. Here
they are bound to algebra elements b_k at source points x_k, moved to the
interaction point y by the adjoint transport, and the evaluated bracket
expression is carried on to z. Because the adjoint transport is an algebra
automorphism, carrying the bracket must agree with bracketing the carried
generators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..lie import AlgebraElement
from ..transport import DEFAULT_STEPS, BrokenTriple, Path, adjoint_transport, as_point_connection
from .brackets import BracketExpr


class BridgeError(ValueError):
    pass


@dataclass
class BridgeResult:
    value: AlgebraElement          # P_{z<-y} expr(b~)
    transported_generators: dict   # k -> P_{z<-y} b~_k
    product_residual: float        # |P expr(b~) - expr(P b~)|


def _scalar(c) -> float:
    if isinstance(c, (int, float, np.floating)):
        return float(c)
    raise BridgeError("bracket coefficients must be plain numbers for matrix evaluation")


def symbol_transport_bridge(A, triple: BrokenTriple, expr: BracketExpr,
                            bindings: Mapping[int, AlgebraElement],
                            sources: Mapping[int, Sequence[float]] | None = None,
                            steps: int = DEFAULT_STEPS, scalar: Callable = _scalar) -> BridgeResult:
    """Evaluate ``expr`` at y with b~_k = P^{Ad}_{y<-x_k} b_k, then carry it to z.

    ``sources[k]`` is the point x_k (default: the triple's x for every k).
    """
    A = as_point_connection(A)
    used = _generators(expr)
    missing = sorted(k for k in used if k not in bindings)
    if missing:
        raise BridgeError(f"unbound generators: {', '.join(f'b{k}' for k in missing)}")
    sources = sources or {}
    y = np.asarray(triple.y, float)
    tilde = {}
    for k in used:
        x = np.asarray(sources.get(k, triple.x), float)
        b = bindings[k]
        tilde[k] = b if np.allclose(x, y) else adjoint_transport(A, Path.segment(x, y), b, steps)
    second = triple.second()
    at_y = AlgebraElement(A.alg, expr.evaluate({k: v.mat for k, v in tilde.items()}, scalar))
    value = adjoint_transport(A, second, at_y, steps)
    moved = {k: adjoint_transport(A, second, v, steps) for k, v in tilde.items()}
    bracket_of_moved = expr.evaluate({k: v.mat for k, v in moved.items()}, scalar)
    residual = float(np.abs(value.mat - bracket_of_moved).max())
    return BridgeResult(value, moved, residual)


def _generators(expr: BracketExpr) -> set[int]:
    out: set[int] = set()

    def walk(m):
        if isinstance(m, int):
            out.add(m)
        else:
            walk(m[0])
            walk(m[1])

    for z in expr.terms:
        walk(z)
    return out


def homogeneous_symbol(A, y: Sequence[float], xi: Sequence[float], b: AlgebraElement, q: float,
                       T: float = 0.5, lam: float = 1.0, steps: int = DEFAULT_STEPS) -> AlgebraElement:
    """Transport of the degree-q test symbol sigma(y, xi) = |xi_0|^q b along
    the null ray through y with direction lam * xi (raised index), evaluated
    at y + T xi^#.

    Scaling xi by lam speeds up the bicharacteristic by lam; the path is the
    same point set traversed in time T / lam, so only the homogeneous factor
    changes.
    """
    xi = np.asarray(xi, float) * lam
    if xi[0] == 0:
        raise BridgeError("the covector needs a nonzero time component")
    vel = np.array([-xi[0], xi[1], xi[2], xi[3]])
    if vel[0] < 0:
        vel = -vel
    y = np.asarray(y, float)
    end = y + T * vel / lam
    path = Path.segment(y, end, duration=T / lam)
    moved = adjoint_transport(as_point_connection(A), path, b, steps)
    return moved * (abs(xi[0]) ** q)


def homogeneity_residual(A, y, xi, b: AlgebraElement, q: float, lams: Sequence[float] = (0.5, 2.0, 3.0),
                         steps: int = DEFAULT_STEPS) -> float:
    """max over lam of |sigma_lam - lam^q sigma_1| for the transported test symbol."""
    base = homogeneous_symbol(A, y, xi, b, q, steps=steps)
    return float(max(np.abs(homogeneous_symbol(A, y, xi, b, q, lam=l, steps=steps).mat - l**q * base.mat).max()
                     for l in lams))
