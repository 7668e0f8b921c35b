"""Quadrature on the reference triangle and the unit interval, plus the
reference edge maps.

The reference triangle has vertices (0,0), (1,0), (0,1). Triangle rules are
collapsed (conical) Gauss products: Gauss-Jacobi in the collapsed direction
and Gauss-Legendre along the fibre. They have positive weights, all points
strictly inside the triangle, and are exact up to the requested order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

MAX_ORDER_2D = 9


@dataclass(frozen=True)
class QuadRule2D:
    order: int
    points: np.ndarray  # (R, 2)
    weights: np.ndarray  # (R,)

    @property
    def num_points(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class QuadRule1D:
    order: int
    points: np.ndarray  # (R,) in (0, 1)
    weights: np.ndarray  # (R,), sum 1

    @property
    def num_points(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def quad_rule_2d(order: int) -> QuadRule2D:
    """Positive interior rule on the reference triangle, exact to ``order``."""
    if not 0 <= order <= MAX_ORDER_2D:
        raise ValueError(f"unsupported triangle quadrature order {order}")
    n = max(1, (order + 2) // 2)
    # x1 = s, x2 = (1 - s) t with s in (0,1) carrying weight (1 - s)
    xs, ws = roots_jacobi(n, 1.0, 0.0)
    s = (xs + 1.0) / 2.0
    ws = ws / 4.0
    xt, wt = np.polynomial.legendre.leggauss(n)
    t = (xt + 1.0) / 2.0
    wt = wt / 2.0
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    pts = np.column_stack([S.ravel(), ((1.0 - S) * T).ravel()])
    rule = QuadRule2D(order, pts, W.ravel())
    rule.points.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


@lru_cache(maxsize=None)
def quad_rule_1d(order: int) -> QuadRule1D:
    """Gauss-Legendre rule on (0, 1), exact to ``order``."""
    if order < 0:
        raise ValueError(f"unsupported edge quadrature order {order}")
    n = max(1, (order + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    rule = QuadRule1D(order, (x + 1.0) / 2.0, w / 2.0)
    rule.points.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


def gamma_map(n: int, s):
    """Parametrisation of reference edge ``n`` (1-based), counter-clockwise.

    Edge n is opposite reference vertex n. Accepts scalar or array ``s`` and
    returns points with a trailing axis of length 2.
    """
    s = np.asarray(s, dtype=float)
    if n == 1:
        return np.stack([1.0 - s, s], axis=-1)
    if n == 2:
        return np.stack([np.zeros_like(s), 1.0 - s], axis=-1)
    if n == 3:
        return np.stack([s, np.zeros_like(s)], axis=-1)
    raise ValueError(f"local edge index must be 1, 2 or 3, got {n}")


def gamma_inverse(n: int, xhat):
    """Edge parameter s of a point ``xhat`` lying on reference edge ``n``."""
    xhat = np.asarray(xhat, dtype=float)
    if n == 1:
        return xhat[..., 1]
    if n == 2:
        return 1.0 - xhat[..., 1]
    if n == 3:
        return xhat[..., 0]
    raise ValueError(f"local edge index must be 1, 2 or 3, got {n}")


def theta_map(n_minus: int, n_plus: int, xhat):
    """Map a point on edge ``n_minus`` of one element to the matching point on
    edge ``n_plus`` of its neighbour.

    Both elements are counter-clockwise, so the shared edge is traversed in
    opposite directions: parameter s on one side is 1 - s on the other.
    """
    return gamma_map(n_plus, 1.0 - gamma_inverse(n_minus, xhat))
