"""Polynomial bases: the orthonormal modal basis on the reference triangle,
multi-index bookkeeping, and the per-element Taylor basis used by the
limiters.

Index conventions: public functions that take a basis index ``i`` use the
1-based numbering of the multi-index table; arrays are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .quadrature import quad_rule_2d

MAX_MODAL_DEGREE = 4


def num_local_dofs(p: int) -> int:
    if p < 0:
        raise ValueError(f"polynomial degree must be non-negative, got {p}")
    return (p + 1) * (p + 2) // 2


def linear_index(a) -> int:
    """1-based position of multi-index ``a`` in the graded ordering."""
    a1, a2 = int(a[0]), int(a[1])
    if a1 < 0 or a2 < 0:
        raise ValueError(f"multi-index entries must be non-negative, got {a}")
    d = a1 + a2
    return d * (d + 1) // 2 + a2 + 1


@lru_cache(maxsize=None)
def multi_index_table(p: int) -> tuple[tuple[int, int], ...]:
    """All multi-indices of total degree <= p; entry j-1 has linear index j."""
    return tuple((d - a2, a2) for d in range(p + 1) for a2 in range(d + 1))


def degrees(p: int) -> np.ndarray:
    """Total degree |a_j| for every basis index (0-based array)."""
    return np.array([a1 + a2 for a1, a2 in multi_index_table(p)])


def _monomial_integral(a1: int, a2: int) -> Fraction:
    # integral of x^a1 y^a2 over the reference triangle
    return Fraction(factorial(a1) * factorial(a2), factorial(a1 + a2 + 2))


@lru_cache(maxsize=None)
def _modal_coefficients(p: int) -> np.ndarray:
    """Monomial coefficients of the orthonormal basis, row i = function i.

    Gram-Schmidt runs in exact rational arithmetic on the graded monomial
    sequence; only the final normalisation is rounded to double.
    """
    idx = multi_index_table(p)
    N = len(idx)
    gram = [[_monomial_integral(a[0] + b[0], a[1] + b[1]) for b in idx] for a in idx]

    def inner(u, v):
        return sum(u[i] * v[j] * gram[i][j] for i in range(N) if u[i] for j in range(N) if v[j])

    ortho = []
    norms = []
    for i in range(N):
        v = [Fraction(0)] * N
        v[i] = Fraction(1)
        for q, nq in zip(ortho, norms):
            c = inner(v, q) / nq
            v = [vi - c * qi for vi, qi in zip(v, q)]
        ortho.append(v)
        norms.append(inner(v, v))
    coef = np.array([[float(c) / sqrt(float(nq)) for c in v] for v, nq in zip(ortho, norms)])
    coef.setflags(write=False)
    return coef


def _monomials(p: int, x, y):
    """Stack x^a1 y^a2 over the multi-index table along a new last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xp = [np.ones_like(x)]
    yp = [np.ones_like(y)]
    for _ in range(p):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    return np.stack([xp[a1] * yp[a2] for a1, a2 in multi_index_table(p)], axis=-1)


def _monomial_grads(p: int, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xp = [np.ones_like(x)]
    yp = [np.ones_like(y)]
    for _ in range(p):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    zero = np.zeros_like(x)
    dx = [a1 * xp[a1 - 1] * yp[a2] if a1 else zero for a1, a2 in multi_index_table(p)]
    dy = [a2 * xp[a1] * yp[a2 - 1] if a2 else zero for a1, a2 in multi_index_table(p)]
    return np.stack(dx, axis=-1), np.stack(dy, axis=-1)


def _check_degree(p: int) -> None:
    if not 0 <= p <= MAX_MODAL_DEGREE:
        raise ValueError(f"modal basis supports degrees 0..{MAX_MODAL_DEGREE}, got {p}")


def modal_values(p: int, xhat) -> np.ndarray:
    """All modal basis functions at reference points: shape (..., N)."""
    _check_degree(p)
    xhat = np.asarray(xhat, dtype=float)
    return _monomials(p, xhat[..., 0], xhat[..., 1]) @ _modal_coefficients(p).T


def modal_gradients(p: int, xhat) -> np.ndarray:
    """Reference gradients of all modal functions: shape (..., N, 2)."""
    _check_degree(p)
    xhat = np.asarray(xhat, dtype=float)
    dx, dy = _monomial_grads(p, xhat[..., 0], xhat[..., 1])
    coef = _modal_coefficients(p)
    return np.stack([dx @ coef.T, dy @ coef.T], axis=-1)


def _check_index(p: int, i: int) -> None:
    if not 1 <= i <= num_local_dofs(p):
        raise ValueError(f"basis index {i} out of range 1..{num_local_dofs(p)}")


def eval_modal(p: int, i: int, xhat):
    _check_index(p, i)
    return modal_values(p, xhat)[..., i - 1]


def eval_modal_grad(p: int, i: int, xhat):
    _check_index(p, i)
    return modal_gradients(p, xhat)[..., i - 1, :]


@dataclass(frozen=True)
class ModalBasis:
    """Convenience handle on the modal family of degree ``p``."""

    p: int

    def __post_init__(self):
        _check_degree(self.p)

    @property
    def N(self) -> int:
        return num_local_dofs(self.p)

    def values(self, xhat):
        return modal_values(self.p, xhat)

    def gradients(self, xhat):
        return modal_gradients(self.p, xhat)


# --- Taylor basis ---------------------------------------------------------


@dataclass(frozen=True)
class TaylorContext:
    """Per-element data of the Taylor basis on a fixed mesh.

    ``monomial_means[k, j]`` is the mean over element k of
    (x - x_kc)^{a_j}; it is zero for |a_j| <= 1 by construction.
    """

    p: int
    centroids: np.ndarray  # (K, 2)
    bbox_half: np.ndarray  # (K, 2)
    monomial_means: np.ndarray  # (K, N)
    scale: np.ndarray  # (K, N): a! (dx)^a per basis function

    @classmethod
    def from_mesh(cls, mesh, p: int) -> "TaylorContext":
        N = num_local_dofs(p)
        rule = quad_rule_2d(max(p, 1))
        x = mesh.map_to_physical(rule.points)  # (K, R, 2)
        d = x - mesh.centroids[:, None, :]
        mons = _monomials(p, d[..., 0], d[..., 1])  # (K, R, N)
        # reference weights sum to 1/2
        means = 2.0 * np.einsum("r,krn->kn", rule.weights, mons)
        idx = multi_index_table(p)
        deg = degrees(p)
        means[:, deg <= 1] = 0.0
        dx = mesh.bbox_half
        fact = np.array([factorial(a1) * factorial(a2) for a1, a2 in idx], dtype=float)
        pw = np.array(idx)
        scale = fact[None, :] * dx[:, None, 0] ** pw[None, :, 0] * dx[:, None, 1] ** pw[None, :, 1]
        for arr in (means, scale):
            arr.setflags(write=False)
        return cls(p, mesh.centroids, mesh.bbox_half, means, scale)

    @property
    def N(self) -> int:
        return num_local_dofs(self.p)

    def values(self, x, k=None) -> np.ndarray:
        """Taylor basis values at physical points.

        ``x`` has shape (K, R, 2) when ``k`` is None (points per element),
        otherwise shape (..., 2) evaluated on element ``k``.
        """
        if k is None:
            xc, mean, scale = self.centroids[:, None, :], self.monomial_means[:, None, :], self.scale[:, None, :]
        else:
            xc, mean, scale = self.centroids[k], self.monomial_means[k], self.scale[k]
        d = np.asarray(x, dtype=float) - xc
        return (_monomials(self.p, d[..., 0], d[..., 1]) - mean) / scale


def eval_taylor(ctx: TaylorContext, k: int, i: int, x):
    """Value of Taylor basis function ``i`` (1-based) of element ``k`` at ``x``."""
    _check_index(ctx.p, i)
    return ctx.values(x, k)[..., i - 1]


def taylor_bases_at_vertices(mesh, p: int, ctx: TaylorContext | None = None) -> np.ndarray:
    """Table (K, 3, N) of Taylor basis values at the element vertices."""
    if ctx is None:
        ctx = TaylorContext.from_mesh(mesh, p)
    return ctx.values(mesh.vertices[mesh.triangles])
