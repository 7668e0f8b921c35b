"""Vertex-based slope limiters acting on Taylor-basis coefficients.

Three variants are provided:

* ``linear``: limit the gradient with one factor per element and drop all
  superlinear coefficients unless the element is left untouched;
* ``hierarchical``: one factor per derivative order, computed from linear
  reconstructions of the derivatives and made non-increasing towards high
  orders;
* ``strict``: full reconstructions of the derivatives, each factor applied
  immediately to all coefficients of that order and above before the next
  lower order is examined.

Bounds at a vertex are the extreme centroid values over all elements
sharing that vertex: cell means for the function itself and centroid
derivatives for the higher levels. Taylor coefficients carry a per-element
factor (bounding-box half widths to the power a), which is divided out
before values of different elements are compared. At boundary vertices with
prescribed data the function bounds are widened by that value, and the
derivative levels, for which no data exist, are left unconstrained there.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basis import degrees, linear_index, multi_index_table
from .projection import dg_to_taylor, taylor_to_dg

VARIANTS = ("none", "linear", "hierarchical", "strict")

_ROUNDOFF = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class LimiterConfig:
    variant: str = "none"
    epsilon: float = 1e-8
    bdr_mask: np.ndarray | None = None  # (K, 3) bool
    bdr_values: np.ndarray | None = None  # (K, 3)
    # linear variant: keep superlinear terms only if the full expansion is in bounds too
    linear_full_check: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown limiter {self.variant!r}; choose from {VARIANTS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def with_boundary(self, mask, values) -> "LimiterConfig":
        return replace(self, bdr_mask=mask, bdr_values=values)

    def without_boundary(self) -> "LimiterConfig":
        return replace(self, bdr_mask=None, bdr_values=None)


@dataclass(frozen=True)
class PatchBounds:
    cmin: np.ndarray  # (K, 3) or (K, 3, m)
    cmax: np.ndarray


def compute_patch_bounds(mesh, centroid_values, bdr_mask=None, bdr_values=None,
                         include_boundary: bool = False) -> PatchBounds:
    """Min/max of centroid values over the vertex patch of every element
    vertex. ``centroid_values`` may carry a trailing axis of several fields."""
    c = np.asarray(centroid_values, dtype=float)
    gathered = c[mesh.patch_elems]
    starts = mesh.patch_ptr[:-1]
    vmin = np.minimum.reduceat(gathered, starts, axis=0)
    vmax = np.maximum.reduceat(gathered, starts, axis=0)
    cmin = vmin[mesh.triangles]
    cmax = vmax[mesh.triangles]
    if include_boundary and bdr_mask is not None:
        mask = np.asarray(bdr_mask, dtype=bool)
        vals = np.asarray(bdr_values, dtype=float)
        if cmin.ndim == 3:
            mask, vals = mask[..., None], vals[..., None]
        cmin = np.where(mask, np.minimum(cmin, vals), cmin)
        cmax = np.where(mask, np.maximum(cmax, vals), cmax)
    return PatchBounds(cmin, cmax)


def vertex_based_alpha(centroid, vertex_vals, bounds: PatchBounds, epsilon: float = 1e-8,
                       free=None) -> np.ndarray:
    """Correction factor per element (and per field on a trailing axis).

    Thresholds are shifted inwards by epsilon and the denominators pushed
    away from zero by epsilon; the result is clipped to [0, 1]. Vertices
    flagged in ``free`` (K, 3), and vertices whose deviation from the centroid
    is at rounding level, impose no constraint.
    """
    cc = np.asarray(centroid, dtype=float)[:, None, ...]
    cv = np.asarray(vertex_vals, dtype=float)
    d = cv - cc
    # deviations at rounding level of the patch data cannot leave the bounds
    scale = np.abs(cc) + np.abs(d).max(axis=1, keepdims=True)
    tol = _ROUNDOFF * (scale + np.abs(bounds.cmax) + np.abs(bounds.cmin))
    moved = np.abs(d) > tol
    above = moved & (cv > bounds.cmax - epsilon)
    below = moved & ~above & (cv < bounds.cmin + epsilon)
    if free is not None:
        f = np.asarray(free, dtype=bool).reshape(free.shape + (1,) * (cv.ndim - 2))
        above &= ~f
        below &= ~f
    ratio = np.ones_like(cv)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(above, (bounds.cmax - cc) / (d + epsilon), ratio)
        ratio = np.where(below, (bounds.cmin - cc) / (d - epsilon), ratio)
    ratio = np.nan_to_num(ratio, nan=0.0, posinf=1.0, neginf=0.0)
    return np.clip(ratio.min(axis=1), 0.0, 1.0)


def _check_taylor(CT, tv):
    CT = np.asarray(CT, dtype=float)
    if CT.ndim != 2 or tv.shape != (CT.shape[0], 3, CT.shape[1]):
        raise ValueError("Taylor coefficients and vertex basis table do not match")
    return CT


def _degree(N: int) -> int:
    return int(round((np.sqrt(8 * N + 1) - 3) / 2))


def limit_taylor_linear(mesh, CT, tv, config: LimiterConfig, return_alpha: bool = False):
    """``tv`` is the (K, 3, N) table of Taylor basis values at the vertices."""
    CT = _check_taylor(CT, tv)
    out = CT.copy()
    if CT.shape[1] == 1:
        return (out, np.ones(len(CT))) if return_alpha else out
    cc = CT[:, 0]
    cv = cc[:, None] + CT[:, None, 1] * tv[:, :, 1] + CT[:, None, 2] * tv[:, :, 2]
    bounds = compute_patch_bounds(mesh, cc, config.bdr_mask, config.bdr_values, include_boundary=True)
    alpha = vertex_based_alpha(cc, cv, bounds, config.epsilon)
    lim = alpha < 1.0
    if CT.shape[1] > 3 and config.linear_full_check:
        # superlinear terms survive only if the full expansion respects the bounds too
        full = np.einsum("kn,kin->ki", CT, tv)
        lim |= np.any((full > bounds.cmax) | (full < bounds.cmin), axis=1)
    out[lim, 1:3] *= alpha[lim, None]
    out[lim, 3:] = 0.0
    return (out, alpha) if return_alpha else out


def _level_scale(mesh, A) -> np.ndarray:
    """Per-element factors (dx^a1 dy^a2) of the multi-indices in ``A``: (K, m)."""
    a = np.asarray(A, dtype=float)
    return np.prod(mesh.bbox_half[:, None, :] ** a[None], axis=2)


def _level_free(config: LimiterConfig, q: int):
    return config.bdr_mask if q > 1 and config.bdr_mask is not None else None


def _level_indices(q: int):
    """Indices (0-based) of a, a+e1, a+e2 for all |a| = q - 1."""
    A = [(q - 1 - a2, a2) for a2 in range(q)]
    ia = np.array([linear_index(a) - 1 for a in A])
    ix = np.array([linear_index((a[0] + 1, a[1])) - 1 for a in A])
    iy = np.array([linear_index((a[0], a[1] + 1)) - 1 for a in A])
    return A, ia, ix, iy


def limit_taylor_hierarchical(mesh, CT, tv, config: LimiterConfig, return_alpha: bool = False):
    CT = _check_taylor(CT, tv)
    K, N = CT.shape
    p = _degree(N)
    alpha = np.ones((K, p + 1))
    for q in range(p, 0, -1):
        A, ia, ix, iy = _level_indices(q)
        cc = CT[:, ia]  # (K, m)
        cv = cc[:, None, :] + CT[:, None, ix] * tv[:, :, 1, None] + CT[:, None, iy] * tv[:, :, 2, None]
        if q > 1:
            sc = _level_scale(mesh, A)
            cc, cv = cc / sc, cv / sc[:, None, :]
        bounds = compute_patch_bounds(mesh, cc, config.bdr_mask, config.bdr_values, include_boundary=q == 1)
        alpha[:, q] = vertex_based_alpha(cc, cv, bounds, config.epsilon, _level_free(config, q)).min(axis=1)
    # lower orders are never limited harder than higher ones
    alpha[:, 1:] = np.maximum.accumulate(alpha[:, :0:-1], axis=1)[:, ::-1]
    out = CT * alpha[:, degrees(p)]
    return (out, alpha[:, 1:]) if return_alpha else out


def _strict_terms(p: int, q: int):
    """For every |a| = q - 1 the pairs (I(a+b), I(b)) with |b| <= p - q + 1."""
    A, ia, _, _ = _level_indices(q)
    B = multi_index_table(p - q + 1)
    coeff = np.array([[linear_index((a[0] + b[0], a[1] + b[1])) - 1 for b in B] for a in A])
    basis = np.array([linear_index(b) - 1 for b in B])
    return A, ia, coeff, basis


def limit_taylor_strict(mesh, CT, tv, config: LimiterConfig, return_alpha: bool = False):
    CT = _check_taylor(CT, tv)
    K, N = CT.shape
    p = _degree(N)
    deg = degrees(p)
    out = CT.copy()
    alpha = np.ones((K, p + 1))
    for q in range(p, 0, -1):
        A, ia, coeff, basis = _strict_terms(p, q)
        cc = out[:, ia]
        # (K, m, B) coefficients against (K, 3, B) basis values
        cv = np.einsum("kmb,kib->kim", out[:, coeff], tv[:, :, basis])
        if q > 1:
            sc = _level_scale(mesh, A)
            cc, cv = cc / sc, cv / sc[:, None, :]
        bounds = compute_patch_bounds(mesh, cc, config.bdr_mask, config.bdr_values, include_boundary=q == 1)
        alpha[:, q] = vertex_based_alpha(cc, cv, bounds, config.epsilon, _level_free(config, q)).min(axis=1)
        out[:, deg >= q] *= alpha[:, q, None]
    return (out, alpha[:, 1:]) if return_alpha else out


_TAYLOR_LIMITERS = {
    "linear": limit_taylor_linear,
    "hierarchical": limit_taylor_hierarchical,
    "strict": limit_taylor_strict,
}


def apply_limiter_taylor(mesh, CT, tv, config: LimiterConfig):
    if config.variant == "none":
        return np.array(CT, dtype=float, copy=True)
    return _TAYLOR_LIMITERS[config.variant](mesh, CT, tv, config)


def limit_disc(mesh, C, MDGT, tv, config: LimiterConfig):
    """Limit modal coefficients: transform to Taylor, limit, transform back.

    ``MDGT`` holds the (K, N, N) blocks of the modal-to-Taylor transform.
    """
    if config.variant == "none":
        return np.array(C, dtype=float, copy=True)
    CT = dg_to_taylor(C, mesh.area, MDGT)
    return taylor_to_dg(apply_limiter_taylor(mesh, CT, tv, config), mesh.area, MDGT)
