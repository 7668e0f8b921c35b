"""L2 projection into the broken polynomial space and changes of basis
between the modal and the Taylor representation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import modal_values, num_local_dofs
from .quadrature import quad_rule_2d


@dataclass(frozen=True)
class Representation:
    """Coefficient table (K, N) tagged with its basis ("modal" or "taylor")."""

    coeffs: np.ndarray
    basis: str
    p: int

    def __post_init__(self):
        if self.basis not in ("modal", "taylor"):
            raise ValueError(f"unknown basis tag {self.basis!r}")
        if self.coeffs.shape[1] != num_local_dofs(self.p):
            raise ValueError("coefficient table width does not match the degree")


def project_l2(mesh, f, p: int, elem_order: int | None = None, t: float = 0.0) -> np.ndarray:
    """Modal coefficients (K, N) of the L2 projection of ``f(t, x)``.

    The modal basis is orthonormal on the reference triangle, so every
    local mass matrix is 2|T_k| times the identity and the projection reduces
    to the reference-weighted moments.
    """
    rule = quad_rule_2d(2 * p if elem_order is None else elem_order)
    x = mesh.map_to_physical(rule.points)  # (K, R, 2)
    fx = np.broadcast_to(np.asarray(f(t, x), dtype=float), x.shape[:-1])
    phi = modal_values(p, rule.points)
    return np.einsum("r,kr,ri->ki", rule.weights, fx, phi)


def _blockwise_solve(blocks: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(blocks, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError(f"singular basis-transform block: {exc}") from exc


def dg_to_taylor(C: np.ndarray, area: np.ndarray, MDGT: np.ndarray) -> np.ndarray:
    """Taylor coefficients from modal ones by solving M C = M^{DG,Taylor} C^T
    block by block. ``MDGT`` holds the (K, N, N) transform blocks."""
    return _blockwise_solve(MDGT, 2.0 * area[:, None] * C)


def taylor_to_dg(CT: np.ndarray, area: np.ndarray, MDGT: np.ndarray) -> np.ndarray:
    return np.einsum("kij,kj->ki", MDGT, CT) / (2.0 * area[:, None])


def eval_disc_at_points(C: np.ndarray, basis_values: np.ndarray) -> np.ndarray:
    """Evaluate per-element expansions.

    ``basis_values`` is either (R, N), shared by all elements (modal basis at
    reference points), or (K, R, N) per element (e.g. Taylor basis values).
    Returns (K, R).
    """
    C = np.asarray(C)
    if basis_values.shape[-1] != C.shape[1]:
        raise ValueError(f"basis table has {basis_values.shape[-1]} functions, coefficients {C.shape[1]}")
    if basis_values.ndim == 2:
        return C @ basis_values.T
    if basis_values.shape[0] != C.shape[0]:
        raise ValueError("per-element basis table does not match the number of elements")
    return np.einsum("kn,krn->kr", C, basis_values)


def eval_func_at_vertices(mesh, f, t: float = 0.0) -> np.ndarray:
    """``f(t, x)`` at the three vertices of every element, shape (K, 3)."""
    x = mesh.vertices[mesh.triangles]
    return np.broadcast_to(np.asarray(f(t, x), dtype=float), x.shape[:-1]).copy()


def element_means(C: np.ndarray) -> np.ndarray:
    """Cell means of modal expansions: only the constant function has a
    nonzero mean, and it equals sqrt(2)."""
    return np.sqrt(2.0) * C[:, 0]
