"""Semi-discrete advection operator M dC/dt = V(t) - A(t) C on a fixed mesh
and polynomial degree, with the cached pieces the time integrators and
limiters share."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import assembly
from .basis import TaylorContext, modal_values, num_local_dofs, taylor_bases_at_vertices
from .limiter import LimiterConfig, apply_limiter_taylor
from .mesh import LOCAL_EDGES
from .projection import dg_to_taylor, project_l2, taylor_to_dg

Field = Callable[[float, np.ndarray], np.ndarray]


def _zero(t, x):
    return np.zeros(np.shape(x)[:-1])


@dataclass(frozen=True)
class Problem:
    """Advection problem dc/dt + div(u c) = f with inflow Dirichlet data.

    All callables take ``(t, x)`` with ``x`` of shape (..., 2); ``velocity``
    returns (..., 2), the scalar fields (...,).
    """

    velocity: Field
    source: Field = _zero
    dirichlet: Field = _zero
    initial: Optional[Field] = None
    exact: Optional[Field] = None
    domain: tuple = ((0.0, 1.0), (0.0, 1.0))
    stationary: bool = True
    name: str = "problem"


class Discretization:
    """Everything that depends only on (mesh, p): reference blocks, mass
    matrix, Taylor transform, Taylor mass matrices and vertex tables."""

    def __init__(self, mesh, p: int, elem_order: int | None = None, edge_order: int | None = None):
        self.mesh = mesh
        self.p = p
        self.N = num_local_dofs(p)
        self.ref = assembly.compute_reference_blocks(p, elem_order, edge_order)
        self.elem_order = self.ref.elem_order
        self.M = assembly.assemble_mass(mesh, self.ref)
        self._Minv = np.linalg.inv(self.ref.Mhat) / (2.0 * mesh.area[:, None, None])
        self._taylor = None

    # --- Taylor-basis pieces, built on first use -------------------------
    def _build_taylor(self):
        mesh, p = self.mesh, self.p
        ctx = TaylorContext.from_mesh(mesh, p)
        mdgt = assembly.basis_transform_blocks(mesh, p, ctx)
        mc = assembly.taylor_mass_blocks(mesh, p, ctx)
        ml = np.einsum("kii->ki", mc)
        self._taylor = dict(
            ctx=ctx,
            MDGT=mdgt,
            tv=taylor_bases_at_vertices(mesh, p, ctx),
            MC=mc,
            ML=ml,
            # M_L^{-1} M_C per block
            Mcorr=mc / ml[:, :, None],
        )

    def taylor(self, key):
        if self._taylor is None:
            self._build_taylor()
        return self._taylor[key]

    @property
    def MDGT(self) -> np.ndarray:
        return self.taylor("MDGT")

    @property
    def taylor_vertex_table(self) -> np.ndarray:
        return self.taylor("tv")

    def to_taylor(self, C):
        return dg_to_taylor(C, self.mesh.area, self.MDGT)

    def to_modal(self, CT):
        return taylor_to_dg(CT, self.mesh.area, self.MDGT)

    # --- operators -------------------------------------------------------
    def apply_Minv(self, S: np.ndarray) -> np.ndarray:
        """M^{-1} S for a vector of length KN; returns (K, N)."""
        return np.einsum("kij,kj->ki", self._Minv, S.reshape(-1, self.N))

    def project(self, f, t: float = 0.0) -> np.ndarray:
        return project_l2(self.mesh, f, self.p, self.elem_order, t)

    def operators(self, problem: Problem, t: float):
        """System matrix A(t) = -G1 - G2 + R and right-hand side V(t) = L - K_D."""
        mesh, ref = self.mesh, self.ref

        def comp(m):
            return lambda tt, x: np.broadcast_to(problem.velocity(tt, x), x.shape)[..., m]

        U1, U2 = self.project(comp(0), t), self.project(comp(1), t)
        G1, G2 = assembly.assemble_advection_elem(mesh, ref, U1, U2)
        vn = assembly.eval_normal_velocity(mesh, problem.velocity, t, ref.edge_rule)
        R = assembly.assemble_upwind_edge(mesh, ref, vn)
        KD = assembly.assemble_dirichlet_vector(mesh, ref, problem.dirichlet, vn, t)
        L = self.M @ self.project(problem.source, t).ravel()
        A = (-G1 - G2 + R).tocsr()
        return A, L - KD

    # --- limiter support -------------------------------------------------
    def boundary_vertex_data(self, problem: Problem, t: float, which: str = "all"):
        """Mask (K, 3) of element vertices whose limiter bounds take the
        boundary datum, and the datum c_D(t, x) there.

        ``which = "all"`` marks every boundary vertex, ``"inflow"`` only the
        end points of boundary edges with u . nu < 0 at those points.
        """
        mesh = self.mesh
        if which == "all":
            vmask = mesh.boundary_vertices()
        elif which == "inflow":
            vmask = np.zeros(mesh.num_vertices, dtype=bool)
            bk, bn = np.nonzero(mesh.neighbor < 0)
            ends = mesh.triangles[bk[:, None], LOCAL_EDGES[bn]]  # (nb, 2)
            x = mesh.vertices[ends]
            vel = np.broadcast_to(np.asarray(problem.velocity(t, x), dtype=float), x.shape)
            vn = np.einsum("bed,bd->be", vel, mesh.normals[bk, bn])
            vmask[ends[vn < 0]] = True
        else:
            raise ValueError(f"unknown boundary vertex selection {which!r}")
        mask = vmask[mesh.triangles]
        xv = mesh.vertices[mesh.triangles]
        vals = np.broadcast_to(np.asarray(problem.dirichlet(t, xv), dtype=float), xv.shape[:-1])
        return mask, np.where(mask, vals, 0.0)

    def limit(self, C, config: LimiterConfig):
        """Slope limiting operator on modal coefficients."""
        if config.variant == "none":
            return np.array(C, dtype=float, copy=True)
        CT = self.to_taylor(C)
        return self.to_modal(apply_limiter_taylor(self.mesh, CT, self.taylor_vertex_table, config))

    def limit_taylor(self, CT, config: LimiterConfig):
        return apply_limiter_taylor(self.mesh, CT, self.taylor_vertex_table, config)

    # --- evaluation ------------------------------------------------------
    def values_at_reference(self, C, xhat) -> np.ndarray:
        """c_h at the images of reference points ``xhat`` (R, 2): (K, R)."""
        return np.asarray(C) @ modal_values(self.p, xhat).T

    def system_size(self) -> int:
        return self.mesh.num_elements * self.N

