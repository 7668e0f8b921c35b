"""Reference-element tensors and global sparse operators of the upwind DG
discretisation.

Global vectors are ordered element by element: entry ``k*N + i`` belongs to
basis function i of element k. Block matrices are returned as CSR.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import TaylorContext, modal_gradients, modal_values, num_local_dofs
from .quadrature import gamma_map, quad_rule_1d, quad_rule_2d, theta_map


@dataclass(frozen=True)
class RefBlocks:
    p: int
    elem_order: int
    edge_order: int
    Mhat: np.ndarray  # (N, N)
    Ghat: np.ndarray  # (N, N, N, 2): d_m phi_i * phi_j * phi_l
    RhatDiag: np.ndarray  # (N, N, 3, R)
    RhatOffdiag: np.ndarray  # (N, N, 3, 3, R)
    edge_values: np.ndarray  # (N, 3, R): phi_i(gamma_n(q_r))

    @property
    def N(self) -> int:
        return num_local_dofs(self.p)

    @property
    def elem_rule(self):
        return quad_rule_2d(self.elem_order)

    @property
    def edge_rule(self):
        return quad_rule_1d(self.edge_order)


def compute_reference_blocks(p: int, elem_order: int | None = None, edge_order: int | None = None) -> RefBlocks:
    elem_order = 2 * p if elem_order is None else elem_order
    edge_order = 2 * p + 1 if edge_order is None else edge_order
    q2 = quad_rule_2d(elem_order)
    q1 = quad_rule_1d(edge_order)

    phi = modal_values(p, q2.points)  # (R2, N)
    dphi = modal_gradients(p, q2.points)  # (R2, N, 2)
    Mhat = np.einsum("r,ri,rj->ij", q2.weights, phi, phi)
    Mhat = 0.5 * (Mhat + Mhat.T)  # exactly symmetric
    Ghat = np.einsum("r,rim,rj,rl->ijlm", q2.weights, dphi, phi, phi)

    edge_values = np.stack([modal_values(p, gamma_map(n, q1.points)).T for n in (1, 2, 3)], axis=1)
    RhatDiag = np.einsum("inr,jnr->ijnr", edge_values, edge_values)
    RhatOffdiag = np.empty(Mhat.shape + (3, 3, q1.num_points))
    for nm in range(3):
        xm = gamma_map(nm + 1, q1.points)
        for npl in range(3):
            nb = modal_values(p, theta_map(nm + 1, npl + 1, xm))  # (R, N)
            RhatOffdiag[:, :, nm, npl, :] = np.einsum("ir,rj->ijr", edge_values[:, nm, :], nb)
    arrays = (Mhat, Ghat, RhatDiag, RhatOffdiag, edge_values)
    for arr in arrays:
        arr.setflags(write=False)
    return RefBlocks(p, elem_order, edge_order, *arrays)


def block_diagonal(blocks: np.ndarray) -> sp.csr_matrix:
    """Sparse block-diagonal matrix from a (K, N, N) stack."""
    K, N, _ = blocks.shape
    base = (np.arange(K) * N)[:, None, None]
    rows = np.broadcast_to(base + np.arange(N)[None, :, None], blocks.shape)
    cols = np.broadcast_to(base + np.arange(N)[None, None, :], blocks.shape)
    return sp.csr_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())), shape=(K * N, K * N))


def diagonal_blocks(A, N: int) -> np.ndarray:
    """Extract the (K, N, N) diagonal blocks of a block matrix."""
    A = sp.csr_matrix(A)
    K = A.shape[0] // N
    base = (np.arange(K) * N)[:, None, None]
    rows = np.broadcast_to(base + np.arange(N)[None, :, None], (K, N, N))
    cols = np.broadcast_to(base + np.arange(N)[None, None, :], (K, N, N))
    return np.asarray(A[rows.ravel(), cols.ravel()]).reshape(K, N, N)


def kron(A, B):
    """Kronecker product [a_ij B]; sparse if either factor is sparse."""
    if sp.issparse(A) or sp.issparse(B):
        return sp.kron(A, B, format="csr")
    return np.kron(np.asarray(A), np.asarray(B))


def kron_vec(A, B):
    """Row-wise Kronecker product: block (i, j) of the result is
    ``A[i, j] * B[i*r:(i+1)*r, :]`` with r = rows(B) / rows(A).

    Sparse ``A`` yields a sparse CSR result holding only the blocks of the
    nonzeros of ``A``.
    """
    ma, na = A.shape
    mb, nb = B.shape
    if ma == 0 or mb % ma:
        raise ValueError(f"rows of B ({mb}) must be a multiple of rows of A ({ma})")
    r = mb // ma
    if sp.issparse(A):
        A = A.tocoo()
        B = np.asarray(B.toarray() if sp.issparse(B) else B)
        Bb = B.reshape(ma, r, nb)[A.row] * A.data[:, None, None]  # (nnz, r, nb)
        rows = (A.row[:, None, None] * r + np.arange(r)[None, :, None]) + np.zeros((1, 1, nb), dtype=np.int64)
        cols = (A.col[:, None, None] * nb + np.arange(nb)[None, None, :]) + np.zeros((1, r, 1), dtype=np.int64)
        return sp.csr_matrix((Bb.ravel(), (rows.ravel(), cols.ravel())), shape=(mb, na * nb))
    A = np.asarray(A)
    B = np.asarray(B)
    Bb = B.reshape(ma, r, nb)
    return np.einsum("ij,iab->iajb", A, Bb).reshape(mb, na * nb)


def assemble_mass(mesh, ref: RefBlocks) -> sp.csr_matrix:
    return block_diagonal(2.0 * mesh.area[:, None, None] * ref.Mhat[None])


def assemble_advection_elem(mesh, ref: RefBlocks, U1, U2):
    """Block-diagonal G^1, G^2 for a velocity given by its modal coefficients
    ``U1``, ``U2`` of shape (K, N)."""
    N = ref.N
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if U1.shape != (mesh.num_elements, N) or U2.shape != U1.shape:
        raise ValueError(f"velocity coefficients must have shape {(mesh.num_elements, N)}")
    B = mesh.B
    # integrals of d_m phi_i phi_l phi_j per element, reference derivative m
    H1 = np.einsum("kl,ijlm->kijm", U1, ref.Ghat)
    H2 = np.einsum("kl,ijlm->kijm", U2, ref.Ghat)
    G1 = B[:, 1, 1, None, None] * H1[..., 0] - B[:, 1, 0, None, None] * H1[..., 1]
    G2 = -B[:, 0, 1, None, None] * H2[..., 0] + B[:, 0, 0, None, None] * H2[..., 1]
    return block_diagonal(G1), block_diagonal(G2)


def edge_quadrature_points(mesh, edge_rule) -> np.ndarray:
    """Physical edge quadrature points, shape (K, 3, R, 2)."""
    return np.stack(
        [mesh.map_to_physical(gamma_map(n, edge_rule.points)) for n in (1, 2, 3)], axis=1
    )


def eval_normal_velocity(mesh, u, t: float, edge_rule) -> np.ndarray:
    """u(t, x) . nu_kn at every edge quadrature point, shape (K, 3, R).

    Interior edges are evaluated once, from the lower-numbered element, and
    mirrored with opposite sign to the neighbour so both sides agree on the
    upwind direction.
    """
    x = edge_quadrature_points(mesh, edge_rule)
    vel = np.broadcast_to(np.asarray(u(t, x), dtype=float), x.shape)
    vn = np.einsum("knrd,knd->knr", vel, mesh.normals)
    kk, nn = np.nonzero(mesh.neighbor >= 0)
    mirror = kk > mesh.neighbor[kk, nn]
    kk, nn = kk[mirror], nn[mirror]
    vn[kk, nn, :] = -vn[mesh.neighbor[kk, nn], mesh.neighbor_edge[kk, nn], ::-1]
    return vn


def assemble_upwind_edge(mesh, ref: RefBlocks, vn, fold_weights: bool = False) -> sp.csr_matrix:
    """Upwind edge operator R = R_diag + R_offdiag.

    Diagonal blocks collect the outflow part of every edge of an element,
    interior or boundary. Off-diagonal blocks carry the inflow from the
    neighbour through each interior edge and are built with :func:`kron_vec`
    over the nine (n-, n+) adjacency patterns.
    """
    K, N = mesh.num_elements, ref.N
    w = ref.edge_rule.weights
    out = np.where(vn >= 0, vn, 0.0)
    inflow = vn - out
    Rd, Ro = ref.RhatDiag, ref.RhatOffdiag
    if fold_weights:
        Rd = Rd * w
        Ro = Ro * w
        wl = mesh.edge_len[:, :, None]
    else:
        wl = mesh.edge_len[:, :, None] * w[None, None, :]

    R = block_diagonal(np.einsum("knr,ijnr->kij", wl * out, Rd))
    coef = wl * inflow  # (K, 3, R)
    for nm in range(3):
        for npl in range(3):
            A = mesh.adjacency(nm, npl)
            if A.nnz == 0:
                continue
            Rtilde = np.einsum("kr,ijr->kij", coef[:, nm, :], Ro[:, :, nm, npl, :]).reshape(K * N, N)
            R = R + kron_vec(A, Rtilde)
    return R.tocsr()


def assemble_dirichlet_vector(mesh, ref: RefBlocks, c_D, vn, t: float) -> np.ndarray:
    """Inflow boundary vector K_D (enters the right-hand side with a minus)."""
    rule = ref.edge_rule
    bk, bn = np.nonzero(mesh.neighbor < 0)
    KD = np.zeros((mesh.num_elements, ref.N))
    if len(bk) == 0:
        return KD.ravel()
    x = edge_quadrature_points(mesh, rule)[bk, bn]  # (nb, R, 2)
    cd = np.broadcast_to(np.asarray(c_D(t, x), dtype=float), x.shape[:-1])
    v = vn[bk, bn]
    flux = np.where(v < 0, v, 0.0) * cd * rule.weights * mesh.edge_len[bk, bn, None]  # (nb, R)
    contrib = np.einsum("br,ibr->bi", flux, ref.edge_values[:, bn, :])
    np.add.at(KD, bk, contrib)
    return KD.ravel()


def basis_transform_blocks(mesh, p: int, ctx: TaylorContext, elem_order: int | None = None) -> np.ndarray:
    """Blocks (K, N, N) of M^{DG,Taylor}: entries int phi_ki * taylor_kj."""
    rule = quad_rule_2d(2 * p if elem_order is None else elem_order)
    phi = modal_values(p, rule.points)  # (R, N)
    tay = ctx.values(mesh.map_to_physical(rule.points))  # (K, R, N)
    return 2.0 * mesh.area[:, None, None] * np.einsum("r,ri,krj->kij", rule.weights, phi, tay)


def taylor_mass_blocks(mesh, p: int, ctx: TaylorContext, elem_order: int | None = None) -> np.ndarray:
    rule = quad_rule_2d(2 * p if elem_order is None else elem_order)
    tay = ctx.values(mesh.map_to_physical(rule.points))
    return 2.0 * mesh.area[:, None, None] * np.einsum("r,kri,krj->kij", rule.weights, tay, tay)


def assemble_basis_transform(mesh, p: int, ctx: TaylorContext, elem_order: int | None = None) -> sp.csr_matrix:
    return block_diagonal(basis_transform_blocks(mesh, p, ctx, elem_order))


def assemble_taylor_mass(mesh, p: int, ctx: TaylorContext, elem_order: int | None = None):
    """Consistent and lumped mass matrices (M_C, M_L) in the Taylor basis."""
    MC = block_diagonal(taylor_mass_blocks(mesh, p, ctx, elem_order))
    ML = sp.diags(MC.diagonal(), format="csr")
    return MC, ML
