"""Triangular meshes with the edge and vertex topology the DG operators and
the vertex-based limiters need.

Local numbering: vertices 0, 1, 2 counter-clockwise; local edge n is the
edge opposite local vertex n, so local edges run (v1, v2), (v2, v0),
(v0, v1). This matches the reference edge parametrisations in
:mod:`dgadvect.quadrature`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

# vertex pairs of the local edges, edge n opposite vertex n
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


class InvalidMeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (V, 2)
    triangles: np.ndarray  # (K, 3), counter-clockwise
    edges: np.ndarray  # (E, 2)
    edge_is_boundary: np.ndarray  # (E,)
    E0T: np.ndarray  # (K, 3) global edge of local edge n
    neighbor: np.ndarray  # (K, 3) adjacent element or -1
    neighbor_edge: np.ndarray  # (K, 3) local edge index in the neighbour or -1
    area: np.ndarray  # (K,)
    B: np.ndarray  # (K, 2, 2) columns x1 - x0, x2 - x0
    normals: np.ndarray  # (K, 3, 2) outward unit normals
    edge_len: np.ndarray  # (K, 3)
    centroids: np.ndarray  # (K, 2)
    bbox_half: np.ndarray  # (K, 2)
    patch_ptr: np.ndarray  # (V+1,) CSR offsets into patch_elems
    patch_elems: np.ndarray  # elements containing each vertex, grouped by vertex
    _adjacency: dict = field(default_factory=dict, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_elements(self) -> int:
        return len(self.triangles)

    K = num_elements

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def origin(self) -> np.ndarray:
        return self.vertices[self.triangles[:, 0]]

    @property
    def h(self) -> float:
        """Characteristic size: the longest edge."""
        return float(self.edge_len.max())

    @property
    def h_min(self) -> float:
        return float(self.edge_len.min())

    @property
    def is_boundary_slot(self) -> np.ndarray:
        return self.neighbor < 0

    def vertex_patch(self, v: int) -> np.ndarray:
        return self.patch_elems[self.patch_ptr[v] : self.patch_ptr[v + 1]]

    def adjacency(self, n_minus: int, n_plus: int) -> sp.csr_matrix:
        """0/1 matrix marking pairs (k-, k+) sharing edge (k-, n-) = (k+, n+).

        Local edge indices are 0-based here.
        """
        key = (n_minus, n_plus)
        if key not in self._adjacency:
            K = self.num_elements
            km = np.flatnonzero(self.neighbor_edge[:, n_minus] == n_plus)
            kp = self.neighbor[km, n_minus]
            A = sp.csr_matrix((np.ones(len(km)), (km, kp)), shape=(K, K))
            self._adjacency[key] = A
        return self._adjacency[key]

    def map_to_physical(self, xhat) -> np.ndarray:
        """Apply every element map to reference points: (R, 2) -> (K, R, 2)."""
        xhat = np.asarray(xhat, dtype=float)
        return np.einsum("kij,rj->kri", self.B, xhat) + self.origin[:, None, :]

    def boundary_vertices(self) -> np.ndarray:
        """Boolean mask over vertices lying on the domain boundary."""
        mask = np.zeros(self.num_vertices, dtype=bool)
        mask[self.edges[self.edge_is_boundary].ravel()] = True
        return mask


def build_topology(vertices, triangles) -> Mesh:
    """Build a :class:`Mesh` from raw coordinates and connectivity.

    Triangles may come in either orientation; clockwise ones are flipped.
    """
    V = np.array(vertices, dtype=float)
    T = np.array(triangles, dtype=np.int64)
    if V.ndim != 2 or V.shape[1] != 2:
        raise InvalidMeshError("vertices must have shape (V, 2)")
    if T.ndim != 2 or T.shape[1] != 3 or len(T) == 0:
        raise InvalidMeshError("triangles must have shape (K, 3) with K >= 1")
    if T.min() < 0 or T.max() >= len(V):
        raise InvalidMeshError("triangle references a vertex that does not exist")

    x0, x1, x2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    det = (x1[:, 0] - x0[:, 0]) * (x2[:, 1] - x0[:, 1]) - (x1[:, 1] - x0[:, 1]) * (x2[:, 0] - x0[:, 0])
    scale = np.maximum(np.abs(x1 - x0).max(axis=1), np.abs(x2 - x0).max(axis=1)) ** 2
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise InvalidMeshError(f"degenerate triangle(s): {np.flatnonzero(np.abs(det) <= 1e-14 * scale)[:5]}")
    flip = det < 0
    T[flip] = T[flip][:, [0, 2, 1]]
    if len(np.unique(np.sort(T, axis=1), axis=0)) != len(T):
        raise InvalidMeshError("duplicate triangles")

    K = len(T)
    local = np.sort(T[:, LOCAL_EDGES], axis=2)  # (K, 3, 2)
    edges, inverse, counts = np.unique(local.reshape(-1, 2), axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(K, 3)
    if np.any(counts > 2):
        raise InvalidMeshError("non-manifold edge shared by more than two triangles")
    edge_is_boundary = counts == 1

    # pair up the two (element, local edge) slots of each interior edge
    slots = np.argsort(inverse.ravel(), kind="stable")
    sorted_edges = inverse.ravel()[slots]
    first = np.r_[0, np.cumsum(counts)[:-1]]
    neighbor = -np.ones((K, 3), dtype=np.int64)
    neighbor_edge = -np.ones((K, 3), dtype=np.int64)
    interior = np.flatnonzero(counts == 2)
    a = slots[first[interior]]
    b = slots[first[interior] + 1]
    assert np.all(sorted_edges[first[interior]] == interior)
    ka, na = np.divmod(a, 3)
    kb, nb = np.divmod(b, 3)
    neighbor[ka, na], neighbor_edge[ka, na] = kb, nb
    neighbor[kb, nb], neighbor_edge[kb, nb] = ka, na

    P = V[T]  # (K, 3, 2)
    B = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)
    area = 0.5 * (B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0])
    tang = P[:, LOCAL_EDGES[:, 1]] - P[:, LOCAL_EDGES[:, 0]]  # (K, 3, 2), counter-clockwise
    edge_len = np.hypot(tang[..., 0], tang[..., 1])
    normals = np.stack([tang[..., 1], -tang[..., 0]], axis=-1) / edge_len[..., None]
    # make both sides of a shared edge bitwise opposite
    kk, nn = np.nonzero(neighbor >= 0)
    owner = kk < neighbor[kk, nn]
    kk, nn = kk[~owner], nn[~owner]
    normals[kk, nn] = -normals[neighbor[kk, nn], neighbor_edge[kk, nn]]
    edge_len[kk, nn] = edge_len[neighbor[kk, nn], neighbor_edge[kk, nn]]

    centroids = P.mean(axis=1)
    bbox_half = 0.5 * (P.max(axis=1) - P.min(axis=1))

    order = np.argsort(T.ravel(), kind="stable")
    patch_elems = order // 3
    patch_ptr = np.r_[0, np.cumsum(np.bincount(T.ravel(), minlength=len(V)))]

    arrays = (V, T, edges, edge_is_boundary, inverse, neighbor, neighbor_edge, area, B,
              normals, edge_len, centroids, bbox_half, patch_ptr, patch_elems)
    for arr in arrays:
        arr.setflags(write=False)
    return Mesh(*arrays)


def generate_criss_cross(nx: int, ny: int, domain=((0.0, 1.0), (0.0, 1.0))) -> Mesh:
    """Rectangle split into nx*ny squares, each cut into four triangles
    through its centre."""
    if nx < 1 or ny < 1:
        raise ValueError(f"nx and ny must be positive, got {nx}, {ny}")
    (x0, x1), (y0, y1) = domain
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"empty domain {domain}")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    corners = np.column_stack([X.ravel(), Y.ravel()])
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    centres = np.column_stack([CX.ravel(), CY.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i, j = i.ravel(), j.ravel()
    bl = i * (ny + 1) + j
    br = (i + 1) * (ny + 1) + j
    tr = br + 1
    tl = bl + 1
    c = len(corners) + i * ny + j
    tri = np.stack(
        [np.column_stack(t) for t in ((bl, br, c), (br, tr, c), (tr, tl, c), (tl, bl, c))], axis=1
    ).reshape(-1, 3)
    return build_topology(np.vstack([corners, centres]), tri)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into four congruent children at edge midpoints."""
    V = mesh.vertices
    mid = 0.5 * (V[mesh.edges[:, 0]] + V[mesh.edges[:, 1]])
    m = mesh.E0T + len(V)  # m[:, n] is the midpoint opposite vertex n
    v = mesh.triangles
    children = np.stack(
        [
            np.column_stack([v[:, 0], m[:, 2], m[:, 1]]),
            np.column_stack([m[:, 2], v[:, 1], m[:, 0]]),
            np.column_stack([m[:, 1], m[:, 0], v[:, 2]]),
            np.column_stack([m[:, 0], m[:, 1], m[:, 2]]),
        ],
        axis=1,
    ).reshape(-1, 3)
    return build_topology(np.vstack([V, mid]), children)


def read_mesh(path) -> Mesh:
    """Read the ASCII format: ``V K`` header, V lines ``x y``, K lines of
    1-based vertex indices."""
    tokens = Path(path).read_text().split()
    try:
        nv, nk = int(tokens[0]), int(tokens[1])
        body = tokens[2:]
        coords = np.array([float(t) for t in body[: 2 * nv]]).reshape(nv, 2)
        tri = np.array([int(t) for t in body[2 * nv : 2 * nv + 3 * nk]]).reshape(nk, 3) - 1
    except (IndexError, ValueError) as exc:
        raise InvalidMeshError(f"{path}: malformed mesh file ({exc})") from exc
    if len(body) != 2 * nv + 3 * nk:
        raise InvalidMeshError(f"{path}: expected {nv} vertices and {nk} triangles")
    return build_topology(coords, tri)


def write_mesh(mesh: Mesh, path) -> None:
    lines = [f"{mesh.num_vertices} {mesh.num_elements}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"{a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")
