"""Independent dense reference computations used by the tests.

Everything here works element by element in physical coordinates: basis
functions are evaluated by pulling points back through the inverse affine
map, edge points are parametrised from the physical end points, and the
upwind side is chosen per point. None of the reference-element tensors,
theta maps or Kronecker helpers of the package are used.
"""
import numpy as np

from dgadvect.basis import modal_gradients, modal_values, num_local_dofs
from dgadvect.mesh import LOCAL_EDGES
from dgadvect.quadrature import quad_rule_1d, quad_rule_2d


def pull_back(mesh, k, x):
    x0 = mesh.vertices[mesh.triangles[k, 0]]
    return np.linalg.solve(mesh.B[k], (np.asarray(x) - x0).T).T


def phys_values(mesh, p, k, x):
    return modal_values(p, pull_back(mesh, k, x))


def phys_gradients(mesh, p, k, x):
    g = modal_gradients(p, pull_back(mesh, k, x))  # (R, N, 2) reference gradients
    return g @ np.linalg.inv(mesh.B[k])  # chain rule


def element_points(mesh, k, order):
    rule = quad_rule_2d(order)
    x0 = mesh.vertices[mesh.triangles[k, 0]]
    return rule.points @ mesh.B[k].T + x0, 2 * mesh.area[k] * rule.weights


def edge_points(mesh, k, n, order):
    rule = quad_rule_1d(order)
    a, b = mesh.vertices[mesh.triangles[k, LOCAL_EDGES[n]]]
    x = a + rule.points[:, None] * (b - a)
    return x, np.linalg.norm(b - a) * rule.weights


def outward_normal(mesh, k, n):
    a, b = mesh.vertices[mesh.triangles[k, LOCAL_EDGES[n]]]
    t = b - a
    return np.array([t[1], -t[0]]) / np.linalg.norm(t)


def dense_mass(mesh, p, order=None):
    N = num_local_dofs(p)
    order = 2 * p if order is None else order
    M = np.zeros((mesh.num_elements * N,) * 2)
    for k in range(mesh.num_elements):
        x, w = element_points(mesh, k, order)
        phi = phys_values(mesh, p, k, x)
        M[k * N:(k + 1) * N, k * N:(k + 1) * N] = np.einsum("r,ri,rj->ij", w, phi, phi)
    return M


def dense_advection(mesh, p, u, order=None):
    """G^m_{ij} = int d_m phi_i u_h^m phi_j with u_h the L2 projection of u."""
    N = num_local_dofs(p)
    order = 2 * p if order is None else order
    K = mesh.num_elements
    G = [np.zeros((K * N, K * N)) for _ in range(2)]
    for k in range(K):
        x, w = element_points(mesh, k, order)
        phi = phys_values(mesh, p, k, x)
        dphi = phys_gradients(mesh, p, k, x)
        uu = np.broadcast_to(u(0.0, x), x.shape)
        for m in range(2):
            U = np.einsum("r,r,ri->i", w, uu[:, m], phi) / (2 * mesh.area[k])
            uh = phi @ U
            G[m][k * N:(k + 1) * N, k * N:(k + 1) * N] = np.einsum("r,ri,r,rj->ij", w, dphi[:, :, m], uh, phi)
    return G


def dense_upwind(mesh, p, u, order=None):
    N = num_local_dofs(p)
    order = 2 * p + 1 if order is None else order
    K = mesh.num_elements
    R = np.zeros((K * N, K * N))
    for k in range(K):
        for n in range(3):
            x, w = edge_points(mesh, k, n, order)
            vn = np.broadcast_to(u(0.0, x), x.shape) @ outward_normal(mesh, k, n)
            phi = phys_values(mesh, p, k, x)
            out = vn >= 0
            R[k * N:(k + 1) * N, k * N:(k + 1) * N] += np.einsum("r,ri,rj->ij", w * vn * out, phi, phi)
            nb = mesh.neighbor[k, n]
            if nb >= 0:
                phin = phys_values(mesh, p, nb, x)
                R[k * N:(k + 1) * N, nb * N:(nb + 1) * N] += np.einsum("r,ri,rj->ij", w * vn * ~out, phi, phin)
    return R


def dense_dirichlet(mesh, p, u, cD, order=None):
    N = num_local_dofs(p)
    order = 2 * p + 1 if order is None else order
    KD = np.zeros(mesh.num_elements * N)
    for k in range(mesh.num_elements):
        for n in range(3):
            if mesh.neighbor[k, n] >= 0:
                continue
            x, w = edge_points(mesh, k, n, order)
            vn = np.broadcast_to(u(0.0, x), x.shape) @ outward_normal(mesh, k, n)
            phi = phys_values(mesh, p, k, x)
            KD[k * N:(k + 1) * N] += np.einsum("r,ri->i", w * np.minimum(vn, 0.0) * cD(0.0, x), phi)
    return KD


def kron_bruteforce(A, B):
    A, B = np.asarray(A), np.asarray(B)
    ma, na = A.shape
    mb, nb = B.shape
    out = np.zeros((ma * mb, na * nb))
    for i in range(ma):
        for j in range(na):
            for r in range(mb):
                for s in range(nb):
                    out[i * mb + r, j * nb + s] = A[i, j] * B[r, s]
    return out


def kron_vec_bruteforce(A, B):
    A, B = np.asarray(A), np.asarray(B)
    ma, na = A.shape
    mb, nb = B.shape
    r = mb // ma
    out = np.zeros((mb, na * nb))
    for i in range(ma):
        for j in range(na):
            for a in range(r):
                for s in range(nb):
                    out[i * r + a, j * nb + s] = A[i, j] * B[i * r + a, s]
    return out


def small_meshes():
    """A few meshes with K <= 8, both structured and irregular."""
    from dgadvect.mesh import build_topology, generate_criss_cross

    yield "criss-cross 1x2", generate_criss_cross(1, 2)
    yield "irregular", build_topology(
        [[0, 0], [1, 0], [2, 0.1], [0.1, 1], [1.2, 0.9], [2, 1.1], [0.9, 1.8]],
        [[0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4], [3, 4, 6], [4, 5, 6]],
    )
    yield "two triangles", build_topology([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 1, 2], [1, 3, 2]])


# --- limiters -----------------------------------------------------------------

def _multi_indices(p):
    return [(d - a2, a2) for d in range(p + 1) for a2 in range(d + 1)]


def _fact(a):
    from math import factorial

    return factorial(a[0]) * factorial(a[1])


def naive_patch_bounds(mesh, values):
    """values (K, m) at centroids -> bounds (K, 3, m) by scanning all triangles."""
    K = mesh.num_elements
    values = np.asarray(values, dtype=float).reshape(K, -1)
    lo = np.empty((K, 3, values.shape[1]))
    hi = np.empty_like(lo)
    for k in range(K):
        for i in range(3):
            v = mesh.triangles[k, i]
            patch = [j for j in range(K) if v in mesh.triangles[j]]
            lo[k, i] = values[patch].min(axis=0)
            hi[k, i] = values[patch].max(axis=0)
    return lo, hi


def naive_alpha(cc, cv, lo, hi, eps, free=None):
    """Scalar loop version of the regularised vertex-based correction factor."""
    alpha = 1.0
    for i in range(3):
        if free is not None and free[i]:
            continue
        d = cv[i] - cc
        dmax = max(abs(v - cc) for v in cv)
        if abs(d) <= 8 * np.finfo(float).eps * (abs(cc) + dmax + abs(hi[i]) + abs(lo[i])):
            continue  # rounding-level deviation
        if cv[i] > hi[i] - eps:
            num, den = hi[i] - cc, d + eps
        elif cv[i] < lo[i] + eps:
            num, den = lo[i] - cc, d - eps
        else:
            num, den = 1.0, 1.0
        if den == 0.0:
            # vanishing denominator: no admissible slope unless the numerator pushes to +inf
            r = 1.0 if num > 0 else 0.0
        else:
            r = num / den
        alpha = min(alpha, r)
    return min(max(alpha, 0.0), 1.0)


def _monomial_mean(mesh, k, b, order=8):
    x, w = element_points(mesh, k, order)
    d = x - mesh.centroids[k]
    return (w @ (d[:, 0] ** b[0] * d[:, 1] ** b[1])) / mesh.area[k]


def _taylor_value(mesh, k, b, x):
    """Taylor basis function of multi-index b on element k at physical x."""
    dx = mesh.bbox_half[k]
    d = x - mesh.centroids[k]
    mono = d[0] ** b[0] * d[1] ** b[1]
    if sum(b) >= 2:
        mono -= _monomial_mean(mesh, k, b)
    return mono / (_fact(b) * dx[0] ** b[0] * dx[1] ** b[1])


def _derivatives(mesh, CT, p):
    """Centroid derivatives d^a c for every multi-index: dict a -> (K,)."""
    idx = _multi_indices(p)
    dx = mesh.bbox_half
    return {a: CT[:, j] / (dx[:, 0] ** a[0] * dx[:, 1] ** a[1]) for j, a in enumerate(idx)}


def naive_limit(mesh, CT, variant, eps=1e-8, bdr_mask=None, bdr_values=None, full_check=True):
    """Loop-based reference implementation of the three vertex-based limiters
    working with physical derivatives at the centroids."""
    CT = np.array(CT, dtype=float)
    K, N = CT.shape
    p = int(round((np.sqrt(8 * N + 1) - 3) / 2))
    idx = _multi_indices(p)
    pos = {a: j for j, a in enumerate(idx)}
    verts = mesh.vertices[mesh.triangles]  # (K, 3, 2)
    mask = np.zeros((K, 3), bool) if bdr_mask is None else np.asarray(bdr_mask, bool)
    bvals = np.zeros((K, 3)) if bdr_values is None else np.asarray(bdr_values, float)

    def level_bounds(values, with_bdr):
        lo, hi = naive_patch_bounds(mesh, values)
        if with_bdr:
            lo = np.where(mask[..., None], np.minimum(lo, bvals[..., None]), lo)
            hi = np.where(mask[..., None], np.maximum(hi, bvals[..., None]), hi)
        return lo, hi

    if variant == "none" or p == 0:
        return CT
    if variant == "linear":
        lo, hi = level_bounds(CT[:, 0], True)
        out = CT.copy()
        for k in range(K):
            cv = [CT[k, 0] + sum(CT[k, pos[b]] * _taylor_value(mesh, k, b, verts[k, i]) for b in idx[1:3])
                  for i in range(3)]
            a = naive_alpha(CT[k, 0], cv, lo[k, :, 0], hi[k, :, 0], eps)
            full = [sum(CT[k, pos[b]] * _taylor_value(mesh, k, b, verts[k, i]) for b in idx) for i in range(3)]
            bad = full_check and N > 3 and any(f > hi[k, i, 0] or f < lo[k, i, 0] for i, f in enumerate(full))
            if a < 1.0 or bad:
                out[k, 1:3] *= a
                out[k, 3:] = 0.0
        return out

    cur = CT.copy()
    alpha = np.ones((K, p + 1))
    for q in range(p, 0, -1):
        level = [(q - 1 - a2, a2) for a2 in range(q)]
        der = _derivatives(mesh, cur, p)
        cc = np.stack([der[a] for a in level], axis=1)  # (K, m)
        lo, hi = level_bounds(cc, q == 1)
        free = mask if q > 1 else np.zeros_like(mask)
        for k in range(K):
            dx = mesh.bbox_half[k]
            for m, a in enumerate(level):
                cv = []
                for i in range(3):
                    d = verts[k, i] - mesh.centroids[k]
                    if variant == "hierarchical":
                        val = der[a][k] + der[(a[0] + 1, a[1])][k] * d[0] + der[(a[0], a[1] + 1)][k] * d[1]
                    else:
                        # full Taylor expansion of d^a c with the element's Taylor basis
                        val = 0.0
                        for b in _multi_indices(p - q + 1):
                            ab = (a[0] + b[0], a[1] + b[1])
                            val += der[ab][k] * dx[0] ** ab[0] * dx[1] ** ab[1] * _taylor_value(mesh, k, b, verts[k, i])
                        val /= dx[0] ** a[0] * dx[1] ** a[1]
                    cv.append(val)
                alpha[k, q] = min(alpha[k, q], naive_alpha(cc[k, m], cv, lo[k, :, m], hi[k, :, m], eps, free[k]))
        if variant == "strict":
            for j, a in enumerate(idx):
                if sum(a) >= q:
                    cur[:, j] *= alpha[:, q]
    if variant == "hierarchical":
        for q in range(p - 1, 0, -1):
            alpha[:, q] = np.maximum(alpha[:, q], alpha[:, q + 1])
        for j, a in enumerate(idx):
            cur[:, j] = CT[:, j] * alpha[:, sum(a)]
    return cur


def pull_back_all(mesh, x):
    """x (K, R, 2) physical points per element -> reference coordinates."""
    return np.stack([pull_back(mesh, k, x[k]) for k in range(mesh.num_elements)])
