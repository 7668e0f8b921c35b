"""Problem definitions and drivers for stationary and transient advection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .basis import modal_values
from .discretization import Discretization, Problem
from .limiter import LimiterConfig
from .quadrature import gamma_map, quad_rule_2d
from .timestepping import (
    NumericalFailure,
    TransientState,
    rk_step,
    rk_step_lumped,
    ssp_coefficients,
    stable_dt,
)

__all__ = [
    "Problem",
    "Monitors",
    "convergence_problem",
    "rotation_problem",
    "solve_stationary",
    "solve_transient",
    "l2_error",
    "compute_eoc",
    "record_monitors",
]


# --- problems ---------------------------------------------------------------

def convergence_problem() -> Problem:
    """Stationary problem with velocity (e^{(x+y)/2}, e^{(x-y)/2}) and exact
    solution cos(7x) cos(7y); source and inflow data follow from it."""

    def velocity(t, x):
        s, d = np.exp(0.5 * (x[..., 0] + x[..., 1])), np.exp(0.5 * (x[..., 0] - x[..., 1]))
        return np.stack([s, d], axis=-1)

    def exact(t, x):
        return np.cos(7 * x[..., 0]) * np.cos(7 * x[..., 1])

    def source(t, x):
        X, Y = x[..., 0], x[..., 1]
        s, d = np.exp(0.5 * (X + Y)), np.exp(0.5 * (X - Y))
        c = np.cos(7 * X) * np.cos(7 * Y)
        cx = -7 * np.sin(7 * X) * np.cos(7 * Y)
        cy = -7 * np.cos(7 * X) * np.sin(7 * Y)
        return c * 0.5 * (s - d) + s * cx + d * cy

    return Problem(velocity=velocity, source=source, dirichlet=exact, exact=exact,
                   initial=exact, stationary=True, name="convergence")


def _rotation_initial(t, x):
    X, Y = x[..., 0], x[..., 1]
    out = np.zeros(np.shape(X))

    def dist(x0, y0):
        return np.hypot(X - x0, Y - y0) / 0.15

    # slotted cylinder
    g = dist(0.5, 0.75)
    slot = (np.abs(X - 0.5) < 0.025) & (Y < 0.85)
    out = np.where((g <= 1.0) & ~slot, 1.0, out)
    # cone
    g = dist(0.5, 0.25)
    out = np.where(g <= 1.0, 1.0 - g, out)
    # smooth hump
    g = dist(0.25, 0.5)
    out = np.where(g <= 1.0, 0.25 * (1.0 + np.cos(np.pi * np.minimum(g, 1.0))), out)
    return out


def rotation_problem() -> Problem:
    """Solid-body rotation about (0.5, 0.5) with period 2 pi of a slotted
    cylinder, a cone and a smooth hump. The exact solution after a full
    turn is the initial datum."""

    def velocity(t, x):
        return np.stack([0.5 - x[..., 1], x[..., 0] - 0.5], axis=-1)

    def exact(t, x):
        # rotate back along the characteristics
        c, s = np.cos(t), np.sin(t)
        X, Y = x[..., 0] - 0.5, x[..., 1] - 0.5
        x0 = np.stack([c * X + s * Y + 0.5, -s * X + c * Y + 0.5], axis=-1)
        return _rotation_initial(0.0, x0)

    return Problem(velocity=velocity, initial=_rotation_initial, exact=exact,
                   stationary=True, name="rotation")


# --- error norms ------------------------------------------------------------

def l2_error(mesh, C, exact, t: float = 0.0, order: int | None = None) -> float:
    """L2(Omega) norm of c_h - exact(t, .), integrated with a rule of order
    2p + 1 unless given."""
    C = np.asarray(C, dtype=float)
    N = C.shape[1]
    p = int(round((math.sqrt(8 * N + 1) - 3) / 2))
    rule = quad_rule_2d(min(2 * p + 1 if order is None else order, 9))
    x = mesh.map_to_physical(rule.points)
    ch = C @ modal_values(p, rule.points).T
    ex = np.broadcast_to(np.asarray(exact(t, x), dtype=float), ch.shape)
    sq = 2.0 * mesh.area * ((ch - ex) ** 2 @ rule.weights)
    return float(math.sqrt(sq.sum()))


def compute_eoc(errors, hs) -> list:
    """Orders between consecutive levels; the first entry is None."""
    if len(errors) != len(hs):
        raise ValueError("errors and mesh sizes differ in length")
    eoc = [None]
    for j in range(1, len(errors)):
        eoc.append(math.log(errors[j - 1] / errors[j]) / math.log(hs[j - 1] / hs[j]))
    return eoc


# --- monitors ---------------------------------------------------------------

@dataclass
class Monitors:
    """Diagnostics recorded at selected times."""

    times: list = field(default_factory=list)
    centroid_min: list = field(default_factory=list)
    centroid_max: list = field(default_factory=list)
    vertex_min: list = field(default_factory=list)
    vertex_max: list = field(default_factory=list)
    edge_min: list = field(default_factory=list)
    edge_max: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    error: list = field(default_factory=list)

    COLUMNS = ("time", "centroid_min", "centroid_max", "vertex_min", "vertex_max",
               "edge_min", "edge_max", "mass", "error")

    def append(self, t: float, entry: dict) -> None:
        self.times.append(float(t))
        for key, val in entry.items():
            getattr(self, key).append(val)

    def rows(self):
        return [tuple(getattr(self, "times" if c == "time" else c)[i] for c in self.COLUMNS)
                for i in range(len(self.times))]

    def extremes(self) -> dict:
        """Minima and maxima over the whole run."""
        return {
            "centroid_min": min(self.centroid_min), "centroid_max": max(self.centroid_max),
            "vertex_min": min(self.vertex_min), "vertex_max": max(self.vertex_max),
            "edge_min": min(self.edge_min), "edge_max": max(self.edge_max),
        }


_REF_CENTROID = np.array([[1.0 / 3.0, 1.0 / 3.0]])
_REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_REF_MIDPOINTS = np.vstack([gamma_map(n, np.array([0.5])) for n in (1, 2, 3)])


def record_monitors(mesh, C, exact=None, t: float = 0.0) -> dict:
    """Point values of c_h at centroids, vertices and edge midpoints, total
    mass and (if an exact solution is given) the L2 error."""
    C = np.asarray(C, dtype=float)
    N = C.shape[1]
    p = int(round((math.sqrt(8 * N + 1) - 3) / 2))
    vc = C @ modal_values(p, _REF_CENTROID).T
    vv = C @ modal_values(p, _REF_VERTICES).T
    ve = C @ modal_values(p, _REF_MIDPOINTS).T
    mass = float(np.sum(mesh.area * np.sqrt(2.0) * C[:, 0]))
    return {
        "centroid_min": float(vc.min()), "centroid_max": float(vc.max()),
        "vertex_min": float(vv.min()), "vertex_max": float(vv.max()),
        "edge_min": float(ve.min()), "edge_max": float(ve.max()),
        "mass": mass,
        "error": l2_error(mesh, C, exact, t) if exact is not None else float("nan"),
    }


# --- drivers ----------------------------------------------------------------

def _as_config(limiter) -> LimiterConfig:
    if limiter is None:
        return LimiterConfig()
    if isinstance(limiter, str):
        return LimiterConfig(limiter)
    return limiter


def solve_stationary(problem: Problem, mesh, p: int, limiter=None, disc: Discretization | None = None,
                     boundary_vertices: str = "all"):
    """Solve (-G1 - G2 + R) C = L - K_D with a sparse LU factorisation; a
    configured limiter is applied once to the solution, with the boundary
    datum entering the bounds at ``boundary_vertices`` ("all" or "inflow")."""
    if not problem.stationary:
        raise ValueError("solve_stationary needs a time-independent problem")
    disc = disc or Discretization(mesh, p)
    A, V = disc.operators(problem, 0.0)
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise NumericalFailure(f"singular stationary system: {exc}") from exc
    C = lu.solve(V).reshape(mesh.num_elements, disc.N)
    if not np.all(np.isfinite(C)):
        raise NumericalFailure("stationary solve produced non-finite values")
    config = _as_config(limiter)
    if config.variant != "none":
        mask, vals = disc.boundary_vertex_data(problem, 0.0, boundary_vertices)
        C = disc.limit(C, config.with_boundary(mask, vals))
    return C


def solve_transient(problem: Problem, mesh, p: int, limiter=None, rk_order: int | None = None,
                    dt: float | None = None, t_end: float = 1.0, lumped: bool = False,
                    monitor_every: int = 0, cfl: float = 0.5, callback=None,
                    boundary_vertices: str = "all"):
    """Project and limit the initial datum, then step to ``t_end``.

    The step is shortened uniformly so that ``t_end`` is hit exactly. With
    ``monitor_every = n > 0`` monitors are recorded every n steps, and
    always at the start and the end. ``callback(step, t, C)`` is invoked
    after every recorded step. Returns (C, Monitors).
    """
    if problem.initial is None:
        raise ValueError("transient problem needs an initial datum")
    disc = Discretization(mesh, p)
    state = TransientState(disc, problem, _as_config(limiter), boundary_vertices)
    scheme = ssp_coefficients(min(p + 1, 3) if rk_order is None else rk_order)
    if dt is None:
        dt = stable_dt(disc, problem, cfl)
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    nsteps = max(1, math.ceil(t_end / dt - 1e-9))
    dt = t_end / nsteps
    step_fn = rk_step_lumped if lumped and state.limited else rk_step

    C = state.limit(disc.project(problem.initial, 0.0), 0.0)
    mon = Monitors()

    def record(step, t, C):
        mon.append(t, record_monitors(mesh, C, problem.exact, t))
        if callback is not None:
            callback(step, t, C)

    record(0, 0.0, C)
    t = 0.0
    for n in range(1, nsteps + 1):
        C = step_fn(state, C, t, dt, scheme, step=n)
        t = n * dt
        if n == nsteps or (monitor_every and n % monitor_every == 0):
            record(n, t, C)
    return C, mon
