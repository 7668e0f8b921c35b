"""Strong-stability-preserving Runge-Kutta schemes of order 1 to 3 for the
semi-discrete DG system, with optional slope limiting of every stage and an
optional lumped-mass correction of the time derivative."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .discretization import Discretization, Problem
from .limiter import LimiterConfig


class NumericalFailure(FloatingPointError):
    """Raised when the solution stops being finite."""


@dataclass(frozen=True)
class RkScheme:
    order: int
    omega: tuple  # weights of the old solution per stage
    delta: tuple  # stage times as fractions of the step

    @property
    def stages(self) -> int:
        return len(self.omega)


_SCHEMES = {
    1: ((0,), (0,)),
    2: ((0, Fraction(1, 2)), (0, 1)),
    3: ((0, Fraction(3, 4), Fraction(1, 3)), (0, 1, Fraction(1, 2))),
}


def ssp_coefficients(order: int) -> RkScheme:
    if order not in _SCHEMES:
        raise ValueError(f"SSP-RK order must be 1, 2 or 3, got {order}")
    om, de = _SCHEMES[order]
    return RkScheme(order, tuple(Fraction(w) for w in om), tuple(Fraction(d) for d in de))


class TransientState:
    """Bundles a discretization with a problem and caches the system
    matrices when the problem data do not depend on time."""

    def __init__(self, disc: Discretization, problem: Problem, limiter: LimiterConfig | None = None,
                 boundary_vertices: str = "all"):
        self.disc = disc
        self.problem = problem
        self.limiter = limiter or LimiterConfig()
        self.boundary_vertices = boundary_vertices
        self._cached = None

    def operators(self, t: float):
        if self.problem.stationary:
            if self._cached is None:
                self._cached = self.disc.operators(self.problem, 0.0)
            return self._cached
        return self.disc.operators(self.problem, t)

    def time_derivative(self, C, t: float) -> np.ndarray:
        """M^{-1} (V(t) - A(t) C), shape (K, N)."""
        A, V = self.operators(t)
        return self.disc.apply_Minv(V - A @ np.asarray(C).ravel())

    @property
    def limited(self) -> bool:
        return self.limiter.variant != "none"

    def limit(self, C, t: float) -> np.ndarray:
        """Limit with the boundary datum at time t entering the bounds."""
        if not self.limited:
            return C
        mask, vals = self.disc.boundary_vertex_data(self.problem, t, self.boundary_vertices)
        return self.disc.limit(C, self.limiter.with_boundary(mask, vals))


def _check_finite(C, step, t):
    if not np.all(np.isfinite(C)):
        raise NumericalFailure(f"non-finite solution in step {step} at t = {t:.6g}")


def rk_step(state: TransientState, C, t: float, dt: float, scheme: RkScheme, step: int = 0):
    """One SSP-RK step; each stage is limited when a limiter is configured."""
    Cn = np.asarray(C, dtype=float)
    Ci = Cn
    for w, d in zip(scheme.omega, scheme.delta):
        ts = t + float(d) * dt
        w = float(w)
        # w Cn + (1 - w)(Ci + dt S), arranged so that S = 0 leaves Cn untouched
        Ci = Cn + (1.0 - w) * (Ci - Cn + dt * state.time_derivative(Ci, ts))
        Ci = state.limit(Ci, ts)
        _check_finite(Ci, step, ts)
    return Ci


def lumped_time_derivative(state: TransientState, Cdot) -> np.ndarray:
    """Replace the consistent Taylor mass by the lumped one for the
    high-order part of the time derivative:
    Phi(Cdot) + M_L^{-1} M_C (Cdot - Phi(Cdot)) in Taylor coefficients.
    The derivative is limited without boundary data."""
    disc = state.disc
    DT = disc.to_taylor(Cdot)
    lim = disc.limit_taylor(DT, state.limiter.without_boundary())
    corr = np.einsum("kij,kj->ki", disc.taylor("Mcorr"), DT - lim)
    return disc.to_modal(lim + corr)


def rk_step_lumped(state: TransientState, C, t: float, dt: float, scheme: RkScheme, step: int = 0):
    Cn = np.asarray(C, dtype=float)
    Ci = Cn
    for w, d in zip(scheme.omega, scheme.delta):
        ts = t + float(d) * dt
        w = float(w)
        Ctil = lumped_time_derivative(state, state.time_derivative(Ci, ts))
        Ci = state.limit(Cn + (1.0 - w) * (Ci - Cn + dt * Ctil), ts)
        _check_finite(Ci, step, ts)
    return Ci


def stable_dt(disc: Discretization, problem: Problem, cfl: float = 0.5, t: float = 0.0) -> float:
    """CFL * h_min / ((2p + 1) max |u|), max taken over vertices and
    element quadrature points."""
    mesh = disc.mesh
    pts = np.concatenate(
        [mesh.vertices, mesh.map_to_physical(disc.ref.elem_rule.points).reshape(-1, 2), mesh.centroids]
    )
    u = np.broadcast_to(np.asarray(problem.velocity(t, pts), dtype=float), pts.shape)
    umax = float(np.hypot(u[:, 0], u[:, 1]).max())
    if umax == 0.0:
        raise ValueError("velocity vanishes everywhere; cannot derive a time step")
    return cfl * mesh.h_min / ((2 * disc.p + 1) * umax)
