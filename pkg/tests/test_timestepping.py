from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from dgadvect.discretization import Discretization, Problem
from dgadvect.limiter import LimiterConfig
from dgadvect.mesh import build_topology, generate_criss_cross
from dgadvect.solver import record_monitors, solve_transient
from dgadvect.timestepping import (
    NumericalFailure,
    TransientState,
    lumped_time_derivative,
    rk_step,
    rk_step_lumped,
    ssp_coefficients,
    stable_dt,
)


def zero_field(t, x):
    return np.zeros(x.shape)


def bump(t, x):
    return np.exp(-20 * ((x[..., 0] - 0.4) ** 2 + (x[..., 1] - 0.5) ** 2))


def shear(t, x):
    return np.stack([1.0 + 0.3 * x[..., 1], 0.4 + 0 * x[..., 0]], axis=-1)


def cellular(t, x):
    # divergence free and tangential on the boundary of the unit square
    X, Y = np.pi * x[..., 0], np.pi * x[..., 1]
    return np.stack([np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y)], axis=-1)


def test_ssp_tables_exact():
    assert ssp_coefficients(1).omega == (Fraction(0),) and ssp_coefficients(1).delta == (Fraction(0),)
    s2 = ssp_coefficients(2)
    assert s2.omega == (Fraction(0), Fraction(1, 2)) and s2.delta == (Fraction(0), Fraction(1))
    s3 = ssp_coefficients(3)
    assert s3.omega == (Fraction(0), Fraction(3, 4), Fraction(1, 3))
    assert s3.delta == (Fraction(0), Fraction(1), Fraction(1, 2))
    assert s3.stages == 3
    with pytest.raises(ValueError):
        ssp_coefficients(4)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_zero_derivative_keeps_state_exactly(order):
    mesh = generate_criss_cross(2, 2)
    disc = Discretization(mesh, 2)
    C = np.random.default_rng(0).normal(size=(mesh.num_elements, 6))
    state = TransientState(disc, Problem(velocity=zero_field))
    np.testing.assert_array_equal(rk_step(state, C, 0.0, 0.1, ssp_coefficients(order)), C)


def test_first_order_is_forward_euler():
    mesh = generate_criss_cross(2, 2)
    disc = Discretization(mesh, 1)
    problem = Problem(velocity=shear, dirichlet=lambda t, x: np.ones(x.shape[:-1]))
    state = TransientState(disc, problem)
    C = disc.project(bump)
    A, V = disc.operators(problem, 0.0)
    M = disc.M.toarray()
    euler = C.ravel() + 0.01 * np.linalg.solve(M, V - A @ C.ravel())
    np.testing.assert_allclose(rk_step(state, C, 0.0, 0.01, ssp_coefficients(1)).ravel(), euler, atol=1e-13)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_amplification_factor_single_element(order):
    # p = 0 on one triangle with homogeneous inflow: dC/dt = lam C
    mesh = build_topology([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    disc = Discretization(mesh, 0)
    problem = Problem(velocity=lambda t, x: np.broadcast_to([1.0, 0.5], x.shape))
    A, _ = disc.operators(problem, 0.0)
    lam = -A.toarray()[0, 0] / disc.M.toarray()[0, 0]
    dt = 0.3
    z = lam * dt
    factor = sum(z ** j / np.prod(range(1, j + 1)) for j in range(order + 1))
    state = TransientState(disc, problem)
    out = rk_step(state, np.array([[0.7]]), 0.0, dt, ssp_coefficients(order))
    assert out[0, 0] == pytest.approx(0.7 * factor, abs=1e-13)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_temporal_order(order):
    mesh = generate_criss_cross(2, 2)
    disc = Discretization(mesh, 1)
    problem = Problem(velocity=shear)
    state = TransientState(disc, problem)
    C0 = disc.project(bump)
    A, _ = disc.operators(problem, 0.0)
    L = -np.linalg.solve(disc.M.toarray(), A.toarray())
    T = 0.2
    exact = (expm(L * T) @ C0.ravel()).reshape(C0.shape)
    errs = []
    for n in (10, 20, 40):
        C, dt = C0, T / n
        for i in range(n):
            C = rk_step(state, C, i * dt, dt, ssp_coefficients(order))
        errs.append(np.abs(C - exact).max())
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert abs(rates[-1] - order) < 0.2


@pytest.mark.parametrize("variant,lumped", [("none", False), ("linear", True), ("strict", True), ("hierarchical", False)])
def test_mass_conserved_for_closed_flow(variant, lumped):
    mesh = generate_criss_cross(6, 6)
    problem = Problem(velocity=cellular, initial=bump)
    C, mon = solve_transient(problem, mesh, 2, variant, t_end=0.3, lumped=lumped, monitor_every=5)
    assert max(abs(m - mon.mass[0]) for m in mon.mass) <= 1e-13


def test_lumped_step_equals_plain_step_without_limiter():
    mesh = generate_criss_cross(3, 3)
    disc = Discretization(mesh, 2)
    problem = Problem(velocity=shear, dirichlet=lambda t, x: np.ones(x.shape[:-1]))
    state = TransientState(disc, problem)
    C = disc.project(bump)
    scheme = ssp_coefficients(3)
    np.testing.assert_allclose(rk_step_lumped(state, C, 0.0, 0.01, scheme), rk_step(state, C, 0.0, 0.01, scheme),
                               atol=1e-11)


@pytest.mark.parametrize("variant", ["linear", "hierarchical", "strict"])
def test_lumped_step_updates_means_like_unlimited_scheme(variant):
    mesh = generate_criss_cross(4, 4)
    disc = Discretization(mesh, 2)
    problem = Problem(velocity=shear, dirichlet=lambda t, x: np.zeros(x.shape[:-1]))
    state = TransientState(disc, problem, LimiterConfig(variant))
    C = state.limit(disc.project(lambda t, x: (bump(t, x) > 0.5).astype(float)), 0.0)
    dt = 0.005
    out = rk_step_lumped(state, C, 0.0, dt, ssp_coefficients(1))
    plain = C + dt * state.time_derivative(C, 0.0)
    np.testing.assert_allclose(out[:, 0], plain[:, 0], atol=1e-11)
    # the lumped correction leaves the mean row alone
    Cdot = state.time_derivative(C, 0.0)
    np.testing.assert_allclose(lumped_time_derivative(state, Cdot)[:, 0], Cdot[:, 0], atol=1e-11)


NOT_A_PROJECTION = pytest.mark.xfail(
    strict=True, reason="derivative-level bounds come from limited neighbours, so a second pass differs")


@pytest.mark.parametrize("variant", ["linear", pytest.param("hierarchical", marks=NOT_A_PROJECTION),
                                     pytest.param("strict", marks=NOT_A_PROJECTION)])
def test_limited_state_is_fixed_point_without_transport(variant):
    mesh = generate_criss_cross(3, 3)
    disc = Discretization(mesh, 2)
    state = TransientState(disc, Problem(velocity=zero_field), LimiterConfig(variant))
    C = state.limit(disc.project(lambda t, x: (x[..., 0] > 0.45).astype(float)), 0.0)
    for step in (rk_step, rk_step_lumped):
        np.testing.assert_allclose(step(state, C, 0.0, 0.1, ssp_coefficients(3)), C, atol=1e-11)


def test_non_finite_state_detected():
    mesh = generate_criss_cross(2, 2)
    disc = Discretization(mesh, 1)
    state = TransientState(disc, Problem(velocity=shear))
    C = disc.project(bump)
    C[3, 1] = np.nan
    with pytest.raises(NumericalFailure, match="step 7"):
        rk_step(state, C, 0.0, 0.01, ssp_coefficients(2), step=7)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reported_by_driver():
    mesh = generate_criss_cross(4, 4)
    problem = Problem(velocity=shear, initial=bump)
    with pytest.raises(NumericalFailure):
        solve_transient(problem, mesh, 2, dt=5.0, t_end=5000.0, rk_order=1)


def test_stable_dt():
    mesh = generate_criss_cross(4, 4)
    disc = Discretization(mesh, 2)
    const = Problem(velocity=lambda t, x: np.broadcast_to([3.0, 4.0], x.shape))
    assert stable_dt(disc, const, 0.5) == pytest.approx(0.5 * mesh.h_min / (5 * 5.0))
    with pytest.raises(ValueError):
        stable_dt(disc, Problem(velocity=zero_field))


def test_still_problem_returns_limited_initial_state():
    mesh = generate_criss_cross(3, 3)
    step_field = lambda t, x: (x[..., 1] > 0.5).astype(float)
    problem = Problem(velocity=zero_field, initial=step_field)
    C, mon = solve_transient(problem, mesh, 2, "hierarchical", dt=0.1, t_end=1.0, lumped=True)
    disc = Discretization(mesh, 2)
    state = TransientState(disc, problem, LimiterConfig("hierarchical"))
    np.testing.assert_allclose(C, state.limit(disc.project(step_field), 0.0), atol=1e-12)
    assert len(mon.times) == 2 and mon.times[-1] == 1.0
