"""Experiment drivers behind the command line: the stationary convergence
study, the solid-body rotation benchmark and a single stationary solve."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .io import CONVERGENCE_COLUMNS, MONITOR_COLUMNS, RunConfig, serialize_config, write_csv, write_vtk
from .limiter import LimiterConfig
from .mesh import generate_criss_cross, read_mesh, refine_uniform
from .solver import (
    compute_eoc,
    convergence_problem,
    l2_error,
    rotation_problem,
    solve_stationary,
    solve_transient,
)


class ExperimentError(RuntimeError):
    pass


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExperimentError(f"cannot create output directory {out}: {exc}") from exc
    (out / "config.txt").write_text(serialize_config(cfg))
    return out


def _limiter(cfg: RunConfig) -> LimiterConfig:
    return LimiterConfig(cfg.limiter, cfg.epsilon)


@dataclass
class ConvergenceResult:
    rows: list
    path: Path


def run_convergence(cfg: RunConfig) -> ConvergenceResult:
    """Stationary analytic test on a sequence of uniformly refined meshes,
    levels j = 0..cfg.levels, starting from the 3 x 3 criss-cross mesh (or
    the given mesh file)."""
    out = _outdir(cfg)
    problem = convergence_problem()
    mesh = read_mesh(cfg.mesh) if cfg.mesh else generate_criss_cross(3, 3)
    errors, hs, Ks = [], [], []
    for j in range(cfg.levels + 1):
        if j:
            mesh = refine_uniform(mesh)
        try:
            C = solve_stationary(problem, mesh, cfg.p, _limiter(cfg), boundary_vertices=cfg.boundary_vertices)
        except FloatingPointError as exc:
            raise ExperimentError(f"level {j}: {exc}") from exc
        errors.append(l2_error(mesh, C, problem.exact))
        hs.append(mesh.h)
        Ks.append(mesh.num_elements)
    eoc = compute_eoc(errors, hs)
    rows = [(cfg.p, cfg.limiter, j, hs[j], Ks[j], errors[j], eoc[j]) for j in range(len(errors))]
    path = write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS, rows, "convergence")
    return ConvergenceResult(rows, path)


@dataclass
class RotationResult:
    initial_error: float
    final_error: float
    monitors: object
    paths: list


def run_rotation(cfg: RunConfig, log=print) -> RotationResult:
    out = _outdir(cfg)
    problem = rotation_problem()
    mesh = read_mesh(cfg.mesh) if cfg.mesh else generate_criss_cross(cfg.nx, cfg.ny)
    paths = []
    refine = None if cfg.refine_output else False

    def snapshot(step, t, C):
        if step == 0:
            paths.append(write_vtk(mesh, C, "c", out / "initial.vtk", refine))
        elif cfg.monitor_every and step % cfg.monitor_every == 0:
            paths.append(write_vtk(mesh, C, "c", out / f"rotation_{step:06d}.vtk", refine))

    try:
        C, mon = solve_transient(
            problem, mesh, cfg.p, _limiter(cfg), cfg.rk, dt=cfg.dt or None, t_end=cfg.t_end,
            lumped=cfg.lumped, monitor_every=cfg.monitor_every, cfl=cfg.cfl,
            callback=snapshot, boundary_vertices=cfg.boundary_vertices,
        )
    except FloatingPointError as exc:
        raise ExperimentError(str(exc)) from exc
    init_err = mon.error[0]
    final_err = l2_error(mesh, C, problem.initial)
    paths.append(write_vtk(mesh, C, "c", out / "final.vtk", refine))
    paths.append(write_csv(out / "monitors.csv", MONITOR_COLUMNS, mon.rows(), "monitors"))
    log(f"initial projection error {init_err:.6e}")
    log(f"final error {final_err:.6e}")
    return RotationResult(init_err, final_err, mon, paths)


@dataclass
class SolveResult:
    error: float
    paths: list


def run_solve(cfg: RunConfig, log=print) -> SolveResult:
    """Stationary analytic test problem on one mesh (file or generator)."""
    out = _outdir(cfg)
    problem = convergence_problem()
    mesh = read_mesh(cfg.mesh) if cfg.mesh else generate_criss_cross(cfg.nx, cfg.ny)
    try:
        C = solve_stationary(problem, mesh, cfg.p, _limiter(cfg), boundary_vertices=cfg.boundary_vertices)
    except FloatingPointError as exc:
        raise ExperimentError(str(exc)) from exc
    err = l2_error(mesh, C, problem.exact)
    refine = None if cfg.refine_output else False
    paths = [write_vtk(mesh, C, "c", out / "solution.vtk", refine)]
    paths.append(write_csv(out / "solve.csv", ("p", "limiter", "h", "K", "error"),
                           [(cfg.p, cfg.limiter, mesh.h, mesh.num_elements, err)], "solve"))
    log(f"L2 error {err:.6e} on K = {mesh.num_elements}")
    return SolveResult(err, paths)


RUNNERS = {"convergence": run_convergence, "rotation": run_rotation, "solve": run_solve}
