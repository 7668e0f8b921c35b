"""Writers for simulation output (legacy ASCII VTK, CSV) and the flat
``key = value`` run configuration."""
from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .basis import modal_values
from .limiter import VARIANTS
from .mesh import refine_uniform
from .quadrature import quad_rule_2d

CSV_SCHEMA_VERSION = 1


def _fmt(x) -> str:
    """Shortest round-trip representation of a float."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# --- VTK --------------------------------------------------------------------

_REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

# corners of the four children of refine_uniform in the parent's reference
# coordinates, in the same order as the children are generated
_CHILD_CORNERS = np.array([
    [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]],
    [[0.5, 0.0], [1.0, 0.0], [0.5, 0.5]],
    [[0.0, 0.5], [0.5, 0.5], [0.0, 1.0]],
    [[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]],
])


def _degree(C) -> int:
    return int(round((math.sqrt(8 * C.shape[1] + 1) - 3) / 2))


def _cell_means(C, p, corners=None):
    """Means of c_h over the cells; ``corners`` (c, 3, 2) selects sub-cells
    of every element given by reference corner coordinates."""
    if corners is None:
        return math.sqrt(2.0) * C[:, 0]
    rule = quad_rule_2d(max(p, 1))
    out = []
    for tri in corners:
        B = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
        xhat = rule.points @ B.T + tri[0]
        out.append(2.0 * (C @ modal_values(p, xhat).T) @ rule.weights)
    return np.stack(out, axis=1).ravel()


def _vertex_average(num_points, cells, values):
    acc = np.zeros(num_points)
    cnt = np.zeros(num_points)
    np.add.at(acc, cells.ravel(), values.ravel())
    np.add.at(cnt, cells.ravel(), 1.0)
    return acc / np.maximum(cnt, 1.0)


def write_vtk(mesh, C, field_name: str, path, refine: bool | None = None) -> Path:
    """Write c_h as a legacy ASCII VTK unstructured grid.

    Cell data are element means, point data the average over all elements
    sharing a point of the values there. With ``refine`` (default for p >= 2)
    each element is written as its four uniform children so that curvature
    shows up in viewers.
    """
    C = np.asarray(C, dtype=float)
    p = _degree(C)
    if refine is None:
        refine = p >= 2
    if refine:
        sub = refine_uniform(mesh)
        points, cells = sub.vertices, sub.triangles
        corner_vals = np.stack(
            [C @ modal_values(p, tri).T for tri in _CHILD_CORNERS], axis=1
        ).reshape(-1, 3)
        means = _cell_means(C, p, _CHILD_CORNERS)
    else:
        points, cells = mesh.vertices, mesh.triangles
        corner_vals = C @ modal_values(p, _REF_VERTICES).T
        means = _cell_means(C, p)
    point_vals = _vertex_average(len(points), cells, corner_vals)

    lines = ["# vtk DataFile Version 3.0", f"dgadvect {field_name}", "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(points)} double"]
    lines += [f"{_fmt(x)} {_fmt(y)} 0.0" for x, y in points]
    lines.append(f"CELLS {len(cells)} {4 * len(cells)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in cells.tolist()]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += ["5"] * len(cells)
    lines += [f"CELL_DATA {len(cells)}", f"SCALARS {field_name} double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in means]
    lines += [f"POINT_DATA {len(points)}", f"SCALARS {field_name} double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in point_vals]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write VTK file {path}: {exc}") from exc
    return path


# --- CSV --------------------------------------------------------------------

CONVERGENCE_COLUMNS = ("p", "limiter", "j", "h", "K", "error", "eoc")
MONITOR_COLUMNS = ("time", "centroid_min", "centroid_max", "vertex_min", "vertex_max",
                   "edge_min", "edge_max", "mass", "error")


def write_csv(path, columns, rows, kind: str) -> Path:
    """CSV with a leading ``# dgadvect <kind> schema <v>`` comment line;
    floats are written with round-trip precision, missing values empty."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# dgadvect {kind} schema {CSV_SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if v is None else _fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (kind, schema version, header, rows as strings)."""
    with Path(path).open() as fh:
        first = fh.readline().split()
        if len(first) != 5 or first[:2] != ["#", "dgadvect"] or first[3] != "schema":
            raise ValueError(f"{path}: missing dgadvect schema line")
        rows = list(csv.reader(fh))
    return first[2], int(first[4]), rows[0], rows[1:]


# --- configuration ------------------------------------------------------------

EXPERIMENTS = ("convergence", "rotation", "solve")


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "convergence"
    p: int = 1
    levels: int = 4
    limiter: str = "none"
    epsilon: float = 1e-8
    rk_order: int = 0  # 0 selects min(p + 1, 3)
    cfl: float = 0.5
    dt: float = 0.0  # 0 selects the CFL-based step
    t_end: float = 2 * math.pi
    lumped: bool = True
    out: str = "output"
    mesh: str = ""  # mesh file; empty selects the generator
    nx: int = 32
    ny: int = 32
    monitor_every: int = 0
    refine_output: bool = True
    boundary_vertices: str = "all"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not 0 <= self.p <= 4:
            raise ValueError(f"p must be in 0..4, got {self.p}")
        if self.levels < 0:
            raise ValueError(f"levels must be >= 0, got {self.levels}")
        if self.limiter not in VARIANTS:
            raise ValueError(f"limiter must be one of {VARIANTS}, got {self.limiter!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.rk_order not in (0, 1, 2, 3):
            raise ValueError(f"rk_order must be 1, 2 or 3, got {self.rk_order}")
        if not self.cfl > 0 or self.dt < 0 or not self.t_end > 0:
            raise ValueError("cfl and t_end must be positive, dt non-negative")
        if self.nx < 1 or self.ny < 1 or self.monitor_every < 0:
            raise ValueError("nx, ny must be positive and monitor_every non-negative")
        if self.boundary_vertices not in ("all", "inflow"):
            raise ValueError("boundary_vertices must be 'all' or 'inflow'")

    @property
    def rk(self) -> int:
        return self.rk_order or min(self.p + 1, 3)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_SECTION = "run"


def _coerce(name, typ, text):
    if typ is bool or typ == "bool":
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected on/off, got {text!r}")
    if typ is int or typ == "int":
        return int(text)
    if typ is float or typ == "float":
        return float(text)
    return text.strip()


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key = value`` lines (``#`` comments allowed)."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(f"[{_SECTION}]\n" + text)
    known = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for key, val in cp[_SECTION].items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _coerce(key, known[key], val)
    return RunConfig(**values)


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "on" if v else "off"
        out.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
