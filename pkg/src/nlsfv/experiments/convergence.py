"""Empirical convergence study against the finest of a list of levels."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..damping import preset, sample_damping
from ..mesh import generate_mesh, signed_distance
from ..solver import run_simulation, sample_initial_condition


@dataclass(frozen=True)
class ConvergenceRow:
    n_cells: int
    dt: float
    h: float
    e_E0: float
    e_field: float
    order_E0: float = math.nan
    order_field: float = math.nan


@dataclass
class ConvergenceTable:
    rows: list
    T_c: float
    fields: list = field(default_factory=list, repr=False)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self):
        cols = ("n_cells", "dt", "h", "e_E0", "e_field", "order_E0", "order_field")
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(repr(getattr(r, c)) if c != "n_cells" else str(r.n_cells)
                                  for c in cols))
        return "\n".join(lines) + "\n"


def parse_levels(text):
    """Parse ``"(cells,dt);(cells,dt);..."``; ``dt`` may be written ``2^-6``."""
    levels = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        m = re.fullmatch(r"\(?\s*(\d+)\s*,\s*([^)]+?)\s*\)?", chunk)
        if not m:
            raise ValueError(f"cannot parse level {chunk!r}; expected (cells,dt)")
        dt_text = m.group(2).replace(" ", "")
        pw = re.fullmatch(r"2(?:\^|\*\*)(-?\d+)", dt_text)
        dt = 2.0 ** int(pw.group(1)) if pw else float(dt_text)
        levels.append((int(m.group(1)), dt))
    if not levels:
        raise ValueError("no levels given")
    return levels


def probe_grid(domain, resolution=200):
    """Uniform grid over the bounding box, restricted to the domain interior.

    Returns the probe points and the area weight of each probe.
    """
    x0, y0, x1, y1 = domain.bounding_box
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    pts = pts[signed_distance(domain, pts) < 0]
    weight = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return pts, weight


def sample_on_probes(mesh, field, probes):
    """Piecewise-constant field at probe points (nearest cell point = containing Voronoi cell)."""
    _, idx = cKDTree(mesh.points).query(probes)
    return np.asarray(field)[idx]


def _shared_max_diff(t_a, v_a, t_b, v_b):
    j = np.searchsorted(t_b, t_a)
    j = np.clip(j, 0, len(t_b) - 1)
    jm = np.clip(j - 1, 0, len(t_b) - 1)
    pick = np.where(np.abs(t_b[jm] - t_a) < np.abs(t_b[j] - t_a), jm, j)
    ok = np.abs(t_b[pick] - t_a) <= 1e-9 * np.maximum(1.0, np.abs(t_a))
    if not ok.any():
        raise ValueError("levels share no sample times")
    return float(np.max(np.abs(v_a[ok] - v_b[pick[ok]])))


def convergence_study(base_config, levels, T_c=None, probe_resolution=200):
    """Run every ``(n_cells, dt)`` level to ``T_c`` and compare with the last one.

    Errors per level are the max-norm difference of the E0 trajectories over
    shared sample times and the L2 difference of the final fields on a probe
    grid. Observed orders ``log2(e_prev / e)`` are reported between
    consecutive levels whose errors are both positive.
    """
    levels = [(int(n), float(dt)) for n, dt in levels]
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    T_c = min(base_config.T, 1.0) if T_c is None else float(T_c)
    domain = base_config.domain_spec
    meshes = {}
    runs = []
    for n, dt in levels:
        if n not in meshes:
            meshes[n] = generate_mesh(domain, n, seed=base_config.seed,
                                      lloyd_max_iters=base_config.lloyd_max_iters)
        mesh = meshes[n]
        cfg = base_config.replace(n_cells=n, dt=dt, T=T_c, record_every=1, snapshot_every=None)
        damping = sample_damping(preset(cfg.damping, cfg.damping_amplitude), mesh)
        y0 = sample_initial_condition(cfg.initial, mesh)
        sim = run_simulation(mesh, damping, y0, cfg.scheme_config(), T_c, 1)
        runs.append((mesh, sim))

    probes, weight = probe_grid(domain, probe_resolution)
    ref_mesh, ref_sim = runs[-1]
    ref_probe = sample_on_probes(ref_mesh, ref_sim.final_field, probes)
    rows = []
    for (n, dt), (mesh, sim) in zip(levels, runs):
        e0 = _shared_max_diff(sim.series.t, sim.series.E0, ref_sim.series.t, ref_sim.series.E0)
        diff = sample_on_probes(mesh, sim.final_field, probes) - ref_probe
        ef = math.sqrt(float(np.sum(np.abs(diff) ** 2)) * weight)
        rows.append(ConvergenceRow(n, dt, float(mesh.h), e0, ef))
    for i in range(1, len(rows) - 1):
        prev, cur = rows[i - 1], rows[i]
        orders = {}
        for name in ("E0", "field"):
            a, b = getattr(prev, f"e_{name}"), getattr(cur, f"e_{name}")
            orders[f"order_{name}"] = math.log2(a / b) if a > 0 and b > 0 else math.nan
        rows[i] = ConvergenceRow(cur.n_cells, cur.dt, cur.h, cur.e_E0, cur.e_field, **orders)
    return ConvergenceTable(rows, T_c, [sim.final_field for _, sim in runs])
