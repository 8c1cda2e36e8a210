"""Running configured experiments and writing their reports."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from ..damping import preset, sample_damping
from ..errors import FitError
from ..functionals import SAMPLE_COLUMNS
from ..mesh import generate_mesh, load_mesh, save_mesh
from ..solver import run_simulation, sample_initial_condition
from .fitting import fit_decay_rate

log = logging.getLogger(__name__)

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "config", "mesh", "fit", "conservation", "solver"],
    "properties": {
        "schema_version": {"const": 1},
        "config": {"type": "object"},
        "mesh": {
            "type": "object",
            "required": ["n_cells", "n_faces", "h"],
            "properties": {
                "n_cells": {"type": "integer", "minimum": 1},
                "n_faces": {"type": "integer", "minimum": 0},
                "h": {"type": "number", "minimum": 0},
            },
        },
        "fit": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["gamma", "C", "r2", "window"],
                    "properties": {
                        "gamma": {"type": "number"},
                        "C": {"type": "number"},
                        "r2": {"type": "number", "minimum": 0, "maximum": 1},
                        "window": {"type": "array", "items": {"type": "number"},
                                   "minItems": 2, "maxItems": 2},
                    },
                },
            ]
        },
        "fit_error": {"type": ["string", "null"]},
        "conservation": {
            "type": "object",
            "required": ["E0_initial", "E0_final", "max_rel_E0_drift",
                         "max_rel_E0_step_increase", "max_rel_E1_drift",
                         "E1_envelope_C", "linf_max", "linf_early_max"],
            "additionalProperties": {"type": "number"},
        },
        "solver": {
            "type": "object",
            "required": ["steps", "picard_iters_max", "picard_iters_mean",
                         "krylov_iters_total", "elapsed_s"],
            "additionalProperties": {"type": "number"},
        },
    },
}


@dataclass
class ExperimentResult:
    config: object
    mesh: object
    simulation: object
    fit: object
    fit_error: str | None
    conservation: dict
    solver_stats: dict

    @property
    def series(self):
        return self.simulation.series


def build_mesh(config):
    if config.mesh_file:
        mesh = load_mesh(config.mesh_file)
    else:
        mesh = generate_mesh(config.domain_spec, config.n_cells, seed=config.seed,
                             lloyd_max_iters=config.lloyd_max_iters)
    if config.save_mesh:
        save_mesh(mesh, config.save_mesh)
    return mesh


def conservation_summary(series, y0_norm_sq, early_fraction=0.1):
    """Drift and monitor quantities of a recorded series (all relative to step 0)."""
    E0, E1 = series.E0, series.E1
    t = series.t
    linf = series.column("linf")
    e00, e10 = E0[0], E1[0]
    rel0 = abs(e00) if e00 else 1.0
    rel1 = abs(e10) if e10 else 1.0
    step_inc = np.diff(E0).max() / rel0 if len(E0) > 1 else 0.0
    pos = t > 0
    if pos.any() and y0_norm_sq > 0:
        envelope = float(max(0.0, np.max((E1[pos] - e10) / (t[pos] * y0_norm_sq))))
    else:
        envelope = 0.0
    n_early = max(1, int(math.ceil(early_fraction * len(linf))))
    return {
        "E0_initial": float(e00),
        "E0_final": float(E0[-1]),
        "max_rel_E0_drift": float(np.max(np.abs(E0 - e00)) / rel0),
        "max_rel_E0_step_increase": float(max(step_inc, 0.0)),
        "max_rel_E1_drift": float(np.max(np.abs(E1 - e10)) / rel1),
        "E1_envelope_C": envelope,
        "linf_max": float(linf.max()),
        "linf_early_max": float(linf[:n_early].max()),
        "h1_max": float(series.column("h1").max()),
        "l2p_max": float(series.column("l2p").max()),
    }


def run_example(config):
    """Mesh, damping, initial data, simulation and decay fit for one configuration."""
    t_start = time.perf_counter()
    mesh = build_mesh(config)
    damping = sample_damping(preset(config.damping, config.damping_amplitude), mesh)
    y0 = sample_initial_condition(config.initial, mesh)
    scheme = config.scheme_config()
    log.info("running example %s: %d cells, dt=%g, T=%g", config.example, mesh.n_cells,
             config.dt, config.T)
    sim = run_simulation(mesh, damping, y0, scheme, config.T, config.record_every,
                         config.snapshot_every)
    elapsed = time.perf_counter() - t_start
    series = sim.series
    fit, fit_error = None, None
    try:
        fit = fit_decay_rate(series.t, series.E0, config.window)
    except FitError as exc:
        fit_error = str(exc)
    y0_norm_sq = 2 * series.E0[0]
    stats = {
        "steps": int(sim.n_steps),
        "picard_iters_max": int(sim.picard_iters.max()) if sim.n_steps else 0,
        "picard_iters_mean": float(sim.picard_iters.mean()) if sim.n_steps else 0.0,
        "krylov_iters_total": int(sim.krylov_iters.sum()),
        "elapsed_s": float(elapsed),
    }
    return ExperimentResult(config, mesh, sim, fit, fit_error,
                            conservation_summary(series, y0_norm_sq), stats)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_series_csv(series, path):
    lines = [",".join(SAMPLE_COLUMNS)]
    for s in series:
        lines.append(",".join(_fmt(getattr(s, c)) for c in SAMPLE_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_snapshot_csv(mesh, field, path):
    lines = ["cell_id,x,y,re,im"]
    for k in range(mesh.n_cells):
        x, y = mesh.points[k]
        z = field[k]
        lines.append(f"{k},{_fmt(x)},{_fmt(y)},{_fmt(z.real)},{_fmt(z.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_snapshot_csv(path):
    """Return ``(points, field)`` from a snapshot file."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    return data[:, 1:3], data[:, 3] + 1j * data[:, 4]


def summary_dict(result):
    return {
        "schema_version": 1,
        "config": result.config.to_dict(),
        "mesh": {"n_cells": int(result.mesh.n_cells), "n_faces": int(result.mesh.n_faces),
                 "h": float(result.mesh.h)},
        "fit": result.fit.to_dict() if result.fit else None,
        "fit_error": result.fit_error,
        "conservation": result.conservation,
        "solver": result.solver_stats,
    }


def validate_summary(doc):
    jsonschema.validate(doc, SUMMARY_SCHEMA)


def emit_report(result, out_dir):
    """Write ``series.csv``, ``fit.txt``, ``summary.json`` and snapshots to ``out_dir``.

    Returns the summary text that is also printed by the command line.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_series_csv(result.series, out / "series.csv")
        if result.simulation.snapshots:
            snap_dir = out / "snapshots"
            snap_dir.mkdir(exist_ok=True)
            for step, (_, field) in sorted(result.simulation.snapshots.items()):
                write_snapshot_csv(result.mesh, field, snap_dir / f"step_{step:08d}.csv")
        text = summary_text(result)
        (out / "fit.txt").write_text(text, encoding="utf-8")
        doc = summary_dict(result)
        validate_summary(doc)
        (out / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return text


def summary_text(result):
    c = result.conservation
    lines = [f"example {result.config.example}: {result.mesh.n_cells} cells, h = {result.mesh.h:.5f}"]
    if result.fit:
        f = result.fit
        lines.append(f"decay fit on [{f.window[0]:g}, {f.window[1]:g}]: gamma = {f.gamma:.6g}, "
                     f"C = {f.C:.6g}, r2 = {f.r_squared:.4f}")
    else:
        lines.append(f"decay fit unavailable: {result.fit_error}")
    lines.append(f"E0: {c['E0_initial']:.10g} -> {c['E0_final']:.10g}, "
                 f"max step increase {c['max_rel_E0_step_increase']:.3e}")
    lines.append(f"E1 max relative drift {c['max_rel_E1_drift']:.3e}, "
                 f"envelope C {c['E1_envelope_C']:.3e}")
    lines.append(f"linf max {c['linf_max']:.6g} (early {c['linf_early_max']:.6g}), "
                 f"h1 max {c['h1_max']:.6g}, l2p max {c['l2p_max']:.6g}")
    s = result.solver_stats
    lines.append(f"{s['steps']} steps, picard mean {s['picard_iters_mean']:.2f} "
                 f"max {s['picard_iters_max']}, krylov total {s['krylov_iters_total']}, "
                 f"{s['elapsed_s']:.1f} s")
    return "\n".join(lines) + "\n"
