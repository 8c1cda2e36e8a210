"""Damping profiles ``a(x)``, their sampling on meshes, and structural checks.

Built-in presets (``r = |x|``, ``alpha`` the polar angle in ``(-pi, pi]``)::

    zero               0
    example1           (r - 8)^2                  on 8 <= r <= 10
    example2           (exp(r - 8) - 1)^2         on 8 <= r <= 10
    example3           (r - 17)^2                 on r >= 17
    example4           (r - 17)^2                 on r >= 17 and -pi < alpha < 0
    radial_quadratic   (r - r0)^2                 on r >= r0
    constant           c                          everywhere

Every preset accepts an ``amplitude`` multiplier.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshMismatchError

# sampling radius used for presets whose support is unbounded
DEFAULT_OUTER_RADIUS = 20.0

_KINDS = {
    "zero", "example1", "example2", "example3", "example4",
    "radial_quadratic", "constant", "custom",
}


@dataclass(frozen=True)
class DampingPreset:
    kind: str
    amplitude: float = 1.0
    r0: float | None = None
    value: float | None = None
    cell_values: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown damping preset {self.kind!r}")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise ValueError("damping amplitude must be finite and >= 0")
        if self.kind == "radial_quadratic" and self.r0 is None:
            raise ValueError("radial_quadratic needs r0")
        if self.kind == "constant" and not (self.value is not None and self.value >= 0):
            raise ValueError("constant damping needs a value >= 0")
        if self.kind == "custom":
            if self.cell_values is None:
                raise ValueError("custom damping needs per-cell values")
            vals = np.asarray(self.cell_values, dtype=float)
            if not (np.isfinite(vals).all() and (vals >= 0).all()):
                raise ValueError("custom damping values must be finite and >= 0")

    def scaled(self, factor):
        return DampingPreset(self.kind, self.amplitude * factor, self.r0, self.value, self.cell_values)

    def support_radii(self, outer=None):
        """Radial extent ``(r_lo, r_hi)`` of the support, or None if not radial."""
        outer = DEFAULT_OUTER_RADIUS if outer is None else outer
        if self.kind in ("example1", "example2"):
            return (8.0, 10.0)
        if self.kind in ("example3", "example4"):
            return (17.0, outer)
        if self.kind == "radial_quadratic":
            return (self.r0, outer)
        return None

    def analytic_ratio_sup(self):
        """Closed-form ``sup |grad a|^2 / a`` over the support, if known."""
        if self.kind in ("example1", "example3", "example4", "radial_quadratic"):
            # |grad a|^2 = 4 A^2 (r - r0)^2 = 4 A a
            return 4.0 * self.amplitude if self.amplitude > 0 else 0.0
        if self.kind == "example2":
            # a = A (e^s - 1)^2, a' = 2A (e^s - 1) e^s  ->  a'^2 / a = 4 A e^{2s}, max at s = 2
            return 4.0 * self.amplitude * math.exp(4.0) if self.amplitude > 0 else 0.0
        if self.kind in ("constant", "zero"):
            return 0.0
        return None

    def to_dict(self):
        d = {"kind": self.kind, "amplitude": self.amplitude}
        if self.r0 is not None:
            d["r0"] = self.r0
        if self.value is not None:
            d["value"] = self.value
        return d


def preset(name, amplitude=1.0):
    """Preset by CLI name: a built-in kind or ``custom:<path>``."""
    if name.startswith("custom:"):
        return load_custom_damping(name.split(":", 1)[1], amplitude)
    if name.startswith("radial_quadratic:"):
        return DampingPreset("radial_quadratic", amplitude, r0=float(name.split(":", 1)[1]))
    if name.startswith("constant:"):
        return DampingPreset("constant", amplitude, value=float(name.split(":", 1)[1]))
    return DampingPreset(name, amplitude)


def load_custom_damping(path, amplitude=1.0):
    """Read a ``{cell_id: value}`` JSON companion file."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or not raw:
        raise ValueError(f"{path}: expected a non-empty {{cell_id: value}} object")
    ids = sorted(int(k) for k in raw)
    if ids != list(range(len(ids))):
        raise ValueError(f"{path}: cell ids must be 0..{len(ids) - 1}")
    values = tuple(float(raw[str(k)]) for k in ids)
    return DampingPreset("custom", amplitude, cell_values=values)


def evaluate_damping(preset, point):
    """Evaluate ``a`` at one point or an array of points with shape ``(..., 2)``."""
    p = np.asarray(point, dtype=float)
    x, y = p[..., 0], p[..., 1]
    r = np.hypot(x, y)
    kind = preset.kind
    if kind == "zero":
        out = np.zeros_like(r)
    elif kind == "constant":
        out = np.full_like(r, preset.value)
    elif kind == "example1":
        out = np.where((r >= 8.0) & (r <= 10.0), (r - 8.0) ** 2, 0.0)
    elif kind == "example2":
        inside = (r >= 8.0) & (r <= 10.0)
        out = np.where(inside, np.expm1(np.where(inside, r - 8.0, 0.0)) ** 2, 0.0)
    elif kind in ("example3", "radial_quadratic"):
        r0 = 17.0 if kind == "example3" else preset.r0
        out = np.where(r >= r0, (r - r0) ** 2, 0.0)
    elif kind == "example4":
        alpha = np.arctan2(y, x)
        gate = (r >= 17.0) & (alpha > -math.pi) & (alpha < 0.0)
        out = np.where(gate, (r - 17.0) ** 2, 0.0)
    else:
        raise ValueError("custom damping is tabulated per cell and has no pointwise value")
    out = preset.amplitude * out
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DampingField:
    values: np.ndarray
    preset: DampingPreset

    @property
    def support(self):
        """Boolean mask of the cells where damping acts."""
        return self.values > 0

    def inf_on_support(self):
        v = self.values[self.support]
        return float(v.min()) if len(v) else 0.0


def sample_damping(preset, mesh):
    if preset.kind == "custom":
        vals = np.asarray(preset.cell_values, dtype=float) * preset.amplitude
        if len(vals) != mesh.n_cells:
            raise MeshMismatchError(
                f"custom damping has {len(vals)} values for a mesh of {mesh.n_cells} cells"
            )
    else:
        vals = np.asarray(evaluate_damping(preset, mesh.points), dtype=float)
    return DampingField(values=vals, preset=preset)


@dataclass(frozen=True)
class RatioBound:
    sup_ratio: float
    analytic_sup: float | None
    argmax: tuple | None = None
    n_samples: int = 0


def damping_ratio_bound(preset, resolution=1e-3, n_angles=64, outer=None, collar=None):
    """Sampled ``sup |grad a|^2 / a`` over the damped region.

    Sample points lie on a polar grid spanning the support with radial
    spacing ``resolution``; gradients use Cartesian central differences with
    the same step. Points whose stencil touches ``{a = 0}`` or leaves the
    support are skipped, as are points within ``collar`` of the inner support
    edge (default ``1e-6`` times the support width). Returns ``inf`` if the
    sampled ratio is unbounded.
    """
    analytic = preset.analytic_ratio_sup()
    radii = preset.support_radii(outer)
    h = float(resolution)
    if radii is None:
        if preset.kind == "custom":
            raise ValueError("ratio bound needs a pointwise damping profile")
        # spatially uniform profiles: sample a small patch
        pts = np.stack(np.meshgrid(np.linspace(-1, 1, 11), np.linspace(-1, 1, 11)), -1).reshape(-1, 2)
    else:
        lo, hi = radii
        eps = 1e-6 * (hi - lo) if collar is None else collar
        r = np.arange(lo + eps, hi + 0.5 * h, h)
        r = r[r <= hi]
        theta = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles - np.pi
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], -1).reshape(-1, 2)

    a0 = np.asarray(evaluate_damping(preset, pts))
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    axp, axm = evaluate_damping(preset, pts + ex), evaluate_damping(preset, pts - ex)
    ayp, aym = evaluate_damping(preset, pts + ey), evaluate_damping(preset, pts - ey)
    ok = (a0 > 0) & (axp > 0) & (axm > 0) & (ayp > 0) & (aym > 0)
    if not ok.any():
        return RatioBound(0.0, analytic, None, 0)
    gx = (axp[ok] - axm[ok]) / (2 * h)
    gy = (ayp[ok] - aym[ok]) / (2 * h)
    ratio = (gx**2 + gy**2) / a0[ok]
    k = int(np.argmax(ratio))
    sup = float(ratio[k])
    if not math.isfinite(sup):
        sup = math.inf
    return RatioBound(sup, analytic, tuple(pts[ok][k]), int(ok.sum()))


@dataclass(frozen=True)
class GeometricReport:
    covered: bool
    violations: list
    n_samples: int


def check_geometric_condition(domain, preset, observer=(0.0, 0.0), n_boundary_samples=720):
    """Check that the boundary part seen from ``observer`` is damped.

    For every boundary sample ``x`` with outward normal ``nu``: if
    ``(x - observer) . nu > 0`` the damping must be positive at ``x``; on an
    obstacle (inner circle) additionally ``(x - observer) . nu <= 0`` is
    required. Each violation is reported as a dict.
    """
    obs = np.asarray(observer, dtype=float)
    theta = 2 * np.pi * np.arange(n_boundary_samples) / n_boundary_samples
    unit = np.column_stack([np.cos(theta), np.sin(theta)])
    violations = []
    circles = [(domain.r_outer, 1.0, False)]
    if domain.r_inner is not None:
        circles.append((domain.r_inner, -1.0, True))
    total = 0
    for radius, sign, obstacle in circles:
        x = radius * unit
        nu = sign * unit
        mdotnu = ((x - obs) * nu).sum(1)
        # evaluate just inside the domain so rounding of |x| cannot leave the support
        a = np.asarray(evaluate_damping(preset, x - 1e-9 * radius * nu))
        total += len(x)
        for j in range(len(x)):
            reasons = []
            if mdotnu[j] > 0 and not a[j] > 0:
                reasons.append("undamped")
            if obstacle and mdotnu[j] > 0:
                reasons.append("obstacle not star-shaped w.r.t. observer")
            if reasons:
                violations.append(
                    {"point": (float(x[j, 0]), float(x[j, 1])), "m_dot_nu": float(mdotnu[j]),
                     "a": float(a[j]), "obstacle": obstacle, "reasons": reasons}
                )
    return GeometricReport(not violations, violations, total)
