"""Energy-conserving finite-volume time stepping for the damped NLS.

Per cell ``K`` and step ``n -> n+1`` the unknowns ``y^{n+1}`` satisfy::

    i m_K (y_K^{n+1} - y_K^n) / dt + sum_s F_{K,s}^{n+1/2}
        - m_K / (2p) * q_K * (y_K^{n+1} + y_K^n)
        + i m_K a_K (y_K^{n+1} + y_K^n) / 2 = 0

with two-point fluxes ``F = tau (y_L - y_K)`` (interior) and ``F = -tau y_K``
(boundary) at the midpoint level, and the Delfour-Fortin-Payre coefficient
``q_K = (|y_K^{n+1}|^{2p} - |y_K^n|^{2p}) / (|y_K^{n+1}|^2 - |y_K^n|^2)``.

``p`` is the exponent of the energy density ``|y|^{2p} / (2p)``; the
corresponding PDE nonlinearity is ``|y|^{2(p-1)} y`` (``p = 2`` is cubic).
The nonlinear relation is solved by Picard iteration on ``q``, each linear
system by restarted GMRES.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..damping import DampingField
from ..errors import KrylovConvergenceError, MeshMismatchError, PicardConvergenceError, StepError
from ..functionals import FunctionalSeries, sample_functionals
from .krylov import gmres

log = logging.getLogger(__name__)

_FLOOR = 1e-300


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    p: float = 2.0
    picard_tol: float = 1e-6
    picard_max_iters: int = 100
    krylov_tol: float = 1e-10
    krylov_restart: int = 50
    krylov_max_iters: int = 5000
    nonlinearity_enabled: bool = True
    ratio_epsilon: float = 1e-12
    jacobi: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        for name in ("picard_tol", "krylov_tol", "ratio_epsilon"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("picard_max_iters", "krylov_restart", "krylov_max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def nonlinear_coefficient(z_new, z_old, p, ratio_epsilon=1e-12):
    """Delfour-Fortin-Payre ratio ``(s1^p - s0^p) / (s1 - s0)``, ``s = |z|^2``.

    When ``|s1 - s0| <= ratio_epsilon * max(s1, s0)`` the analytic limit
    ``p * s^(p-1)`` at the mean ``s = (s1 + s0) / 2`` is returned. Nearby
    ratios are evaluated as ``lo^(p-1) * expm1(p log1p(d)) / d`` with
    ``d = (hi - lo) / lo`` so that no cancellation occurs close to the switch.
    For ``p < 1`` the limit at ``s = 0`` is infinite; 0 is returned there
    since the term it multiplies vanishes.
    """
    s1 = np.abs(np.asarray(z_new)) ** 2
    s0 = np.abs(np.asarray(z_old)) ** 2
    scalar = s1.ndim == 0 and s0.ndim == 0
    s1, s0 = np.broadcast_arrays(np.atleast_1d(s1), np.atleast_1d(s0))
    if p == 1:
        out = np.ones(s1.shape)
    elif p == 2:
        out = s1 + s0
    else:
        hi = np.maximum(s1, s0)
        lo = np.minimum(s1, s0)
        gap = hi - lo
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            mid = 0.5 * (s1 + s0)
            limit = np.where(mid > 0, p * mid ** (p - 1), 0.0)
            d = gap / lo
            near = lo ** (p - 1) * np.expm1(p * np.log1p(d)) / d
            far = (hi**p - lo**p) / gap
        use_limit = gap <= ratio_epsilon * np.maximum(hi, _FLOOR)
        use_far = (lo == 0) | (gap > lo)
        out = np.where(use_limit, limit, np.where(use_far, far, near))
    return float(out[0]) if scalar else out


def flux_matrix(mesh):
    """Sparse ``L`` with ``(L y)_K = sum_s F_{K,s}`` for two-point fluxes."""
    n = mesh.n_cells
    fc = mesh.face_cells
    tau = mesh.face_tau
    inner = fc[:, 1] >= 0
    k, l, t = fc[inner, 0], fc[inner, 1], tau[inner]
    kb, tb = fc[~inner, 0], tau[~inner]
    rows = np.concatenate([k, l, k, l, kb])
    cols = np.concatenate([l, k, k, l, kb])
    vals = np.concatenate([t, t, -t, -t, -tb])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    L.sum_duplicates()
    L.sort_indices()
    return L


@dataclass
class SparseComplexSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray


class StepOperator:
    """Mesh-dependent pieces of the step system, built once per run."""

    def __init__(self, mesh, damping=None):
        self.mesh = mesh
        self.m = mesh.areas
        if damping is None:
            a = np.zeros(mesh.n_cells)
        elif isinstance(damping, DampingField):
            a = damping.values
        else:
            a = np.asarray(damping, dtype=float)
        if a.shape != (mesh.n_cells,):
            raise MeshMismatchError("damping values do not match the mesh")
        self.a = a
        L = flux_matrix(mesh)
        # make the diagonal structurally present even for isolated cells
        L = (L + sp.diags(np.zeros(mesh.n_cells))).tocsr()
        L.sort_indices()
        self.half_flux = (0.5 * L).astype(complex).tocsr()
        A = self.half_flux
        self.diag_pos = np.array(
            [A.indptr[i] + np.searchsorted(A.indices[A.indptr[i]:A.indptr[i + 1]], i)
             for i in range(mesh.n_cells)],
            dtype=np.int64,
        )

    def system(self, y_n, q, dt, p):
        m, a = self.m, self.a
        shift = m * q / (2 * p)
        A = self.half_flux.copy()
        A.data[self.diag_pos] += 1j * m / dt - shift + 0.5j * m * a
        rhs = (1j * m / dt + shift - 0.5j * m * a) * y_n - self.half_flux @ y_n
        return SparseComplexSystem(A, rhs)


def assemble_step_system(mesh, damping, y_n, q, config, dt=None, operator=None):
    """Linear system for ``y^{n+1}`` with the nonlinear coefficient frozen at ``q``.

    The matrix is complex symmetric: off-diagonal entries are ``tau / 2`` in
    both the ``(K, L)`` and ``(L, K)`` slots.
    """
    y_n = np.asarray(y_n, dtype=complex)
    if y_n.shape != (mesh.n_cells,):
        raise MeshMismatchError("y_n does not match the mesh")
    if config.nonlinearity_enabled:
        q = np.broadcast_to(np.asarray(q, dtype=float), (mesh.n_cells,))
    else:
        q = np.zeros(mesh.n_cells)
    op = operator or StepOperator(mesh, damping)
    return op.system(y_n, q, config.dt if dt is None else dt, config.p)


def gmres_solve(system, x0, config):
    return gmres(
        system.matrix,
        system.rhs,
        x0=x0,
        tol=config.krylov_tol,
        restart=config.krylov_restart,
        maxiter=config.krylov_max_iters,
        precond=(1.0 / system.matrix.diagonal()) if config.jacobi else None,
    )


@dataclass(frozen=True)
class StepResult:
    field: np.ndarray
    picard_iters: int
    final_picard_residual: float
    krylov_iters_total: int
    residual_history: tuple = ()


def _l2(v, m):
    return math.sqrt(float(np.sum(np.abs(v) ** 2 * m)))


def picard_step(mesh, damping, y_n, config, dt=None, operator=None):
    """Advance one time step; returns :class:`StepResult`.

    Starts from ``y^(0) = y^n``; each sweep freezes ``q`` at the current
    iterate, solves the linear system (warm-started at the current iterate)
    and stops when the relative discrete L2 change is below ``picard_tol``.
    """
    op = operator or StepOperator(mesh, damping)
    dt = config.dt if dt is None else dt
    y_n = np.asarray(y_n, dtype=complex)
    m = mesh.areas
    y_prev = y_n
    history = []
    krylov_total = 0
    zero_q = np.zeros(mesh.n_cells)
    for k in range(1, config.picard_max_iters + 1):
        if config.nonlinearity_enabled:
            q = nonlinear_coefficient(y_prev, y_n, config.p, config.ratio_epsilon)
        else:
            q = zero_q
        system = op.system(y_n, q, dt, config.p)
        res = gmres_solve(system, y_prev, config)
        krylov_total += res.iters
        y_new = res.solution
        diff = _l2(y_new - y_prev, m)
        norm = _l2(y_new, m)
        rel = diff / norm if norm > 0 else diff
        history.append(rel)
        if diff <= config.picard_tol * norm:
            return StepResult(y_new, k, rel, krylov_total, tuple(history))
        y_prev = y_new
    raise PicardConvergenceError(
        f"Picard iteration did not reach {config.picard_tol:.1e} in "
        f"{config.picard_max_iters} sweeps (last change {history[-1]:.3e})",
        history,
    )


def sample_initial_condition(kind, mesh, **params):
    """Initial field at the cell points.

    ``example1_ic``: ``1/2 exp(-((x-1)^2 + (y-1)^2 + i (x-1) / 2))``.
    ``example3_ic``: ``exp(-(x^2 + (y-10)^2 + i x / 2))`` (also Example IV).
    ``gaussian``: ``amplitude * exp(-(|x-c|^2 / width^2 + i k.(x-c)))`` with
    keyword parameters ``amplitude``, ``center``, ``width``, ``wavevector``.
    """
    pts = mesh.points if hasattr(mesh, "points") else np.asarray(mesh, dtype=float)
    if kind == "example1_ic":
        amp, c, w, kv = 0.5, (1.0, 1.0), 1.0, (0.5, 0.0)
    elif kind == "example3_ic":
        amp, c, w, kv = 1.0, (0.0, 10.0), 1.0, (0.5, 0.0)
    elif kind == "gaussian":
        amp = params.get("amplitude", 1.0)
        c = params.get("center", (0.0, 0.0))
        w = params.get("width", 1.0)
        kv = params.get("wavevector", (0.0, 0.0))
    else:
        raise ValueError(f"unknown initial condition {kind!r}")
    dx = pts[..., 0] - c[0]
    dy = pts[..., 1] - c[1]
    return amp * np.exp(-((dx**2 + dy**2) / w**2 + 1j * (kv[0] * dx + kv[1] * dy)))


@dataclass
class SimulationResult:
    series: FunctionalSeries
    final_field: np.ndarray
    snapshots: dict = field(default_factory=dict)
    n_steps: int = 0
    picard_iters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    krylov_iters: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def time_grid(T, dt):
    """Step sizes covering ``[0, T]``: full steps plus a shortened last one if needed."""
    if T < dt * (1 - 1e-12):
        raise ValueError(f"final time {T} is shorter than one step {dt}")
    ratio = T / dt
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = math.ceil(ratio)
    steps = np.full(n, dt)
    steps[-1] = T - (n - 1) * dt
    return steps


def run_simulation(mesh, damping, y0, config, T, record_every=1, snapshot_every=None):
    """March from ``y0`` to time ``T`` recording functionals.

    Samples are taken at step 0, every ``record_every`` steps and at the
    final step; with ``snapshot_every`` the field itself is stored as well.
    Step failures are re-raised as :class:`StepError` carrying the index.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    op = StepOperator(mesh, damping)
    steps = time_grid(T, config.dt)
    n_steps = len(steps)
    y = np.array(y0, dtype=complex)
    if y.shape != (mesh.n_cells,):
        raise MeshMismatchError("initial field does not match the mesh")
    series = FunctionalSeries([sample_functionals(y, mesh, config.p, 0.0, 0)])
    snapshots = {}
    if snapshot_every:
        snapshots[0] = (0.0, y.copy())
    picard_iters = np.zeros(n_steps, dtype=int)
    krylov_iters = np.zeros(n_steps, dtype=int)
    for n, dt in enumerate(steps, start=1):
        try:
            res = picard_step(mesh, None, y, config, dt=dt, operator=op)
        except (PicardConvergenceError, KrylovConvergenceError) as exc:
            raise StepError(n, exc) from exc
        y = res.field
        picard_iters[n - 1] = res.picard_iters
        krylov_iters[n - 1] = res.krylov_iters_total
        t = T if n == n_steps else n * config.dt
        if n % record_every == 0 or n == n_steps:
            series.append(
                sample_functionals(y, mesh, config.p, t, n, res.picard_iters, res.krylov_iters_total)
            )
        if snapshot_every and (n % snapshot_every == 0 or n == n_steps):
            snapshots[n] = (t, y.copy())
        if n % 1000 == 0:
            log.debug("step %d/%d t=%.4f picard=%d krylov=%d",
                      n, n_steps, t, res.picard_iters, res.krylov_iters_total)
    return SimulationResult(series, y, snapshots, n_steps, picard_iters, krylov_iters)
