import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsfv.damping import preset, sample_damping
from nlsfv.errors import MeshMismatchError, PicardConvergenceError, StepError
from nlsfv.functionals import mass_E0
from nlsfv.solver import (
    SchemeConfig,
    StepOperator,
    assemble_step_system,
    gmres_solve,
    nonlinear_coefficient,
    picard_step,
    run_simulation,
    sample_initial_condition,
    time_grid,
)


def amplification(tau, m, dt, a):
    return (tau / 2 + 1j * m * (1 / dt - a / 2)) / (-tau / 2 + 1j * m * (1 / dt + a / 2))


# nonlinear coefficient

def test_dfp_examples():
    assert nonlinear_coefficient(2.0, 1.0, 2) == 5.0
    assert nonlinear_coefficient(3 + 4j, 1j, 1) == 1.0
    z = 0.3 - 0.7j
    s = abs(z) ** 2
    assert nonlinear_coefficient(z, z, 2) == pytest.approx(2 * s, rel=1e-15)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_dfp_equal_moduli(p):
    z = 1.3 * np.exp(0.4j)
    s = abs(z) ** 2
    expected = {1.0: 1.0, 1.5: 1.5 * math.sqrt(s), 2.0: 2 * s, 3.0: 3 * s**2}[p]
    assert nonlinear_coefficient(z, z * 1j, p) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("p", [0.75, 1.5, 3.0])
def test_dfp_continuity_across_switch(p):
    eps = 1e-12
    s0 = 1.7
    k = np.linspace(0.5, 1.5, 201)
    # k < 1 lands on the limit branch, k > 1 on the ratio branch
    s1 = s0 * (1 + k * eps)
    vals = nonlinear_coefficient(np.sqrt(s1), np.full_like(s1, math.sqrt(s0)), p, eps)
    limit = p * s0 ** (p - 1)
    assert np.max(np.abs(vals - limit)) / limit <= 1e-8
    # and far from the switch the direct ratio is used
    big = nonlinear_coefficient(2.0, 1.0, p, eps)
    assert big == pytest.approx((4**p - 1) / 3, rel=1e-14)


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10),
       st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]))
def test_dfp_nonnegative_and_symmetric(a, b, p):
    q = nonlinear_coefficient(a, b, p)
    assert q >= 0 and math.isfinite(q)
    assert q == pytest.approx(nonlinear_coefficient(b, a, p), rel=1e-12)


def test_dfp_zero():
    assert nonlinear_coefficient(0, 0, 3) == 0
    assert nonlinear_coefficient(0, 0, 0.5) == 0
    assert nonlinear_coefficient(0, 2, 3) == pytest.approx(4**3 / 4)


# assembly

def test_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(dt=0)
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.1, p=-1)
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.1, picard_tol=1.5)
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.1, krylov_restart=0)


def test_matrix_complex_symmetric(two_cells, five_cells):
    rng = np.random.default_rng(2)
    for mesh in (two_cells, five_cells):
        n = mesh.n_cells
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        q = rng.random(n)
        sysm = assemble_step_system(mesh, rng.random(n), y, q, SchemeConfig(dt=0.1))
        A = sysm.matrix.toarray()
        np.testing.assert_array_equal(A, A.T)
        assert (np.diag(A) != 0).all()
        # sparsity follows face adjacency
        adj = np.eye(n, dtype=bool)
        for k, l in mesh.face_cells[mesh.interior]:
            adj[k, l] = adj[l, k] = True
        assert not A[~adj].any()


def test_assembly_residual_of_scheme(five_cells):
    """The solved step satisfies the per-cell relation written out by hand."""
    rng = np.random.default_rng(4)
    mesh = five_cells
    n = mesh.n_cells
    y0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = rng.random(n)
    q = rng.random(n)
    cfg = SchemeConfig(dt=0.05, p=1.5)
    sysm = assemble_step_system(mesh, a, y0, q, cfg)
    y1 = gmres_solve(sysm, y0, cfg).solution
    mid = 0.5 * (y1 + y0)
    flux = np.zeros(n, complex)
    for (k, l), t in zip(mesh.face_cells, mesh.face_tau):
        if l >= 0:
            flux[k] += t * (mid[l] - mid[k])
            flux[l] += t * (mid[k] - mid[l])
        else:
            flux[k] -= t * mid[k]
    m = mesh.areas
    res = 1j * m * (y1 - y0) / cfg.dt + flux - m / (2 * cfg.p) * q * (y1 + y0) + 1j * m * a * (y1 + y0) / 2
    assert np.abs(res).max() <= 1e-9 * np.abs(1j * m * y0 / cfg.dt).max()


def test_dimension_mismatch(two_cells):
    with pytest.raises(MeshMismatchError):
        assemble_step_system(two_cells, None, np.zeros(3), 0.0, SchemeConfig(dt=0.1))
    with pytest.raises(MeshMismatchError):
        StepOperator(two_cells, np.zeros(5))


# single cell amplification

@pytest.mark.parametrize("a0", [0.0, 0.3, 4.0])
@pytest.mark.parametrize("dt", [2.0**-8, 0.1, 1.0])
def test_single_cell_amplification(one_cell, a0, dt):
    cfg = SchemeConfig(dt=dt, nonlinearity_enabled=False)
    y0 = np.array([0.8 - 0.3j])
    res = picard_step(one_cell, np.array([a0]), y0, cfg)
    g = amplification(one_cell.face_tau.sum(), 1.0, dt, a0)
    assert abs(res.field[0] / y0[0] - g) <= 1e-12
    if a0 == 0:
        assert abs(g) == pytest.approx(1.0, abs=1e-15)
    else:
        assert abs(g) < 1


# Picard

def test_zero_field_one_iteration(disk_mesh_small):
    res = picard_step(disk_mesh_small, None, np.zeros(disk_mesh_small.n_cells, complex), SchemeConfig(dt=0.1))
    assert res.picard_iters == 1 and not res.field.any()


def test_p1_two_iterations(five_cells):
    rng = np.random.default_rng(0)
    y = rng.normal(size=5) + 1j * rng.normal(size=5)
    res = picard_step(five_cells, np.full(5, 0.2), y, SchemeConfig(dt=0.1, p=1.0))
    assert res.picard_iters == 2
    assert res.final_picard_residual <= 1e-9


def test_example1_single_step(disk_mesh_small):
    mesh = disk_mesh_small
    y0 = sample_initial_condition("example1_ic", mesh)
    damp = sample_damping(preset("example1"), mesh)
    res = picard_step(mesh, damp, y0, SchemeConfig(dt=2.0**-8))
    assert res.picard_iters <= 20
    assert res.final_picard_residual <= 1e-6
    assert mass_E0(res.field, mesh) <= mass_E0(y0, mesh) * (1 + 1e-10)


def test_picard_failure_reported(disk_mesh_small):
    mesh = disk_mesh_small
    y0 = 5 * sample_initial_condition("example1_ic", mesh)
    cfg = SchemeConfig(dt=1.0, p=3.0, picard_max_iters=2, picard_tol=1e-12)
    with pytest.raises(PicardConvergenceError) as info:
        picard_step(mesh, None, y0, cfg)
    assert len(info.value.history) == 2
    with pytest.raises(StepError) as info:
        run_simulation(mesh, None, y0, cfg, T=2.0)
    assert info.value.step == 1


# initial conditions

def test_initial_condition_values():
    pts = np.array([[1.0, 1.0], [2.0, 1.0], [0.0, 10.0]])
    y1 = sample_initial_condition("example1_ic", pts)
    assert y1[0] == 0.5
    assert abs(y1[1]) == pytest.approx(0.5 * math.exp(-1), rel=1e-15)
    assert sample_initial_condition("example3_ic", pts)[2] == 1
    g = sample_initial_condition("gaussian", pts, amplitude=2, center=(1, 1))
    assert g[0] == 2
    with pytest.raises(ValueError):
        sample_initial_condition("nope", pts)


# time marching

def test_time_grid():
    np.testing.assert_allclose(time_grid(1.0, 0.25), [0.25] * 4)
    g = time_grid(1.0, 0.3)
    assert len(g) == 4 and g[-1] == pytest.approx(0.1)
    with pytest.raises(ValueError):
        time_grid(0.1, 0.3)


def test_undamped_conservation(disk_mesh_small):
    mesh = disk_mesh_small
    cfg = SchemeConfig(dt=2.0**-6)
    y0 = sample_initial_condition("example1_ic", mesh)
    sim = run_simulation(mesh, None, y0, cfg, T=50 * cfg.dt)
    bound = 50 * (cfg.picard_tol + cfg.krylov_tol) * 10
    E0, E1 = sim.series.E0, sim.series.E1
    assert np.max(np.abs(E0 - E0[0])) / E0[0] <= bound
    assert np.max(np.abs(E1 - E1[0])) / E1[0] <= bound
    assert len(sim.series) == 51 and sim.n_steps == 50


def test_mass_drift_tracks_krylov_tolerance(disk_mesh_small):
    mesh = disk_mesh_small
    y0 = sample_initial_condition("example1_ic", mesh)
    drifts = []
    for tol in (1e-6, 1e-8):
        cfg = SchemeConfig(dt=2.0**-6, krylov_tol=tol, picard_tol=1e-10)
        E0 = run_simulation(mesh, None, y0, cfg, T=20 * cfg.dt).series.E0
        drifts.append(np.max(np.abs(E0 - E0[0])) / E0[0])
    assert drifts[1] <= 0.5 * drifts[0]


def test_damped_mass_monotone_and_recording(disk_mesh_small):
    mesh = disk_mesh_small
    cfg = SchemeConfig(dt=2.0**-5)
    damp = sample_damping(preset("constant:0.5"), mesh)
    y0 = sample_initial_condition("example1_ic", mesh)
    sim = run_simulation(mesh, damp, y0, cfg, T=31 * cfg.dt, record_every=4, snapshot_every=10)
    steps = sim.series.column("step")
    assert steps[0] == 0 and steps[-1] == 31 and list(steps[1:4]) == [4, 8, 12]
    E0 = sim.series.E0
    assert (np.diff(E0) <= (cfg.picard_tol + cfg.krylov_tol) * E0[0]).all()
    assert E0[-1] < E0[0]
    assert sorted(sim.snapshots) == [0, 10, 20, 30, 31]
    assert sim.series.t[-1] == pytest.approx(31 * cfg.dt)


@settings(max_examples=5, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_gauge_invariance(theta):
    mesh = _gauge_mesh()
    cfg = SchemeConfig(dt=2.0**-5, picard_tol=1e-12, krylov_tol=1e-13)
    damp = sample_damping(preset("example1"), mesh)
    y0 = sample_initial_condition("example1_ic", mesh)
    a = run_simulation(mesh, damp, y0, cfg, T=5 * cfg.dt, snapshot_every=1)
    b = run_simulation(mesh, damp, np.exp(1j * theta) * y0, cfg, T=5 * cfg.dt, snapshot_every=1)
    for n in a.snapshots:
        ya, yb = a.snapshots[n][1], b.snapshots[n][1]
        assert np.abs(yb - np.exp(1j * theta) * ya).max() <= 1e-10
    np.testing.assert_allclose(a.series.E1, b.series.E1, rtol=1e-12)


_GAUGE = {}


def _gauge_mesh():
    from nlsfv.mesh import DomainSpec, generate_mesh

    if "m" not in _GAUGE:
        _GAUGE["m"] = generate_mesh(DomainSpec.disk(10), 120, seed=1)
    return _GAUGE["m"]
