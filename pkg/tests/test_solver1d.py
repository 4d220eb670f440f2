import numpy as np
import pytest

from thermovisc.materials import CERAMIC, Constant, MaterialParams, PowerLaw
from thermovisc.solver1d import (
    Excitation,
    InitialConditions,
    OutputSpec,
    SimConfig,
    SimState,
    build_grid,
    default_excitation,
    excitation_velocity,
    initial_state,
    run,
    run_with_trajectory,
    step,
)


def make_config(**kw):
    defaults = dict(
        material=CERAMIC,
        law=Constant(),
        L=1e-3,
        N=101,
        steps=100,
        excitation=default_excitation(101),
    )
    defaults.update(kw)
    return SimConfig(**defaults)


# ---------------------------------------------------------------------------
# configuration and grid


def test_grid_reference_arithmetic():
    grid = build_grid(make_config())
    assert grid.dx == pytest.approx(1e-5, rel=1e-12)
    assert grid.dt == pytest.approx(1e-9, rel=1e-12)


def test_grid_unit_case():
    mat = MaterialParams(C0=1.0, rho=1.0, tau=1.0, c_heat=1.0, lambda_th=1.0)
    cfg = SimConfig(
        material=mat, law=Constant(), L=4.0, N=5, steps=1,
        excitation=Excitation(frequency=1.0, amplitude=0.0, node=2),
        stability_factor=1.0,
    )
    grid = build_grid(cfg)
    assert grid.dx == 1.0
    assert grid.dt == 1.0


def test_full_run_duration_is_thousand_periods():
    cfg = make_config(steps=500_000)
    grid = build_grid(cfg)
    total = cfg.steps * grid.dt
    assert total == pytest.approx(5e-4, rel=1e-12)
    assert total * cfg.excitation.frequency == pytest.approx(1000.0, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        make_config(N=4)
    with pytest.raises(ValueError):
        make_config(steps=0)
    with pytest.raises(ValueError):
        make_config(stability_factor=0.5)
    with pytest.raises(ValueError):
        make_config(excitation=Excitation(frequency=2e6, amplitude=1e-3, node=0))
    with pytest.raises(ValueError):
        make_config(excitation=Excitation(frequency=2e6, amplitude=1e-3, node=100))
    with pytest.raises(ValueError):
        Excitation(frequency=2e6, amplitude=1e-3, node=50, mode="weird")


def test_default_probes_fill_in():
    cfg = make_config()
    assert cfg.output.probes == (25, 50)


# ---------------------------------------------------------------------------
# excitation signal


def test_excitation_zero_at_start():
    assert excitation_velocity(0.0, make_config()) == 0.0


def test_excitation_quarter_period_peak():
    cfg = make_config()
    f = cfg.excitation.frequency
    assert excitation_velocity(0.25 / f, cfg) == pytest.approx(
        cfg.excitation.amplitude, rel=1e-12
    )


def test_excitation_half_period_node():
    cfg = make_config()
    val = excitation_velocity(0.25e-6, cfg)  # half period of 2 MHz
    assert abs(val) <= 1e-9 * cfg.excitation.amplitude


# ---------------------------------------------------------------------------
# single step


def test_step_zero_state_is_fixed_point():
    cfg = make_config(excitation=Excitation(frequency=2e6, amplitude=0.0, node=50))
    grid = build_grid(cfg)
    state = initial_state(cfg, grid)
    new = step(state, grid, cfg)
    assert np.array_equal(new.u, np.zeros(cfg.N))
    assert np.array_equal(new.v, np.zeros(cfg.N))
    assert np.array_equal(new.theta, np.zeros(cfg.N))


def test_step_heat_mode_decay_oracle():
    # u = v = 0 suppresses the source; a sine half-wave in theta is an exact
    # eigenvector of the discrete Dirichlet laplacian
    cfg = make_config(excitation=Excitation(frequency=2e6, amplitude=0.0, node=50))
    grid = build_grid(cfg)
    D = CERAMIC.lambda_th / (CERAMIC.c_heat * CERAMIC.rho)
    k_disc_sq = 4.0 / grid.dx**2 * np.sin(np.pi * grid.dx / (2.0 * cfg.L)) ** 2
    state = initial_state(cfg, grid)
    state.theta[:] = np.sin(np.pi * grid.x / cfg.L)
    state.theta[0] = state.theta[-1] = 0.0

    one = step(state, grid, cfg)
    ratio = one.theta[50] / state.theta[50]
    per_step_discrete = 1.0 - grid.dt * D * k_disc_sq
    per_step_continuum = np.exp(-D * (np.pi / cfg.L) ** 2 * grid.dt)
    assert ratio == pytest.approx(per_step_discrete, rel=1e-12)
    assert abs(ratio - per_step_continuum) <= 1e-12

    M = 5000
    cur = state
    for _ in range(M):
        cur = step(cur, grid, cfg)
    ratio_m = cur.theta[50] / state.theta[50]
    assert ratio_m == pytest.approx(per_step_discrete**M, rel=1e-10)
    assert np.log(ratio_m) == pytest.approx(
        -D * (np.pi / cfg.L) ** 2 * grid.dt * M, rel=2e-3
    )


def test_step_velocity_update_matches_loop_oracle():
    cfg = make_config(excitation=Excitation(frequency=2e6, amplitude=0.0, node=50))
    grid = build_grid(cfg)
    state = initial_state(cfg, grid)
    state.u[:] = 1e-9 * np.sin(np.pi * grid.x / cfg.L)
    state.u[0] = state.u[-1] = 0.0

    new = step(state, grid, cfg)
    expected_v = np.zeros(cfg.N)
    for i in range(1, cfg.N - 1):
        lap = (state.u[i + 1] - 2.0 * state.u[i] + state.u[i - 1]) / grid.dx**2
        expected_v[i] = grid.dt * CERAMIC.C0 / CERAMIC.rho * lap
    assert new.v == pytest.approx(expected_v, rel=1e-12)
    assert new.u == pytest.approx(state.u + grid.dt * new.v, rel=1e-14)
    assert np.array_equal(new.theta, np.zeros(cfg.N))


def test_step_pin_mode_overwrites_velocity():
    cfg = make_config(
        excitation=Excitation(frequency=2e6, amplitude=1e-3, node=50, mode="pin")
    )
    grid = build_grid(cfg)
    state = initial_state(cfg, grid)
    new = step(state, grid, cfg)
    assert new.v[50] == pytest.approx(
        1e-3 * np.sin(2.0 * np.pi * 2e6 * grid.dt), rel=1e-12
    )


# ---------------------------------------------------------------------------
# full runs


def test_single_step_run_has_series():
    res = run(make_config(steps=1))
    assert len(res.series.t) >= 1
    assert res.status.completed


def test_series_times_strictly_increasing():
    res = run(make_config(steps=2000))
    assert np.all(np.diff(res.series.t) > 0)


def test_stability_smoke(smoke_constant_result):
    cfg, res = smoke_constant_result
    assert res.status.completed
    for snap in res.snapshots:
        assert np.all(np.isfinite(snap.u))
        assert np.all(np.isfinite(snap.v))
        assert np.all(np.isfinite(snap.theta))
        assert np.all(snap.theta >= 0.0)
    assert np.all(np.isfinite(res.series.mean_theta))


def test_boundary_values_exactly_zero():
    seen = []

    def sink(state):
        seen.append(
            (state.u[0], state.u[-1], state.v[0], state.v[-1], state.theta[0], state.theta[-1])
        )

    run(make_config(steps=500), sink=sink)
    arr = np.asarray(seen)
    assert np.array_equal(arr, np.zeros_like(arr))


def test_zero_input_run_stays_zero():
    cfg = make_config(
        steps=500, excitation=Excitation(frequency=2e6, amplitude=0.0, node=50)
    )
    res = run(cfg)
    for snap in res.snapshots:
        assert np.array_equal(snap.u, np.zeros(cfg.N))
        assert np.array_equal(snap.v, np.zeros(cfg.N))
        assert np.array_equal(snap.theta, np.zeros(cfg.N))


def test_theta_nonnegative_throughout():
    hits = []

    def sink(state):
        hits.append(float(state.theta.min()))

    run(make_config(steps=2000, law=PowerLaw(k=1e7, p=1.0)), sink=sink)
    assert min(hits) >= 0.0


def test_extreme_power_law_overflows():
    cfg = make_config(steps=50_000, law=PowerLaw(k=1e11, p=1.0))
    res = run(cfg)
    assert res.status.kind == "overflow"
    assert res.status.step is not None and res.status.step < 50_000
    # the recorded tail must carry the overflow evidence
    last = res.snapshots[-1]
    bad = ~np.isfinite(last.theta) | (np.abs(last.theta) > cfg.overflow_limit)
    bad |= ~np.isfinite(last.v) | (np.abs(last.v) > cfg.overflow_limit)
    assert bad.any()


def test_stability_violation_status():
    # tiny retardation time moves the scheme's stability edge to the flag
    # threshold c_ph(C(theta)) = dx/dt, so slow heating can cross the flag
    # without overflowing inside the run length
    mat = MaterialParams(C0=CERAMIC.C0, rho=CERAMIC.rho, tau=1e-12,
                         c_heat=CERAMIC.c_heat, lambda_th=CERAMIC.lambda_th)
    cfg = SimConfig(
        material=mat, law=PowerLaw(k=3e5, p=1.0), L=1e-3, N=101, steps=6200,
        excitation=default_excitation(101, mode="pin", amplitude=0.5),
        stability_factor=1.2,
    )
    res = run(cfg)
    assert res.status.kind == "stability-violation"
    assert 0 < res.status.step < 6200


def test_energy_dissipation_ringdown(ringdown_energies):
    cfg, res, energies, _elapsed = ringdown_energies
    assert res.status.completed
    E0 = energies[0]
    dE = np.diff(energies)
    assert dE.max() <= 1e-3 * E0
    # strictly decreasing over every 100-step window while motion persists
    windows = energies[::100]
    active = windows > 1e-3 * E0
    dw = np.diff(windows)
    assert np.all(dw[active[:-1]] < 0)


def test_grid_refinement_consistency():
    coarse = make_config(steps=10_000, output=OutputSpec(series_stride=10, snapshot_stride=10_000))
    fine = make_config(
        N=201, steps=20_000, output=OutputSpec(series_stride=20, snapshot_stride=20_000),
        excitation=default_excitation(201),
    )
    res_c = run(coarse)
    res_f = run(fine)
    mt_c = res_c.series.mean_theta[-1]
    mt_f = res_f.series.mean_theta[-1]
    assert res_c.series.t[-1] == pytest.approx(res_f.series.t[-1], rel=1e-12)
    assert abs(mt_f - mt_c) / mt_c < 0.05


def test_run_deterministic_bitwise():
    cfg = make_config(steps=3000, law=PowerLaw(k=1e7, p=1.0))
    r1 = run(cfg)
    r2 = run(cfg)
    assert np.array_equal(r1.series.mean_theta, r2.series.mean_theta)
    assert np.array_equal(r1.series.probe_v, r2.series.probe_v)
    assert np.array_equal(r1.snapshots[-1].theta, r2.snapshots[-1].theta)


def test_trajectory_recorder_roundtrip():
    cfg = make_config(steps=50)
    res, traj = run_with_trajectory(cfg)
    assert traj.levels == 51
    assert traj.t[0] == 0.0
    assert np.all(np.diff(traj.t) > 0)
    # final level must match the final snapshot
    assert np.array_equal(traj.theta[-1], res.snapshots[-1].theta)
    assert np.array_equal(traj.u[-1], res.snapshots[-1].u)
