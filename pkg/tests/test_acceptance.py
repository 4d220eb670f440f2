"""Acceptance gate: one test per criterion, at the stated tolerances.

Each test prints a single PASS line (visible with `pytest -s` or in the
captured output); a failure of any assert is the corresponding FAIL.
"""

import time

import numpy as np
import pytest

from thermovisc import diagnostics as dg
from thermovisc import harness, tensor
from thermovisc.materials import CERAMIC, Constant, Exponential, PowerLaw, phase_velocity
from thermovisc.solver1d import build_grid, run, run_with_trajectory


def _ok(n, text):
    print(f"ACCEPTANCE PASS [{n}] {text}")


# ---------------------------------------------------------------------------


def test_criterion_1_phase_velocity_and_resonance():
    c_ph = phase_velocity(CERAMIC, CERAMIC.C0)
    assert c_ph == pytest.approx(4000.0, rel=1e-12)
    L = 1e-3
    f_res = c_ph / (2.0 * L)
    assert f_res == pytest.approx(2e6, rel=1e-12)
    _ok(1, f"c_ph = {c_ph} m/s, f_res = {f_res:.6g} Hz")


def test_criterion_2_stability_smoke():
    config = harness._reference_config(Constant(), steps=10_000)
    t0 = time.perf_counter()
    result = run(config)
    elapsed = time.perf_counter() - t0
    assert result.status.completed
    for snap in result.snapshots:
        assert np.all(np.isfinite(snap.u))
        assert np.all(np.isfinite(snap.v))
        assert np.all(np.isfinite(snap.theta))
        assert np.all(snap.theta >= 0.0)
    assert elapsed < 1.0
    _ok(2, f"constant law, 1e4 steps completed in {elapsed:.2f} s, theta >= 0")


def test_criterion_3_resonant_growth():
    config = harness._reference_config(Constant(), steps=100_000)
    result = run(config)
    assert result.status.completed
    env = dg.envelope(result.series.probe_v[:, 0], harness.period_samples(config))
    assert len(env) >= 200
    env = env[:200]
    running_max = env[0]
    for value in env[1:]:
        assert value >= 0.99 * running_max  # nondecreasing up to 1% window jitter
        running_max = max(running_max, value)
    assert env[-1] > 10.0 * env[0]  # it actually grew
    _ok(3, f"envelope nondecreasing over 200 periods ({env[0]:.2e} -> {env[-1]:.2e} m/s)")


def test_criterion_4_energy_dissipation(ringdown_energies):
    _cfg, result, energies, elapsed = ringdown_energies
    assert result.status.completed
    E0 = energies[0]
    per_step = np.diff(energies)
    assert per_step.max() <= 1e-3 * E0
    assert energies[-1] <= 0.5 * E0
    assert elapsed < 5.0
    _ok(4, f"ring-down E/E0 = {energies[-1] / E0:.2e} after 5e4 steps in {elapsed:.1f} s, "
           f"max per-step rise {per_step.max() / E0:.1e} E0")


def test_criterion_5_heat_balance(driven_trajectory):
    config, _result, traj = driven_trajectory
    grid = build_grid(config)
    report = dg.heat_balance_residual(traj, config.material, config.law, grid)
    assert not np.any(report.clamp_corrections > 0)
    assert report.max_relative <= 1e-12
    _ok(5, f"1e4-step heat balance: max relative residual {report.max_relative:.2e}")


def test_criterion_6_tensor_suite():
    rng = np.random.default_rng(60)
    for n in (2, 3):
        m = rng.standard_normal((n * n, n * n))
        beta = (m @ m.T + 0.5 * np.eye(n * n)).reshape(n, n, n, n)
        root = tensor.tensor_sqrt(beta)
        err = np.max(np.abs(tensor.compose(root, root) - beta))
        assert err <= 1e-10 * np.max(np.abs(beta))
        norm = tensor.quadform_extremes(beta)[1]
        for _ in range(100):
            W = rng.standard_normal((n, n))
            lhs = tensor.inner(tensor.contract(beta, W), W)
            rw = tensor.contract(root, W)
            assert abs(lhs - tensor.inner(rw, rw)) <= 1e-9 * norm * tensor.inner(W, W)
    for n in (2, 3):
        shat = tensor.symmetrizer(n)
        for _ in range(50):
            X = rng.standard_normal((n, n))
            assert np.array_equal(tensor.contract(shat, X), tensor.sym(X))
    from helpers import weighted_sym_grad_identity_error

    errs = [weighted_sym_grad_identity_error(N) for N in (17, 33, 65)]
    assert errs[0] > errs[1] > errs[2]
    _ok(6, f"sqrt/pairing/symmetrizer pass; identity error {errs[0]:.1e} -> {errs[2]:.1e}")


def test_criterion_7_generalized_solution_inequalities(ringdown_trajectory):
    config, _result, traj = ringdown_trajectory
    grid = build_grid(config)
    theta_max = max(float(traj.theta.max()), 1e-30)
    consts = dg.wf_constants_for(config.law, config.material, theta_max)
    # the admissibility constraints hold strictly
    assert consts.kappa / consts.a < consts.eta2_gamma
    assert (consts.kappa / consts.a) * consts.eta1_Gamma > consts.lam
    assert consts.kappa * (consts.a + 2 * consts.mu) / 4 * consts.eta1_gamma > consts.a**2 / 4
    tests = dg.default_test_functions(grid, t_end=float(traj.t[-1]))
    wt = dg.wt_residual(traj, tests, config.material, config.law, grid)
    wf = dg.wf_residual(traj, consts, tests, config.material, config.law, grid)
    assert wt.scale > 0 and wf.scale > 0
    assert abs(wt.relative_residual) <= 0.05
    assert abs(wf.relative_slack) <= 0.05
    _ok(7, f"wt rel {wt.relative_residual:+.1e}, wf rel slack {wf.relative_slack:+.1e}, "
           f"constraints hold")


def test_criterion_8_fig2_dynamics(tmp_path):
    # reduced scale: 5e4 steps
    config = harness.preset_config("fig2-power-k1e7-p1", steps=50_000)
    result = run(config)
    assert result.status.completed
    window = harness.period_samples(config)
    env = dg.envelope(result.series.probe_v[:, 0], window)
    trend = harness.envelope_trend(env)
    assert trend == "beating-then-falling"
    per_period = result.series.mean_theta[: len(result.series.mean_theta) // window * window]
    per_period = per_period.reshape(-1, window).mean(axis=1)
    assert np.all(np.diff(per_period) > 0)  # mean temperature strictly increasing

    # full preset: complete shape within the runtime budget
    full = harness.preset_config("fig2-power-k1e7-p1")
    t0 = time.perf_counter()
    full_result = run(full)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    assert full_result.status.completed
    env_full = dg.envelope(full_result.series.probe_v[:, 0], window)
    assert harness.envelope_trend(env_full) == "beating-then-falling"
    mean_full = full_result.series.mean_theta
    per_full = mean_full[: len(mean_full) // window * window].reshape(-1, window).mean(axis=1)
    smooth = np.convolve(per_full, np.ones(25) / 25.0, mode="valid")
    d2 = np.diff(smooth, 2)
    peak = int(env_full.argmax())
    early = d2[: max(10, peak // 2)]
    late = d2[len(d2) // 2 :]
    assert early.mean() > 0  # superlinear heating while resonance builds
    assert late.mean() < 0   # sublinear after detuning
    assert np.all(np.diff(per_full) > 0)
    _ok(8, f"reduced run {trend}; full 5e5-step run in {elapsed:.1f} s, "
           f"early d2 {early.mean():.2e} > 0 > late d2 {late.mean():.2e}")


def test_criterion_9_hot_spot_phenomenology(tmp_path):
    base = harness._reference_config(PowerLaw(k=1e7, p=1.0), steps=10_000)
    spec = harness.SweepSpec(
        base=base, law_family="power", axis1=(1e6, 1e7), axis2=(1.0, 2.0),
        reduced_steps=10_000,
    )
    records = harness.sweep(spec, str(tmp_path / "power"))
    assert len(records) == 4
    for rec in records:
        assert rec.classification.kind == "no-hot-spots"

    steep = harness._reference_config(Exponential(alpha=5.0, b=1e9), steps=20_000)
    result = run(steep)
    cls = harness.classify(result)
    assert cls.kind in ("hot-spots", "overflow")
    _ok(9, f"p in {{1,2}} sweep all no-hot-spots; exponential alpha=5 b=1e9 -> {cls.kind}")
