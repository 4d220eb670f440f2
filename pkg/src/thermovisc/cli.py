"""Command-line front door.

    thermovisc run     --preset smoke --out results/
    thermovisc run     --config my.ini --set law.k=2e7 --steps 50000
    thermovisc sweep   --config sweep.ini --out results/ --parallel 4
    thermovisc diagnose --preset smoke --out results/
    thermovisc presets

Every command is a thin adapter over the library; all output is CSV/JSON.
The default output directory comes from $THERMOVISC_OUT (falling back to
./thermovisc-out).  Exit codes: 0 success, 1 configuration error, 2 the
run overflowed (run command only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import diagnostics, harness
from .config import (
    ConfigError,
    apply_overrides,
    build_sim_config,
    config_to_flat,
    parse_quantity,
    read_config_file,
    read_sweep_section,
)
from .solver1d import build_grid, run, TrajectoryRecorder

DEFAULT_OUT = "thermovisc-out"

_PRESET_NOTES = {
    "smoke": "power law k=1e7 p=1, 1e4 steps (fast shakedown)",
    "fig2-power-k1e7-p1": "power law k=1e7 p=1, 5e5 steps (mean-theta + envelope archetype)",
    "fig3a-power-weak": "power law k=1e6 p=1, smooth boundary-hump field",
    "fig3b-power-steep": "power law k=3e22 p=3, destabilizing regime",
    "fig3c-power-mixed": "power law k=1e7 p=1.5, intermediate regime",
    "fig3d-power-p2": "power law k=1e7 p=2, smooth field (p <= 2)",
    "fig3e-exp-steep": "exponential alpha=4 b=1e9, destabilizing regime",
    "fig3f-exp-gentle": "exponential alpha=1.5 b=1e8, smooth convergent field",
}


def _out_dir(args) -> str:
    return args.out or os.environ.get("THERMOVISC_OUT") or DEFAULT_OUT


def _resolve_config(args):
    """SimConfig plus a run id from --preset or --config (+ overrides)."""
    if bool(args.preset) == bool(args.config):
        raise ConfigError("exactly one of --preset or --config is required")
    if args.preset:
        try:
            config = harness.preset_config(args.preset, steps=args.steps)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc
        flat = config_to_flat(config)
        flat = apply_overrides(flat, args.set or ())
        config = build_sim_config(flat)
        return config, args.preset
    flat = apply_overrides(read_config_file(args.config), args.set or ())
    if args.steps is not None:
        flat["run.steps"] = args.steps
    config = build_sim_config(flat)
    run_id = os.path.splitext(os.path.basename(args.config))[0]
    return config, run_id


def _cmd_run(args) -> int:
    config, run_id = _resolve_config(args)
    record = harness.execute_run(config, _out_dir(args), run_id)
    print(
        f"{record.run_id}: {record.status_kind}"
        + (f" at step {record.status_step}" if record.status_step is not None else "")
        + f", classification {record.classification.kind}"
        f" ({record.classification.spot_count} spots)"
        f", mean theta {record.final_mean_theta:.4e} K"
        f", envelope {record.envelope_trend}; artifacts in {record.run_dir}"
    )
    return 2 if record.status_kind == "overflow" else 0


def _cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config with a [sweep] section")
    sweep_raw = read_sweep_section(args.config)
    flat = apply_overrides(read_config_file(args.config), args.set or ())
    flat.pop("sweep.law_family", None)
    base_flat = {k: v for k, v in flat.items() if not k.startswith("sweep.")}
    base = build_sim_config(base_flat)
    try:
        law_family = sweep_raw["law_family"].strip().lower()
        axis1 = tuple(parse_quantity(s) for s in sweep_raw["axis1"].split(","))
        axis2 = tuple(parse_quantity(s) for s in sweep_raw["axis2"].split(","))
    except KeyError as exc:
        raise ConfigError(f"[sweep] section is missing {exc.args[0]!r}") from exc
    reduced = sweep_raw.get("reduced_steps")
    spec = harness.SweepSpec(
        base=base,
        law_family=law_family,
        axis1=axis1,
        axis2=axis2,
        reduced_steps=int(parse_quantity(reduced)) if reduced else args.steps,
        parallelism=args.parallel or int(sweep_raw.get("parallelism", 1)),
    )
    records = harness.sweep(spec, _out_dir(args))
    for rec in records:
        print(f"{rec.run_id}: {rec.status_kind}, {rec.classification.kind}"
              f" ({rec.classification.spot_count} spots)")
    print(f"index written to {os.path.join(_out_dir(args), 'index.csv')}")
    return 0


def _cmd_diagnose(args) -> int:
    config, run_id = _resolve_config(args)
    if args.steps is None and config.steps > 20_000:
        # stride-1 trajectories are dense; cap the diagnostic window
        config = replace(config, steps=20_000)
    recorder = TrajectoryRecorder(config)
    result = run(config, sink=recorder)
    traj = recorder.build()
    grid = build_grid(config)

    hb = diagnostics.heat_balance_residual(traj, config.material, config.law, grid)
    tests = diagnostics.default_test_functions(grid, t_end=float(traj.t[-1]))
    theta_max = float(traj.theta.max())
    consts = diagnostics.wf_constants_for(config.law, config.material, max(theta_max, 1e-30))
    wt = diagnostics.wt_residual(traj, tests, config.material, config.law, grid)
    wf = diagnostics.wf_residual(traj, consts, tests, config.material, config.law, grid)

    payload = {
        "run_id": run_id,
        "steps": int(traj.levels - 1),
        "status": result.status.kind,
        "heat_balance.max_relative_residual": hb.max_relative,
        "heat_balance.accumulated_drift": hb.accumulated_drift,
        "heat_balance.total_clamp_correction": float(np.sum(hb.clamp_corrections)),
        "wt.residual": wt.residual,
        "wt.relative_residual": wt.relative_residual,
        "wf.lhs": wf.lhs,
        "wf.rhs": wf.rhs,
        "wf.slack": wf.slack,
        "wf.relative_slack": wf.relative_slack,
        "wf.kappa": consts.kappa,
        "wf.lam": consts.lam,
        "wf.mu": consts.mu,
    }
    if config.excitation.amplitude != 0.0:
        payload["wf.note"] = (
            "drive injects energy at an interior node; the localized energy "
            "inequality is meaningful for free (amplitude 0) trajectories"
        )
    run_dir = os.path.join(_out_dir(args), run_id)
    os.makedirs(run_dir, exist_ok=True)
    path = os.path.join(run_dir, "diagnostics.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print(f"{run_id}: heat-balance max rel {hb.max_relative:.2e}, "
          f"wt rel {wt.relative_residual:+.2e}, wf rel slack {wf.relative_slack:+.2e}; "
          f"written to {path}")
    return 0


def _cmd_presets(_args) -> int:
    for name in sorted(harness.PRESETS):
        print(f"{name:24s} {_PRESET_NOTES.get(name, '')}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermovisc",
        description="1-D thermoviscoelastic resonator simulations and diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_flags=True):
        if config_flags:
            p.add_argument("--config", help="INI config file")
            p.add_argument("--preset", help="named preset (see `presets`)")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override a config field (repeatable)")
            p.add_argument("--steps", type=int, help="override run.steps")
        p.add_argument("--out", help="output directory (default $THERMOVISC_OUT)")

    p_run = sub.add_parser("run", help="execute one configuration")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a [sweep] section")
    add_common(p_sweep)
    p_sweep.add_argument("--parallel", type=int, help="worker processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_diag = sub.add_parser("diagnose", help="run and evaluate balance/inequality residuals")
    add_common(p_diag)
    p_diag.set_defaults(func=_cmd_diagnose)

    p_presets = sub.add_parser("presets", help="list named experiments")
    add_common(p_presets, config_flags=False)
    p_presets.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
