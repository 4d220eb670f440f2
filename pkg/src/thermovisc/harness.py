"""Experiment orchestration: named presets, sweeps, classification, artifacts.

Run artifact layout (all machine-first, consumed by the plots frontend):

    <outdir>/<run-id>/series.csv     # step, t_s, mean_theta_K, max_theta_K,
                                     #   probe_v_mps_<node>..., envelope_mps
    <outdir>/<run-id>/snapshots.csv  # long format: t_s, x_m, u_m, v_mps, theta_K
    <outdir>/<run-id>/record.json    # flat key-value metadata + config echo
    <outdir>/index.csv               # one row per sweep member

The envelope column holds, per series row, the max |v| of the first probe
over the trailing full excitation period (empty until one period of data
exists).  Everything is deterministic: the solver is seedless and all
reductions run in fixed order, so re-running a config reproduces every
number bitwise.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import diagnostics
from .config import config_to_flat
from .materials import CERAMIC, Constant, Exponential, PowerLaw
from .solver1d import (
    Excitation,
    InitialConditions,
    OutputSpec,
    RunResult,
    SimConfig,
    build_grid,
    default_excitation,
    run,
)

CLASS_NO_HOT_SPOTS = "no-hot-spots"
CLASS_HOT_SPOTS = "hot-spots"
CLASS_OVERFLOW = "overflow"
CLASS_ERROR = "error"  # runner exception, not a solver outcome

TREND_RISING = "rising"
TREND_BEATING_FALLING = "beating-then-falling"
TREND_OTHER = "other"

#: Interior maxima needed before a field counts as multi-spot.  The plain
#: driven resonator always shows two large boundary-adjacent humps (heating
#: peaks beside the cooled walls), so "hot spots" start at a third distinct
#: maximum.
MULTI_SPOT_MIN_COUNT = 3
DEFAULT_MIN_PROMINENCE = 0.2


@dataclass(frozen=True)
class Classification:
    kind: str
    spot_count: int
    spot_nodes: tuple = ()


def classify(result: RunResult, min_prominence: float = DEFAULT_MIN_PROMINENCE) -> Classification:
    """Overflow beats everything; otherwise count prominent interior maxima
    of the final temperature snapshot."""
    if result.status.overflowed:
        return Classification(kind=CLASS_OVERFLOW, spot_count=0)
    theta = result.snapshots[-1].theta
    count, nodes = diagnostics.hot_spots(theta, min_prominence)
    if count >= MULTI_SPOT_MIN_COUNT:
        return Classification(kind=CLASS_HOT_SPOTS, spot_count=count, spot_nodes=tuple(nodes))
    return Classification(kind=CLASS_NO_HOT_SPOTS, spot_count=count, spot_nodes=tuple(nodes))


def envelope_trend(env) -> str:
    """Coarse shape label for a per-period envelope series.

    ``rising``: the envelope ends near its maximum (growth or saturation).
    ``beating-then-falling``: it rose to an interior peak and ends well
    below it (the post-detuning collapse; the decline carries the beats).
    """
    env = np.asarray(env, dtype=float)
    if env.size < 4 or env.max() <= 0:
        return TREND_OTHER
    peak = float(env.max())
    j = int(env.argmax())
    n = env.size
    tail = float(env[-max(1, n // 10):].mean())
    rose = peak > 1.2 * env[0]
    if tail >= 0.9 * peak and rose:
        return TREND_RISING
    if rose and j <= 0.9 * n and tail <= 0.9 * peak:
        return TREND_BEATING_FALLING
    return TREND_OTHER


def period_samples(config: SimConfig) -> int:
    """Series rows per excitation period."""
    grid = build_grid(config)
    per = 1.0 / config.excitation.frequency
    return max(2, round(per / (grid.dt * config.output.series_stride)))


@dataclass
class RunRecord:
    run_id: str
    config_flat: dict
    status_kind: str
    status_step: Optional[int]
    classification: Classification
    final_mean_theta: float
    max_theta: float
    envelope_trend: str
    run_dir: str = ""
    error: str = ""

    def to_flat(self) -> dict:
        flat = {"run_id": self.run_id}
        flat.update({f"config.{k}": v for k, v in self.config_flat.items()})
        flat.update(
            {
                "status.kind": self.status_kind,
                "status.step": self.status_step if self.status_step is not None else "",
                "classification.kind": self.classification.kind,
                "classification.spot_count": self.classification.spot_count,
                "classification.spot_nodes": ",".join(map(str, self.classification.spot_nodes)),
                "summary.final_mean_theta_K": self.final_mean_theta,
                "summary.max_theta_K": self.max_theta,
                "summary.envelope_trend": self.envelope_trend,
                "artifacts.series": "series.csv",
                "artifacts.snapshots": "snapshots.csv",
            }
        )
        if self.error:
            flat["error"] = self.error
        return flat


def _rolling_envelope(values: np.ndarray, window: int) -> list:
    """Trailing-window max of |values|; None until one full window exists."""
    out = []
    av = np.abs(values)
    for i in range(len(av)):
        if i + 1 < window:
            out.append(None)
        else:
            out.append(float(av[i + 1 - window : i + 1].max()))
    return out


def write_series_csv(path: str, result: RunResult):
    s = result.series
    probes = result.config.output.probes
    window = period_samples(result.config)
    env_col = _rolling_envelope(s.probe_v[:, 0], window) if len(probes) else []
    header = (
        ["step", "t_s", "mean_theta_K", "max_theta_K"]
        + [f"probe_v_mps_{p}" for p in probes]
        + ["envelope_mps"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(s.step)):
            row = [int(s.step[i]), repr(float(s.t[i])), repr(float(s.mean_theta[i])),
                   repr(float(s.max_theta[i]))]
            row += [repr(float(v)) for v in s.probe_v[i]]
            row.append("" if env_col[i] is None else repr(env_col[i]))
            writer.writerow(row)


def write_snapshots_csv(path: str, result: RunResult):
    x = result.grid.x
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "x_m", "u_m", "v_mps", "theta_K"])
        for snap in result.snapshots:
            t_s = repr(float(snap.t))
            for i in range(len(x)):
                writer.writerow(
                    [t_s, repr(float(x[i])), repr(float(snap.u[i])),
                     repr(float(snap.v[i])), repr(float(snap.theta[i]))]
                )


def summarize(result: RunResult, min_prominence: float = DEFAULT_MIN_PROMINENCE,
              run_id: str = "run") -> RunRecord:
    cls = classify(result, min_prominence)
    env = diagnostics.envelope(result.series.probe_v[:, 0], period_samples(result.config))
    return RunRecord(
        run_id=run_id,
        config_flat=config_to_flat(result.config),
        status_kind=result.status.kind,
        status_step=result.status.step,
        classification=cls,
        final_mean_theta=float(result.series.mean_theta[-1]),
        max_theta=float(np.max(result.series.max_theta)),
        envelope_trend=envelope_trend(env),
    )


def execute_run(config: SimConfig, outdir: str, run_id: str,
                min_prominence: float = DEFAULT_MIN_PROMINENCE) -> RunRecord:
    """Run one config and persist series.csv, snapshots.csv, record.json."""
    result = run(config)
    record = summarize(result, min_prominence, run_id=run_id)
    run_dir = os.path.join(outdir, run_id)
    os.makedirs(run_dir, exist_ok=True)
    write_series_csv(os.path.join(run_dir, "series.csv"), result)
    write_snapshots_csv(os.path.join(run_dir, "snapshots.csv"), result)
    record.run_dir = run_dir
    with open(os.path.join(run_dir, "record.json"), "w") as fh:
        json.dump(record.to_flat(), fh, indent=2, sort_keys=True)
    return record


# ---------------------------------------------------------------------------
# presets


def _reference_config(law, steps, amplitude=2e-3, N=101, mode="force",
                      snapshot_stride=None) -> SimConfig:
    if snapshot_stride is None:
        snapshot_stride = max(1, steps // 200)
    return SimConfig(
        material=CERAMIC,
        law=law,
        L=1e-3,
        N=N,
        steps=steps,
        excitation=default_excitation(N, amplitude=amplitude, mode=mode),
        output=OutputSpec(series_stride=10, snapshot_stride=snapshot_stride),
    )


PRESETS = {
    "smoke": lambda: _reference_config(PowerLaw(k=1e7, p=1.0), steps=10_000),
    "fig2-power-k1e7-p1": lambda: _reference_config(PowerLaw(k=1e7, p=1.0), steps=500_000),
    # temperature-field phenomenology presets (power law a-d, exponential e-f):
    # a/d/f sit in the smooth two-hump regime, b/e in the destabilizing one,
    # c in between.
    "fig3a-power-weak": lambda: _reference_config(PowerLaw(k=1e6, p=1.0), steps=500_000),
    "fig3b-power-steep": lambda: _reference_config(PowerLaw(k=3e22, p=3.0), steps=500_000),
    "fig3c-power-mixed": lambda: _reference_config(PowerLaw(k=1e7, p=1.5), steps=500_000),
    "fig3d-power-p2": lambda: _reference_config(PowerLaw(k=1e7, p=2.0), steps=500_000),
    "fig3e-exp-steep": lambda: _reference_config(Exponential(alpha=4.0, b=1e9), steps=500_000),
    "fig3f-exp-gentle": lambda: _reference_config(Exponential(alpha=1.5, b=1e8), steps=500_000),
}


def preset_config(name: str, steps: int = None) -> SimConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    config = PRESETS[name]()
    if steps is not None:
        snapshot_stride = max(1, steps // 200)
        config = replace(
            config, steps=steps,
            output=replace(config.output, snapshot_stride=snapshot_stride),
        )
    return config


def run_reference(name: str, outdir: str, steps: int = None) -> RunRecord:
    return execute_run(preset_config(name, steps), outdir, run_id=name)


def reference_ringdown(steps: int = 50_000, N: int = 101,
                       u_amplitude: float = 1e-9) -> SimConfig:
    """Free decay from a fundamental-mode displacement: drive off, constant law."""
    return SimConfig(
        material=CERAMIC,
        law=Constant(),
        L=1e-3,
        N=N,
        steps=steps,
        excitation=Excitation(frequency=2e6, amplitude=0.0, node=N // 2),
        initial=InitialConditions(u_sine_amplitude=u_amplitude),
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep over a law family: axis1 = k or alpha, axis2 = p or b."""

    base: SimConfig
    law_family: str  # "power" | "exponential"
    axis1: tuple
    axis2: tuple
    reduced_steps: Optional[int] = None
    parallelism: int = 1

    def __post_init__(self):
        if self.law_family not in ("power", "exponential"):
            raise ValueError(f"unknown law family {self.law_family!r}")
        if not self.axis1 or not self.axis2:
            raise ValueError("sweep axes must be non-empty")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def member_config(self, v1: float, v2: float) -> SimConfig:
        if self.law_family == "power":
            law = PowerLaw(k=v1, p=v2)
        else:
            law = Exponential(alpha=v1, b=v2)
        config = replace(self.base, law=law)
        if self.reduced_steps is not None:
            config = replace(config, steps=self.reduced_steps)
        return config

    def member_id(self, v1: float, v2: float) -> str:
        if self.law_family == "power":
            return f"power_k{v1:g}_p{v2:g}"
        return f"exp_alpha{v1:g}_b{v2:g}"

    def members(self):
        for v1 in self.axis1:
            for v2 in self.axis2:
                yield v1, v2


def _sweep_worker(args):
    spec, v1, v2, outdir, min_prominence = args
    run_id = spec.member_id(v1, v2)
    try:
        config = spec.member_config(v1, v2)
        return execute_run(config, outdir, run_id, min_prominence)
    except Exception as exc:  # individual failures never abort the sweep
        return RunRecord(
            run_id=run_id,
            config_flat={},
            status_kind="error",
            status_step=None,
            classification=Classification(kind=CLASS_ERROR, spot_count=0),
            final_mean_theta=math.nan,
            max_theta=math.nan,
            envelope_trend=TREND_OTHER,
            error=f"{type(exc).__name__}: {exc}",
        )


INDEX_COLUMNS = [
    "run_id", "axis1", "axis2", "status", "status_step", "classification",
    "spot_count", "final_mean_theta_K", "max_theta_K", "envelope_trend", "error",
]


def write_index_csv(path: str, spec: SweepSpec, records: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(INDEX_COLUMNS)
        for (v1, v2), rec in zip(spec.members(), records):
            writer.writerow(
                [rec.run_id, repr(float(v1)), repr(float(v2)), rec.status_kind,
                 "" if rec.status_step is None else rec.status_step,
                 rec.classification.kind, rec.classification.spot_count,
                 repr(rec.final_mean_theta), repr(rec.max_theta),
                 rec.envelope_trend, rec.error]
            )


def read_index_csv(path: str) -> list[dict]:
    """Parse index.csv back into typed summary dicts (round-trips exactly)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                {
                    "run_id": row["run_id"],
                    "axis1": float(row["axis1"]),
                    "axis2": float(row["axis2"]),
                    "status": row["status"],
                    "status_step": int(row["status_step"]) if row["status_step"] else None,
                    "classification": row["classification"],
                    "spot_count": int(row["spot_count"]),
                    "final_mean_theta_K": float(row["final_mean_theta_K"]),
                    "max_theta_K": float(row["max_theta_K"]),
                    "envelope_trend": row["envelope_trend"],
                    "error": row["error"],
                }
            )
    return out


def sweep(spec: SweepSpec, outdir: str,
          min_prominence: float = DEFAULT_MIN_PROMINENCE) -> list[RunRecord]:
    """Run every axis1 x axis2 member; records come back in axis order.

    Individual member failures (including overflow) are recorded, never
    raised.  With parallelism > 1 the members run in a process pool; the
    solver is deterministic, so concurrency cannot change any number.
    """
    os.makedirs(outdir, exist_ok=True)
    tasks = [(spec, v1, v2, outdir, min_prominence) for v1, v2 in spec.members()]
    if spec.parallelism == 1:
        records = [_sweep_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            records = list(pool.map(_sweep_worker, tasks))
    write_index_csv(os.path.join(outdir, "index.csv"), spec, records)
    return records
