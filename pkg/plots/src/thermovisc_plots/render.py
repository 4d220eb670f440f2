"""Render simulation artifacts into figures.

Consumes the documented CSV layout of a run directory:

    series.csv     step, t_s, mean_theta_K, max_theta_K,
                   probe_v_mps_<node>..., envelope_mps
    snapshots.csv  t_s, x_m, u_m, v_mps, theta_K   (long format)
    index.csv      sweep root: run_id, axis1, axis2, ...

Three figure kinds: ``envelope`` (normalized mean temperature and velocity
envelope over time), ``field-heatmap`` (temperature over x and t), and
``sweep-grid`` (a panel of field heatmaps laid out over the sweep axes).
Artifacts are opened read-only and never modified.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

#: long runs are thinned to at most this many time rows before plotting
MAX_TIME_COLUMNS = 2000

KINDS = ("envelope", "field-heatmap", "sweep-grid")

_SERIES_REQUIRED = ["step", "t_s", "mean_theta_K", "max_theta_K", "envelope_mps"]
_SNAPSHOT_REQUIRED = ["t_s", "x_m", "u_m", "v_mps", "theta_K"]
_INDEX_REQUIRED = ["run_id", "axis1", "axis2", "status", "classification"]


class SchemaError(ValueError):
    """Artifact does not match the documented CSV schema."""


@dataclass(frozen=True)
class PlotJob:
    run_dir: str
    kind: str
    out_path: str
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


@dataclass
class RenderResult:
    path: str
    panels: int = 1
    #: heatmap kinds: the plotted matrix (time rows x space columns)
    matrix: Optional[np.ndarray] = None
    #: envelope kind: the plotted curves keyed by label
    curves: dict = field(default_factory=dict)


def _check_columns(df: pd.DataFrame, required, path: str):
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}; found {', '.join(df.columns)}"
        )


def load_series(run_dir: str) -> pd.DataFrame:
    path = os.path.join(run_dir, "series.csv")
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    df = pd.read_csv(path)
    _check_columns(df, _SERIES_REQUIRED, path)
    if not any(c.startswith("probe_v_mps") for c in df.columns):
        raise SchemaError(f"{path}: missing column(s) probe_v_mps_<node>")
    return df


def load_snapshots(run_dir: str) -> pd.DataFrame:
    path = os.path.join(run_dir, "snapshots.csv")
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    df = pd.read_csv(path)
    _check_columns(df, _SNAPSHOT_REQUIRED, path)
    return df


def load_index(sweep_dir: str) -> pd.DataFrame:
    path = os.path.join(sweep_dir, "index.csv")
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    df = pd.read_csv(path)
    _check_columns(df, _INDEX_REQUIRED, path)
    return df


def heatmap_matrix(run_dir: str):
    """Temperature field as (time rows, space columns), downsampled in time.

    Returns (t values, x values, theta matrix).
    """
    snaps = load_snapshots(run_dir)
    pivot = snaps.pivot_table(index="t_s", columns="x_m", values="theta_K", sort=True)
    t = pivot.index.to_numpy(dtype=float)
    x = pivot.columns.to_numpy(dtype=float)
    theta = pivot.to_numpy(dtype=float)
    if theta.shape[0] > MAX_TIME_COLUMNS:
        stride = int(np.ceil(theta.shape[0] / MAX_TIME_COLUMNS))
        theta = theta[::stride]
        t = t[::stride]
    return t, x, theta


def _normalized(values: np.ndarray) -> np.ndarray:
    peak = np.nanmax(np.abs(values))
    if peak == 0.0 or not np.isfinite(peak):
        return values
    return values / peak


def _render_envelope(job: PlotJob) -> RenderResult:
    series = load_series(job.run_dir)
    t = series["t_s"].to_numpy(dtype=float)
    mean_theta = series["mean_theta_K"].to_numpy(dtype=float)
    envelope = series["envelope_mps"].to_numpy(dtype=float)
    if job.normalize:
        mean_theta = _normalized(mean_theta)
        envelope = _normalized(envelope)

    fig, ax_left = plt.subplots(figsize=(8.0, 4.5))
    ax_right = ax_left.twinx()
    theta_label = "mean temperature" + (" (normalized)" if job.normalize else " / K")
    env_label = "velocity envelope" + (" (normalized)" if job.normalize else " / m/s")
    ax_left.plot(t * 1e3, mean_theta, color="tab:red", label=theta_label)
    ax_right.plot(t * 1e3, envelope, color="tab:blue", alpha=0.8, label=env_label)
    ax_left.set_xlabel("t / ms")
    ax_left.set_ylabel(theta_label, color="tab:red")
    ax_right.set_ylabel(env_label, color="tab:blue")
    ax_left.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=150)
    plt.close(fig)
    return RenderResult(
        path=job.out_path,
        panels=1,
        curves={"mean_theta": mean_theta, "envelope": envelope, "t_s": t},
    )


def _draw_heatmap(ax, t, x, theta, normalize):
    data = _normalized(theta) if normalize else theta
    mesh = ax.pcolormesh(x * 1e3, t * 1e3, data, cmap="inferno", shading="nearest")
    ax.set_xlabel("x / mm")
    ax.set_ylabel("t / ms")
    return mesh, data


def _render_field_heatmap(job: PlotJob) -> RenderResult:
    t, x, theta = heatmap_matrix(job.run_dir)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh, data = _draw_heatmap(ax, t, x, theta, job.normalize)
    fig.colorbar(mesh, ax=ax, label="theta" + (" (normalized)" if job.normalize else " / K"))
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=150)
    plt.close(fig)
    return RenderResult(path=job.out_path, panels=1, matrix=data)


def _render_sweep_grid(job: PlotJob) -> RenderResult:
    index = load_index(job.run_dir)
    ax1_vals = sorted(index["axis1"].unique())
    ax2_vals = sorted(index["axis2"].unique())
    nrows, ncols = len(ax1_vals), len(ax2_vals)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 3.0 * nrows), squeeze=False
    )
    panels = 0
    for i, v1 in enumerate(ax1_vals):
        for j, v2 in enumerate(ax2_vals):
            ax = axes[i][j]
            rows = index[(index["axis1"] == v1) & (index["axis2"] == v2)]
            if rows.empty:
                ax.set_axis_off()
                continue
            row = rows.iloc[0]
            member_dir = os.path.join(job.run_dir, str(row["run_id"]))
            try:
                t, x, theta = heatmap_matrix(member_dir)
                _draw_heatmap(ax, t, x, theta, job.normalize)
            except SchemaError:
                ax.set_axis_off()
                ax.set_title(f"{row['run_id']}: artifacts missing", fontsize=8)
                continue
            ax.set_title(f"{row['run_id']} [{row['classification']}]", fontsize=8)
            panels += 1
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=120)
    plt.close(fig)
    return RenderResult(path=job.out_path, panels=panels)


def render(job: PlotJob) -> RenderResult:
    """Render one figure; returns the output path plus plotted data."""
    out_dir = os.path.dirname(os.path.abspath(job.out_path))
    os.makedirs(out_dir, exist_ok=True)
    if job.kind == "envelope":
        return _render_envelope(job)
    if job.kind == "field-heatmap":
        return _render_field_heatmap(job)
    return _render_sweep_grid(job)
