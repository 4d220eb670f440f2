"""Explicit FDTD integrator for a 1-D thermoviscoelastic resonator.

Solves the scalar coupled system

    rho u_tt   = C(theta) u_xx + tau C(theta) u_xxt
    c rho th_t = lambda th_xx + tau C(theta) (u_xt)^2

on [0, L] with clamped, actively cooled boundaries (u = v = theta = 0) and
a sinusoidal velocity drive imposed at an interior node.  The update is
fully explicit: the velocity v = u_t advances with stiffness sampled at the
previous temperature level, u integrates the fresh velocity
(symplectic-Euler flavor), and the heat equation advances with the source
tau C (v_x)^2 evaluated from the previous velocity level via centered
differences.  Temperatures are clamped at zero after each step; the clamped
mass is recorded so that heat-balance diagnostics stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .materials import Constant, MaterialParams, TemperatureLaw, phase_velocity, stiffness

STATUS_COMPLETED = "completed"
STATUS_OVERFLOW = "overflow"
STATUS_STABILITY = "stability-violation"


@dataclass(frozen=True)
class Excitation:
    """Sinusoidal velocity drive at one interior node.

    Two couplings are supported.  ``mode="force"`` (default) injects a point
    force proportional to the drive signal: the node receives a velocity
    increment (c_ph0 * dt / dx) * coupling * amplitude * sin(2 pi f t) per
    step, i.e. a delta-distributed force that is invariant under grid
    refinement.  This lets a resonant mode build up well beyond `amplitude`
    and ring the resonator up over many periods.  ``mode="pin"`` overwrites
    the nodal velocity with amplitude * sin(2 pi f t) (a hard Dirichlet
    condition); pinning the centre caps the response at the drive amplitude,
    so resonant growth never occurs in that mode.

    With amplitude 0 the drive is disabled entirely (free evolution); the
    node is then not pinned, so ring-down experiments stay untouched.
    """

    frequency: float
    amplitude: float
    node: int
    mode: str = "force"
    coupling: float = 0.02

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("frequency must be strictly positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.mode not in ("force", "pin"):
            raise ValueError(f"unknown excitation mode {self.mode!r}")
        if not self.coupling > 0:
            raise ValueError("coupling must be strictly positive")


@dataclass(frozen=True)
class OutputSpec:
    """Recording cadence: series rows every `series_stride` steps, field
    snapshots every `snapshot_stride` steps (final state always included)."""

    series_stride: int = 10
    snapshot_stride: int = 2500
    probes: tuple = ()

    def __post_init__(self):
        if self.series_stride < 1 or self.snapshot_stride < 1:
            raise ValueError("strides must be >= 1")


@dataclass(frozen=True)
class InitialConditions:
    """Initial displacement u(x) = amplitude * sin(mode pi x / L); v = theta = 0.

    The default (amplitude 0) starts the system from rest.
    """

    u_sine_amplitude: float = 0.0
    u_sine_mode: int = 1

    def __post_init__(self):
        if self.u_sine_mode < 1:
            raise ValueError("u_sine_mode must be >= 1")


@dataclass(frozen=True)
class SimConfig:
    material: MaterialParams
    law: TemperatureLaw
    L: float
    N: int
    steps: int
    excitation: Excitation
    stability_factor: float = 2.5
    output: OutputSpec = field(default_factory=OutputSpec)
    initial: InitialConditions = field(default_factory=InitialConditions)
    overflow_limit: float = 1e12

    def __post_init__(self):
        if self.N < 5:
            raise ValueError("N must be at least 5")
        if not self.L > 0:
            raise ValueError("L must be strictly positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.stability_factor < 1:
            raise ValueError("stability_factor must be >= 1")
        if not 0 < self.excitation.node < self.N - 1:
            raise ValueError("excitation node must be interior")
        if not self.output.probes:
            object.__setattr__(
                self, "output", replace(self.output, probes=(self.N // 4, self.N // 2))
            )
        for p in self.output.probes:
            if not 0 <= p < self.N:
                raise ValueError(f"probe node {p} outside grid")
        if not self.overflow_limit > 0:
            raise ValueError("overflow_limit must be strictly positive")


def default_excitation(N: int, frequency: float = 2e6, amplitude: float = 2e-3,
                       mode: str = "force") -> Excitation:
    """Drive at the centre node; amplitude in m/s (saturated response scale)."""
    return Excitation(frequency=frequency, amplitude=amplitude, node=N // 2, mode=mode)


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int
    dx: float
    dt: float

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N)


def build_grid(config: SimConfig) -> Grid1D:
    """Spatial step L/(N-1); time step from the CFL margin at theta = 0:
    dx/dt = stability_factor * c_ph(C0)."""
    dx = config.L / (config.N - 1)
    c0 = phase_velocity(config.material, config.material.C0)
    dt = dx / (config.stability_factor * c0)
    return Grid1D(L=config.L, N=config.N, dx=dx, dt=dt)


def excitation_velocity(t: float, config: SimConfig) -> float:
    """Drive signal amplitude * sin(2 pi f t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    exc = config.excitation
    return exc.amplitude * math.sin(2.0 * math.pi * exc.frequency * t)


@dataclass
class SimState:
    """Fields at one time level.  `clamp_mass` is the temperature mass (K m)
    added by the nonnegativity clamp during the step that produced this
    state (0 for the initial state)."""

    step: int
    t: float
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    clamp_mass: float = 0.0


def initial_state(config: SimConfig, grid: Optional[Grid1D] = None) -> SimState:
    grid = grid or build_grid(config)
    x = grid.x
    u = config.initial.u_sine_amplitude * np.sin(
        config.initial.u_sine_mode * np.pi * x / config.L
    )
    u[0] = 0.0
    u[-1] = 0.0
    return SimState(step=0, t=0.0, u=u, v=np.zeros(config.N), theta=np.zeros(config.N))


@dataclass(frozen=True)
class RunStatus:
    kind: str  # one of STATUS_COMPLETED, STATUS_OVERFLOW, STATUS_STABILITY
    step: Optional[int] = None

    @property
    def completed(self) -> bool:
        return self.kind == STATUS_COMPLETED

    @property
    def overflowed(self) -> bool:
        return self.kind == STATUS_OVERFLOW


@dataclass
class Series:
    """Per-recorded-step scalars (times strictly increasing)."""

    step: np.ndarray
    t: np.ndarray
    mean_theta: np.ndarray
    max_theta: np.ndarray
    probe_v: np.ndarray  # shape (rows, len(probes))


@dataclass
class Snapshot:
    t: float
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray


@dataclass
class RunResult:
    status: RunStatus
    series: Series
    snapshots: list
    config: SimConfig
    grid: Grid1D


class _Kernel:
    """Preallocated single-step update; mutates its field arrays in place."""

    def __init__(self, config: SimConfig, grid: Grid1D):
        self.config = config
        self.grid = grid
        mat = config.material
        self.inv_dx2 = 1.0 / grid.dx**2
        self.inv_2dx = 0.5 / grid.dx
        self.dt_rho = grid.dt / mat.rho
        self.dt_crho = grid.dt / (mat.c_heat * mat.rho)
        self.tau = mat.tau
        self.lam = mat.lambda_th
        exc = config.excitation
        self.omega = 2.0 * math.pi * exc.frequency
        self.pin = exc.mode == "pin"
        # point-force drive: velocity increment per unit signal, grid-invariant
        c0 = phase_velocity(mat, mat.C0)
        self.force_gain = (grid.dt / grid.dx) * c0 * exc.coupling
        # instantaneous CFL bound: flag once C(theta) makes c_ph exceed dx/dt
        self.C_stable = mat.rho * (grid.dx / grid.dt) ** 2

    def advance(self, state: SimState) -> tuple[bool, bool]:
        """One explicit step in place.  Returns (overflowed, cfl_violated)."""
        cfg = self.config
        u, v, th = state.u, state.v, state.theta
        if isinstance(cfg.law, Constant):
            C = cfg.material.C0  # scalar broadcast, no per-step allocation
            cfl_violated = C > self.C_stable
        else:
            C = stiffness(cfg.law, cfg.material, th)
            cfl_violated = bool(C.max() > self.C_stable)

        lap_u = u[2:] - 2.0 * u[1:-1] + u[:-2]
        lap_v = v[2:] - 2.0 * v[1:-1] + v[:-2]
        lap_th = th[2:] - 2.0 * th[1:-1] + th[:-2]
        grad_v = (v[2:] - v[:-2]) * self.inv_2dx  # old velocity level
        C_int = C if np.isscalar(C) else C[1:-1]
        source = self.tau * C_int * grad_v * grad_v

        t_next = state.t + self.grid.dt
        v[1:-1] += self.dt_rho * self.inv_dx2 * C_int * (lap_u + self.tau * lap_v)
        if cfg.excitation.amplitude != 0.0:
            signal = cfg.excitation.amplitude * math.sin(self.omega * t_next)
            if self.pin:
                v[cfg.excitation.node] = signal
            else:
                v[cfg.excitation.node] += self.force_gain * signal
        u += self.grid.dt * v  # fresh velocity: symplectic-Euler pairing
        th[1:-1] += self.dt_crho * (self.lam * self.inv_dx2 * lap_th + source)

        clamp = 0.0
        th_int = th[1:-1]
        if th_int.min() < 0.0:
            neg = th_int[th_int < 0.0]
            clamp = -float(neg.sum()) * self.grid.dx
            np.maximum(th_int, 0.0, out=th_int)

        state.step += 1
        state.t = t_next
        state.clamp_mass = clamp

        limit = cfg.overflow_limit
        overflow = not (
            float(np.abs(th).max()) <= limit
            and float(np.abs(v).max()) <= limit
            and float(np.abs(u).max()) <= limit
        )
        return overflow, cfl_violated


def step(state: SimState, grid: Grid1D, config: SimConfig) -> SimState:
    """Single update as a pure function (the run loop uses the same kernel
    on reused buffers)."""
    new = SimState(
        step=state.step,
        t=state.t,
        u=state.u.copy(),
        v=state.v.copy(),
        theta=state.theta.copy(),
    )
    _Kernel(config, grid).advance(new)
    return new


class _SeriesAccumulator:
    def __init__(self, probes):
        self.probes = list(probes)
        self.step = []
        self.t = []
        self.mean_theta = []
        self.max_theta = []
        self.probe_v = []

    def record(self, state: SimState, N: int):
        self.step.append(state.step)
        self.t.append(state.t)
        self.mean_theta.append(float(state.theta.sum()) / N)
        self.max_theta.append(float(state.theta.max()))
        self.probe_v.append([float(state.v[p]) for p in self.probes])

    def build(self) -> Series:
        return Series(
            step=np.asarray(self.step, dtype=int),
            t=np.asarray(self.t),
            mean_theta=np.asarray(self.mean_theta),
            max_theta=np.asarray(self.max_theta),
            probe_v=np.asarray(self.probe_v).reshape(len(self.step), len(self.probes)),
        )


def run(config: SimConfig, sink: Optional[Callable[[SimState], None]] = None) -> RunResult:
    """Integrate for config.steps steps or until overflow.

    `sink`, when given, is called with the live state after every step (and
    once with the initial state); it must copy anything it keeps, since the
    arrays are reused.  Overflow is reported through the returned status,
    never raised.
    """
    grid = build_grid(config)
    state = initial_state(config, grid)
    kernel = _Kernel(config, grid)
    out = config.output
    series = _SeriesAccumulator(out.probes)
    snapshots: list = []

    def snap(st: SimState):
        snapshots.append(Snapshot(t=st.t, u=st.u.copy(), v=st.v.copy(), theta=st.theta.copy()))

    series.record(state, config.N)
    snap(state)
    if sink is not None:
        sink(state)

    status = RunStatus(STATUS_COMPLETED)
    first_cfl = None
    for m in range(1, config.steps + 1):
        overflow, cfl = kernel.advance(state)
        if cfl and first_cfl is None:
            first_cfl = m
        if sink is not None:
            sink(state)
        if overflow:
            series.record(state, config.N)
            snap(state)
            status = RunStatus(STATUS_OVERFLOW, step=m)
            break
        if m % out.series_stride == 0:
            series.record(state, config.N)
        if m % out.snapshot_stride == 0:
            snap(state)
    else:
        if state.step % out.series_stride != 0:
            series.record(state, config.N)
        if state.step % out.snapshot_stride != 0:
            snap(state)
        if first_cfl is not None:
            status = RunStatus(STATUS_STABILITY, step=first_cfl)

    return RunResult(status=status, series=series.build(), snapshots=snapshots,
                     config=config, grid=grid)


@dataclass
class Trajectory:
    """Stride-1 record of all fields, for the diagnostics layer.

    Index m holds the state after m steps; clamp_mass[m] is the clamp
    correction applied during step m (clamp_mass[0] = 0).
    """

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    clamp_mass: np.ndarray
    grid: Grid1D
    config: SimConfig

    @property
    def levels(self) -> int:
        return self.t.shape[0]


class TrajectoryRecorder:
    """Sink that stores every visited state (stride 1)."""

    def __init__(self, config: SimConfig, grid: Optional[Grid1D] = None):
        self.config = config
        self.grid = grid or build_grid(config)
        n_levels = config.steps + 1
        N = config.N
        self.t = np.zeros(n_levels)
        self.u = np.zeros((n_levels, N))
        self.v = np.zeros((n_levels, N))
        self.theta = np.zeros((n_levels, N))
        self.clamp_mass = np.zeros(n_levels)
        self._count = 0

    def __call__(self, state: SimState):
        m = self._count
        self.t[m] = state.t
        self.u[m] = state.u
        self.v[m] = state.v
        self.theta[m] = state.theta
        self.clamp_mass[m] = state.clamp_mass
        self._count += 1

    def build(self) -> Trajectory:
        m = self._count
        return Trajectory(
            t=self.t[:m],
            u=self.u[:m],
            v=self.v[:m],
            theta=self.theta[:m],
            clamp_mass=self.clamp_mass[:m],
            grid=self.grid,
            config=self.config,
        )


def run_with_trajectory(config: SimConfig) -> tuple[RunResult, Trajectory]:
    recorder = TrajectoryRecorder(config)
    result = run(config, sink=recorder)
    return result, recorder.build()
