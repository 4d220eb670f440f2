import numpy as np
import pytest

from thermovisc import diagnostics
from thermovisc.harness import _reference_config, reference_ringdown
from thermovisc.materials import CERAMIC, Constant
from thermovisc.solver1d import build_grid, run, run_with_trajectory


@pytest.fixture(scope="session")
def smoke_constant_result():
    """Constant-law reference: N=101, stability factor 2.5, 1e4 driven steps."""
    config = _reference_config(Constant(), steps=10_000)
    return config, run(config)


@pytest.fixture(scope="session")
def driven_trajectory():
    """Stride-1 trajectory of the power-law smoke reference (1e4 steps)."""
    from thermovisc.harness import preset_config

    config = preset_config("smoke")
    result, traj = run_with_trajectory(config)
    return config, result, traj


@pytest.fixture(scope="session")
def ringdown_trajectory():
    """Free decay from a fundamental-mode displacement, 1e4 steps, stride 1."""
    config = reference_ringdown(steps=10_000)
    result, traj = run_with_trajectory(config)
    return config, result, traj


@pytest.fixture(scope="session")
def ringdown_energies():
    """50k-step ring-down with the discrete energy sampled every step."""
    import time

    config = reference_ringdown(steps=50_000)
    grid = build_grid(config)
    energies = []

    def sink(state):
        energies.append(diagnostics.energy(state, CERAMIC, config.law, dx=grid.dx))

    t0 = time.perf_counter()
    result = run(config, sink=sink)
    elapsed = time.perf_counter() - t0
    return config, result, np.asarray(energies), elapsed
