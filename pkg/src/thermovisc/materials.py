"""Material constants and temperature-dependent stiffness laws.

Temperatures throughout are excess temperatures above the cooled ambient,
in kelvin, so theta >= 0 always.  Stiffness laws map theta to an elastic
modulus C(theta) in pascal with C(0) = C0 for every law.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class MaterialParams:
    """Bulk constants: base stiffness C0 [Pa], density rho [kg/m^3],
    retardation time tau [s], specific heat c_heat [J/(K kg)], thermal
    conductivity lambda_th [W/(m K)]."""

    C0: float
    rho: float
    tau: float
    c_heat: float
    lambda_th: float

    def __post_init__(self):
        for name in ("C0", "rho", "tau", "c_heat", "lambda_th"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


#: Parameters approximating a piezoelectric ceramic, used by all presets.
CERAMIC = MaterialParams(C0=124.8e9, rho=7800.0, tau=1e-9, c_heat=350.0, lambda_th=1.1)


@dataclass(frozen=True)
class Constant:
    """Temperature-independent stiffness C(theta) = C0."""


@dataclass(frozen=True)
class PowerLaw:
    """C(theta) = C0 (1 + k theta^p); unbounded in theta whenever k > 0.

    k theta^p is treated as dimensionless with theta in kelvin.
    """

    k: float
    p: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if not self.p > 0:
            raise ValueError("p must be strictly positive")


@dataclass(frozen=True)
class Exponential:
    """C(theta) = C0 (alpha + (1 - alpha) e^{-b theta}).

    Converges to alpha * C0 for large theta: alpha > 1 stiffens the
    material, alpha < 1 softens it.
    """

    alpha: float
    b: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be strictly positive")
        if self.b < 0:
            raise ValueError("b must be nonnegative")


TemperatureLaw = Union[Constant, PowerLaw, Exponential]


def stiffness(law: TemperatureLaw, params: MaterialParams, theta):
    """Stiffness C(theta) [Pa]; accepts scalar or array theta >= 0."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    if isinstance(law, Constant):
        out = np.full_like(theta, params.C0)
    elif isinstance(law, PowerLaw):
        out = params.C0 * (1.0 + law.k * theta**law.p)
    elif isinstance(law, Exponential):
        out = params.C0 * (law.alpha + (1.0 - law.alpha) * np.exp(-law.b * theta))
    else:
        raise TypeError(f"unknown temperature law {law!r}")
    return float(out) if out.ndim == 0 else out


def phase_velocity(params: MaterialParams, C: float) -> float:
    """Lossless wave speed sqrt(C / rho) [m/s]."""
    if not C > 0:
        raise ValueError("stiffness must be strictly positive")
    return float(np.sqrt(C / params.rho))


@dataclass(frozen=True)
class AnalysisCoefficients:
    """Coefficients of the normalized system: a = 1/tau [1/s], thermal
    diffusivity D = lambda/(c rho) [m^2/s], and the scalings gamma = tau C/rho,
    Gamma = tau C/(c rho) divided by C."""

    a: float
    D: float
    gamma_scale: float
    Gamma_scale: float


def analysis_coefficients(params: MaterialParams) -> AnalysisCoefficients:
    return AnalysisCoefficients(
        a=1.0 / params.tau,
        D=params.lambda_th / (params.c_heat * params.rho),
        gamma_scale=params.tau / params.rho,
        Gamma_scale=params.tau / (params.c_heat * params.rho),
    )


def law_bounds(law: TemperatureLaw, params: MaterialParams, theta_max: float):
    """Range (Cmin, Cmax) of the stiffness over [0, theta_max], plus a flag
    telling whether the law stays bounded over all theta >= 0.

    theta_max may be `inf` to probe the large-temperature limit.  Every law
    here is monotone in theta, so the range is spanned by the endpoints.
    """
    if theta_max < 0:
        raise ValueError("theta_max must be nonnegative")
    C0 = params.C0
    if isinstance(law, Constant):
        return C0, C0, True
    if isinstance(law, PowerLaw):
        if law.k == 0:
            return C0, C0, True
        if np.isinf(theta_max):
            return C0, float("inf"), False
        return C0, stiffness(law, params, theta_max), False
    if isinstance(law, Exponential):
        if law.b == 0 or law.alpha == 1.0:
            return C0, C0, True
        if np.isinf(theta_max):
            c_end = law.alpha * C0
        else:
            c_end = stiffness(law, params, theta_max)
        return min(C0, c_end), max(C0, c_end), True
    raise TypeError(f"unknown temperature law {law!r}")
