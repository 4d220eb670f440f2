"""Experiment configuration: INI-style files, SI-suffixed numbers, overrides.

A config file holds flat typed keys in sections; every key is optional and
defaults to the reference resonator (ceramic material, 1 mm layer, 101
nodes, 2 MHz centre drive)::

    [material]
    C0 = 124.8 GPa
    rho = 7800
    tau = 1 ns
    c_heat = 350
    lambda_th = 1.1

    [law]
    kind = power        ; constant | power | exponential
    k = 1e7
    p = 1

    [grid]
    L = 1 mm
    N = 101
    stability_factor = 2.5

    [run]
    steps = 500000
    overflow_limit = 1e12

    [excitation]
    frequency = 2 MHz
    amplitude = 2e-3
    node = 50
    mode = force        ; force | pin
    coupling = 0.02

    [output]
    series_stride = 10
    snapshot_stride = 2500
    probes = 25, 50

    [initial]
    u_sine_amplitude = 0
    u_sine_mode = 1

Numbers accept an SI-prefixed unit suffix (1mm, 2MHz, 1ns, 124.8 GPa); the
unit letter only fixes the decimal scale, the expected physical unit of
each key is documented above.  Overrides use the same dotted keys as the
flattened record (e.g. ``law.k=2e7``) and behave exactly like editing the
file.
"""

from __future__ import annotations

import configparser
import re

from .materials import CERAMIC, Constant, Exponential, MaterialParams, PowerLaw, TemperatureLaw
from .solver1d import Excitation, InitialConditions, OutputSpec, SimConfig


class ConfigError(ValueError):
    """Malformed configuration file or override."""


_PREFIXES = {
    "": 1.0, "G": 1e9, "M": 1e6, "k": 1e3, "c": 1e-2,
    "m": 1e-3, "u": 1e-6, "µ": 1e-6, "n": 1e-9, "p": 1e-12,
}
_UNITS = ("Hz", "Pa", "K", "J", "W", "m", "s", "g")
_QUANTITY_RE = re.compile(r"^\s*([+-]?[0-9][0-9.]*(?:[eE][+-]?[0-9]+)?)\s*([A-Za-zµ]*)\s*$")


def parse_quantity(text: str) -> float:
    """Parse a number with an optional SI-prefixed unit suffix.

    '124.8 GPa' -> 1.248e11, '1mm' -> 1e-3, '2MHz' -> 2e6, '1 ns' -> 1e-9,
    '350' -> 350.0.  Composite units are not supported; bare numbers mean
    the SI base unit of the key.
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _QUANTITY_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    value = float(m.group(1))
    suffix = m.group(2)
    if not suffix:
        return value
    for unit in sorted(_UNITS, key=len, reverse=True):
        if suffix.endswith(unit):
            prefix = suffix[: -len(unit)]
            if prefix in _PREFIXES:
                return value * _PREFIXES[prefix]
    raise ConfigError(f"unknown unit suffix {suffix!r} in {text!r}")


_DEFAULTS = {
    "material.C0": CERAMIC.C0,
    "material.rho": CERAMIC.rho,
    "material.tau": CERAMIC.tau,
    "material.c_heat": CERAMIC.c_heat,
    "material.lambda_th": CERAMIC.lambda_th,
    "law.kind": "constant",
    "grid.L": 1e-3,
    "grid.N": 101,
    "grid.stability_factor": 2.5,
    "run.steps": 10_000,
    "run.overflow_limit": 1e12,
    "excitation.frequency": 2e6,
    "excitation.amplitude": 2e-3,
    "excitation.mode": "force",
    "excitation.coupling": 0.02,
    "output.series_stride": 10,
    "output.snapshot_stride": 2500,
    "initial.u_sine_amplitude": 0.0,
    "initial.u_sine_mode": 1,
}

_LAW_KEYS = {"law.kind", "law.k", "law.p", "law.alpha", "law.b"}
_STRING_KEYS = {"law.kind", "excitation.mode"}
_INT_KEYS = {
    "grid.N", "run.steps", "excitation.node",
    "output.series_stride", "output.snapshot_stride", "initial.u_sine_mode",
}


def read_config_file(path: str) -> dict:
    """Flat dotted-key dict from an INI file (values still strings)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    return flat


def apply_overrides(flat: dict, overrides) -> dict:
    """Apply repeatable ``key=value`` strings onto a flat dict."""
    out = dict(flat)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." not in key:
            raise ConfigError(f"override key {key!r} must be section.field")
        out[key] = value.strip()
    return out


def _get(flat: dict, key: str):
    value = flat.get(key, _DEFAULTS.get(key))
    if value is None:
        return None
    if key in _STRING_KEYS:
        return str(value).strip().lower()
    try:
        number = parse_quantity(value)
    except ConfigError as exc:
        raise ConfigError(f"field {key!r}: {exc}") from exc
    if key in _INT_KEYS:
        if number != int(number):
            raise ConfigError(f"field {key!r} must be an integer, got {value!r}")
        return int(number)
    return number


def _parse_law(flat: dict) -> TemperatureLaw:
    kind = _get(flat, "law.kind")
    try:
        if kind in ("constant", "const"):
            return Constant()
        if kind in ("power", "powerlaw", "power-law"):
            return PowerLaw(k=_get(flat, "law.k") or 0.0, p=_get(flat, "law.p") or 1.0)
        if kind in ("exponential", "exp"):
            if _get(flat, "law.alpha") is None:
                raise ConfigError("field 'law.alpha': required for the exponential law")
            return Exponential(alpha=_get(flat, "law.alpha"), b=_get(flat, "law.b") or 0.0)
    except ValueError as exc:
        raise ConfigError(f"law: {exc}") from exc
    raise ConfigError(f"field 'law.kind': unknown law {kind!r}")


def _parse_probes(flat: dict, N: int) -> tuple:
    raw = flat.get("output.probes")
    if raw is None:
        return ()
    if isinstance(raw, (tuple, list)):
        return tuple(int(p) for p in raw)
    items = [s for s in re.split(r"[,\s]+", str(raw).strip()) if s]
    try:
        return tuple(int(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"field 'output.probes': {exc}") from exc


def build_sim_config(flat: dict) -> SimConfig:
    """Construct a validated SimConfig from a flat dotted-key dict."""
    try:
        material = MaterialParams(
            C0=_get(flat, "material.C0"),
            rho=_get(flat, "material.rho"),
            tau=_get(flat, "material.tau"),
            c_heat=_get(flat, "material.c_heat"),
            lambda_th=_get(flat, "material.lambda_th"),
        )
        law = _parse_law(flat)
        N = _get(flat, "grid.N")
        node = _get(flat, "excitation.node")
        excitation = Excitation(
            frequency=_get(flat, "excitation.frequency"),
            amplitude=_get(flat, "excitation.amplitude"),
            node=node if node is not None else N // 2,
            mode=_get(flat, "excitation.mode"),
            coupling=_get(flat, "excitation.coupling"),
        )
        output = OutputSpec(
            series_stride=_get(flat, "output.series_stride"),
            snapshot_stride=_get(flat, "output.snapshot_stride"),
            probes=_parse_probes(flat, N),
        )
        initial = InitialConditions(
            u_sine_amplitude=_get(flat, "initial.u_sine_amplitude"),
            u_sine_mode=_get(flat, "initial.u_sine_mode"),
        )
        return SimConfig(
            material=material,
            law=law,
            L=_get(flat, "grid.L"),
            N=N,
            steps=_get(flat, "run.steps"),
            excitation=excitation,
            stability_factor=_get(flat, "grid.stability_factor"),
            output=output,
            initial=initial,
            overflow_limit=_get(flat, "run.overflow_limit"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, overrides=(), steps: int = None) -> SimConfig:
    flat = apply_overrides(read_config_file(path), overrides)
    if steps is not None:
        flat["run.steps"] = steps
    return build_sim_config(flat)


def law_to_flat(law: TemperatureLaw) -> dict:
    if isinstance(law, Constant):
        return {"law.kind": "constant"}
    if isinstance(law, PowerLaw):
        return {"law.kind": "power", "law.k": law.k, "law.p": law.p}
    if isinstance(law, Exponential):
        return {"law.kind": "exponential", "law.alpha": law.alpha, "law.b": law.b}
    raise TypeError(f"unknown law {law!r}")


def config_to_flat(config: SimConfig) -> dict:
    """Flat dotted-key echo of a SimConfig (the record.json config block)."""
    flat = {
        "material.C0": config.material.C0,
        "material.rho": config.material.rho,
        "material.tau": config.material.tau,
        "material.c_heat": config.material.c_heat,
        "material.lambda_th": config.material.lambda_th,
        "grid.L": config.L,
        "grid.N": config.N,
        "grid.stability_factor": config.stability_factor,
        "run.steps": config.steps,
        "run.overflow_limit": config.overflow_limit,
        "excitation.frequency": config.excitation.frequency,
        "excitation.amplitude": config.excitation.amplitude,
        "excitation.node": config.excitation.node,
        "excitation.mode": config.excitation.mode,
        "excitation.coupling": config.excitation.coupling,
        "output.series_stride": config.output.series_stride,
        "output.snapshot_stride": config.output.snapshot_stride,
        "output.probes": ",".join(str(p) for p in config.output.probes),
        "initial.u_sine_amplitude": config.initial.u_sine_amplitude,
        "initial.u_sine_mode": config.initial.u_sine_mode,
    }
    flat.update(law_to_flat(config.law))
    return flat


def read_sweep_section(path: str) -> dict:
    """The [sweep] section of a config file as a plain dict (strings)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not parser.has_section("sweep"):
        raise ConfigError(f"config {path!r} has no [sweep] section")
    return dict(parser.items("sweep"))
