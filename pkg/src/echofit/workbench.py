"""Experiment configs, the synthetic noise model and the simulate dispatcher.

Config documents are JSON objects::

    {
      "sequence": "pe2",                      # shb | pe2 | pe3 | mc3pe | power_series
      "params": {"gamma1": 1.3e6, ...},       # DephasingParams fields, SI units
      "env": {"field_b": 2.2, "temperature": 0.15},
      "grid": {"start": 0, "stop": 5e-6, "count": 501, "spacing": "linear"},
      "noise": {"relative_sigma": 0.03, "floor_sigma": 0.0},
      "seed": 7,
      "sequence_options": {"t12": 5e-8, "n_traj": 10000, "p_sat": 1.0, "i0": 1.0},
      "metadata": {"alpha_L": 0.9, "wavelength_nm": 1532}
    }

Everything except ``sequence`` has a default. Unknown keys are rejected at
every level and all validation failures are reported together.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .physics import DephasingParams, Environment
from .rng import normals
from .sequences import (
    Curve,
    HoleSpectrum,
    Pe3Surface,
    mc_sudden_jump_echo,
    simulate_2pe_decay,
    simulate_3pe_surface,
    simulate_power_broadening_series,
    simulate_shb_spectrum,
)

SEQUENCES = ("shb", "pe2", "pe3", "mc3pe", "power_series")

DEFAULT_GRIDS = {
    "shb": {"start": -50e6, "stop": 50e6, "count": 801, "spacing": "linear"},
    "pe2": {"start": 0.0, "stop": 5e-6, "count": 501, "spacing": "linear"},
    "pe3": {"start": 1e-6, "stop": 30e-3, "count": 30, "spacing": "log"},
    "mc3pe": {"start": 1e-6, "stop": 1e-3, "count": 12, "spacing": "log"},
    "power_series": {"start": 0.2, "stop": 0.8, "count": 4, "spacing": "linear"},
}
DEFAULT_OPTIONS = {"t12": 50e-9, "n_traj": 10000, "p_sat": 1.0, "i0": 1.0}
DEFAULT_METADATA = {"alpha_L": 0.9, "wavelength_nm": 1532.0}


@dataclass(frozen=True)
class NoiseSpec:
    relative_sigma: float = 0.0
    floor_sigma: float = 0.0

    def __post_init__(self):
        bad = [f"{n}: must be a finite number >= 0" for n in ("relative_sigma", "floor_sigma")
               if not _is_number(getattr(self, n)) or not getattr(self, n) >= 0]
        if bad:
            raise ConfigError(bad)

    @property
    def noiseless(self) -> bool:
        return self.relative_sigma == 0 and self.floor_sigma == 0


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    sequence: str
    params: DephasingParams = field(default_factory=DephasingParams)
    env: Environment = field(default_factory=Environment)
    grid: Optional[GridSpec] = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    sequence_options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))
    metadata: dict = field(default_factory=lambda: dict(DEFAULT_METADATA))

    def grid_values(self) -> np.ndarray:
        grid = self.grid or GridSpec(**DEFAULT_GRIDS[self.sequence])
        return grid.values()


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_keys(obj, allowed, path, errors):
    for key in obj:
        if key not in allowed:
            errors.append(f"{path}{key}: unknown key")


def _section(doc, key, errors) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        errors.append(f"{key}: expected an object")
        return {}
    return value


def _numbers(section, path, names, errors, ints=()):
    out = {}
    for name in names:
        if name not in section:
            continue
        v = section[name]
        if name in ints:
            if not isinstance(v, int) or isinstance(v, bool):
                errors.append(f"{path}.{name}: expected an integer, got {v!r}")
                continue
        elif not _is_number(v):
            errors.append(f"{path}.{name}: expected a finite number, got {v!r}")
            continue
        out[name] = v
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a JSON experiment config.

    Raises :class:`ConfigError` listing every problem (with dotted field
    paths, or line/column for JSON syntax errors).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    errors: list[str] = []
    _check_keys(doc, ("sequence", "params", "env", "grid", "noise", "seed", "sequence_options", "metadata"),
                "", errors)

    sequence = doc.get("sequence")
    if sequence not in SEQUENCES:
        errors.append(f"sequence: must be one of {list(SEQUENCES)}, got {sequence!r}")
        sequence = None

    # params
    raw = _section(doc, "params", errors)
    names = DephasingParams.field_names()
    _check_keys(raw, names, "params.", errors)
    kwargs = {}
    for name in names:
        if name not in raw:
            continue
        v = raw[name]
        if name == "shb_linewidth":
            kwargs[name] = v
        elif name == "t2" and v is None:
            kwargs[name] = None
        elif _is_number(v):
            kwargs[name] = float(v)
        else:
            errors.append(f"params.{name}: expected a finite number, got {v!r}")
    params = None
    try:
        params = DephasingParams(**kwargs)
    except ConfigError as exc:
        errors.extend(exc.prefixed("params").errors)

    raw = _section(doc, "env", errors)
    _check_keys(raw, ("field_b", "temperature"), "env.", errors)
    env = None
    env_kwargs = _numbers(raw, "env", ("field_b", "temperature"), errors)
    try:
        env = Environment(**{k: float(v) for k, v in env_kwargs.items()})
    except ConfigError as exc:
        errors.extend(exc.prefixed("env").errors)

    grid = None
    if "grid" in doc:
        raw = _section(doc, "grid", errors)
        _check_keys(raw, ("start", "stop", "count", "spacing"), "grid.", errors)
        g = dict(DEFAULT_GRIDS.get(sequence, DEFAULT_GRIDS["pe2"]))
        g.update(_numbers(raw, "grid", ("start", "stop", "count"), errors, ints=("count",)))
        if "spacing" in raw:
            g["spacing"] = raw["spacing"]
        grid = g
    elif sequence:
        grid = dict(DEFAULT_GRIDS[sequence])
    if grid is not None:
        if grid["spacing"] not in ("linear", "log"):
            errors.append(f"grid.spacing: must be 'linear' or 'log', got {grid['spacing']!r}")
        if grid["count"] < 2:
            errors.append(f"grid.count: must be >= 2, got {grid['count']}")
        if not grid["stop"] > grid["start"]:
            errors.append("grid.stop: must be greater than grid.start")
        if grid["spacing"] == "log" and not grid["start"] > 0:
            errors.append("grid.start: log spacing requires start > 0")
        if sequence == "shb":
            if grid["spacing"] != "linear" or grid["start"] != -grid["stop"]:
                errors.append("grid: shb detuning grid must be linear and symmetric (start == -stop)")
        elif sequence and grid["start"] < 0:
            errors.append(f"grid.start: must be >= 0 for {sequence}")

    raw = _section(doc, "noise", errors)
    _check_keys(raw, ("relative_sigma", "floor_sigma"), "noise.", errors)
    noise = None
    vals = _numbers(raw, "noise", ("relative_sigma", "floor_sigma"), errors)
    try:
        noise = NoiseSpec(**{k: float(v) for k, v in vals.items()})
    except ConfigError as exc:
        errors.extend(exc.prefixed("noise").errors)

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        errors.append(f"seed: expected an integer in [0, 2**64), got {seed!r}")

    raw = _section(doc, "sequence_options", errors)
    _check_keys(raw, DEFAULT_OPTIONS, "sequence_options.", errors)
    options = dict(DEFAULT_OPTIONS)
    options.update(_numbers(raw, "sequence_options", DEFAULT_OPTIONS, errors, ints=("n_traj",)))
    for key in ("t12", "p_sat", "i0"):
        if not options[key] > 0:
            errors.append(f"sequence_options.{key}: must be > 0")
    if options["n_traj"] < 1:
        errors.append("sequence_options.n_traj: must be >= 1")

    metadata = doc.get("metadata", dict(DEFAULT_METADATA))
    if not isinstance(metadata, dict):
        errors.append("metadata: expected an object")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(sequence, params, env, GridSpec(**grid), noise, seed, options, metadata)


def add_noise(curve: Curve, spec: NoiseSpec, seed: int) -> Curve:
    """y' = y (1 + eps) + eta with eps ~ N(0, relative^2), eta ~ N(0, floor^2).

    ``sigma`` becomes sqrt((relative * y)^2 + floor^2), combined in
    quadrature with any uncertainty already present.
    """
    if spec.noiseless:
        return curve
    n = len(curve)
    eps = normals(seed, n, 0) * spec.relative_sigma
    eta = normals(seed, n, 1) * spec.floor_sigma
    y = curve.y * (1.0 + eps) + eta
    sigma = np.sqrt((spec.relative_sigma * curve.y) ** 2 + spec.floor_sigma**2)
    if curve.sigma is not None:
        sigma = np.hypot(sigma, curve.sigma)
    return Curve(curve.x, y, sigma, curve.axis_kind, dict(curve.meta))


def simulate(config: ExperimentConfig):
    """Run the configured sequence; returns a Curve, HoleSpectrum or Pe3Surface (noise applied)."""
    p, env, grid, opts = config.params, config.env, config.grid_values(), config.sequence_options
    seq = config.sequence
    if seq == "shb":
        out = simulate_shb_spectrum(p, env, grid)
        noisy = add_noise(out.to_curve(), config.noise, config.seed)
        return HoleSpectrum(out.detuning, noisy.y, out.central_fwhm, out.side_offset, out.side_depth,
                            out.gamma_h, out.laser_fwhm, noisy.sigma)
    if seq == "pe2":
        curve = simulate_2pe_decay(p, env, grid, i0=opts["i0"])
        return add_noise(curve, config.noise, config.seed)
    if seq == "power_series":
        curve = simulate_power_broadening_series(p, env, grid, p_sat=opts["p_sat"])
        return add_noise(curve, config.noise, config.seed)
    if seq == "pe3":
        surface = simulate_3pe_surface(p, opts["t12"], grid)
    else:
        surface = mc_sudden_jump_echo(p, env, opts["t12"], grid, opts["n_traj"], config.seed)
    noisy = add_noise(surface.to_curve(), config.noise, config.seed)
    return Pe3Surface(surface.t12, noisy.x, noisy.y, noisy.sigma if noisy.sigma is not None else surface.sigma)


def as_curve(data) -> Curve:
    if isinstance(data, Curve):
        return data
    return data.to_curve()
