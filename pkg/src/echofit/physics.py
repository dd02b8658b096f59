"""Closed-form dephasing and linewidth models.

Every frequency is in Hz, every time in seconds, fields in tesla and
temperatures in kelvin. Nothing here does I/O or holds state.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from .constants import BOHR_MAGNETON, BOLTZMANN
from .errors import ConfigError, DomainError

SHB_MODELS = ("activation", "spectral_diffusion")

# field name -> (lower bound, strict)
_LOWER = {
    "a": (0.0, True),
    "mu": (0.0, False),
    "gamma_tls1": (0.0, False),
    "g_eff": (0.0, False),
    "gamma0": (0.0, True),
    "gamma1": (0.0, False),
    "rate_r": (0.0, False),
    "t1": (0.0, True),
    "shf_slope": (0.0, True),
    "mod_slope": (0.0, False),
    "mod_depth": (0.0, False),
    "mod_damp_sigma": (0.0, False),
    "side_hole_depth": (0.0, False),
    "laser_fwhm": (0.0, False),
}
_UNIT_INTERVAL = ("mod_depth", "side_hole_depth")


@dataclass(frozen=True)
class DephasingParams:
    """All physical model parameters in SI units.

    Defaults follow the Er:silicate fiber values (Gamma0 = 0.4 MHz,
    Gamma1 = 1.3 MHz, R = 0.026 /us, T1 = 6.7 ms, 12.3 MHz/T side-hole
    splitting, 10.6 MHz/T echo modulation, g_eff = 5). ``a`` is chosen so
    that the zero-field power law gives 8 MHz at 2 K.

    ``t2`` optionally pins the two-pulse echo coherence time; when ``None``
    it follows from :func:`activation_linewidth`. ``shb_linewidth`` selects
    which homogeneous linewidth the hole-burning simulator uses.
    """

    a: float = 8.0e6 / 2.0**1.4
    mu: float = 0.4
    gamma_tls1: float = 6.0e6
    g_eff: float = 5.0
    gamma0: float = 0.4e6
    gamma1: float = 1.3e6
    rate_r: float = 2.6e4
    t1: float = 6.7e-3
    shf_slope: float = 12.3e6
    mod_slope: float = 10.6e6
    mod_depth: float = 0.5
    mod_damp_sigma: float = 5.0e6
    side_hole_depth: float = 0.2
    laser_fwhm: float = 0.75e6
    t2: Optional[float] = None
    shb_linewidth: str = "activation"

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self) -> list[str]:
        out = []
        for name, (lo, strict) in _LOWER.items():
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                out.append(f"{name}: expected a number, got {value!r}")
                continue
            if not math.isfinite(value):
                out.append(f"{name}: must be finite")
            elif strict and value <= lo:
                out.append(f"{name}: must be > {lo:g}, got {value!r}")
            elif not strict and value < lo:
                out.append(f"{name}: must be >= {lo:g}, got {value!r}")
            elif name in _UNIT_INTERVAL and value > 1.0:
                out.append(f"{name}: must be <= 1, got {value!r}")
        if self.t2 is not None and not (isinstance(self.t2, (int, float)) and self.t2 > 0):
            out.append(f"t2: must be > 0 or null, got {self.t2!r}")
        if self.shb_linewidth not in SHB_MODELS:
            out.append(f"shb_linewidth: must be one of {SHB_MODELS}, got {self.shb_linewidth!r}")
        return out

    def replace(self, **changes) -> "DephasingParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class Environment:
    field_b: float = 0.0
    temperature: float = 0.5

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self) -> list[str]:
        out = []
        for name in ("field_b", "temperature"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                out.append(f"{name}: expected a finite number, got {value!r}")
        if not out:
            if self.field_b < 0:
                out.append(f"field_b: must be >= 0, got {self.field_b!r}")
            if self.temperature <= 0:
                out.append(f"temperature: must be > 0, got {self.temperature!r}")
        return out


def _positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise DomainError(f"{name} must be > 0, got {value!r}")


def linewidth_to_t2(gamma_h):
    """Coherence time T2 = 1/(pi * gamma_h) for a homogeneous linewidth in Hz."""
    _positive("gamma_h", gamma_h)
    return 1.0 / (np.pi * np.asarray(gamma_h, dtype=float))[()]


def t2_to_linewidth(t2):
    _positive("t2", t2)
    return 1.0 / (np.pi * np.asarray(t2, dtype=float))[()]


def t2_from_decay_constant(tau):
    """Two-pulse echo intensity decays as exp(-t12/tau) with T2 = 4 tau."""
    _positive("tau", tau)
    return 4.0 * np.asarray(tau, dtype=float)[()]


def tls_powerlaw_linewidth(a, mu, temperature):
    """Field-independent TLS linewidth a * T**(1 + mu)."""
    _positive("a", a)
    _positive("temperature", temperature)
    if not np.all(np.asarray(mu) >= 0):
        raise DomainError(f"mu must be >= 0, got {mu!r}")
    return (a * np.asarray(temperature, dtype=float) ** (1.0 + mu))[()]


def zeeman_boltzmann_exponent(g_eff, field_b, temperature):
    """g_eff * mu_B * B / (k T), the argument of the activation factor."""
    _positive("temperature", temperature)
    return g_eff * BOHR_MAGNETON * np.asarray(field_b, dtype=float) / (BOLTZMANN * np.asarray(temperature, dtype=float))


def activation_linewidth(params: DephasingParams, env: Environment):
    """Thermal activation law for the field-dependent homogeneous linewidth.

    Gamma_h = a T^(1+mu) + Gamma_TLS1 * exp(-g_eff mu_B B / kT).
    """
    if env.temperature <= 0:
        raise DomainError(f"temperature must be > 0, got {env.temperature!r}")
    base = tls_powerlaw_linewidth(params.a, params.mu, env.temperature)
    x = zeeman_boltzmann_exponent(params.g_eff, env.field_b, env.temperature)
    return float(base + params.gamma_tls1 * np.exp(-x))


def activation_law(field_b, gamma_tls0, gamma_tls1, g_eff, temperature):
    """Vectorized activation law with the field-independent part as a constant."""
    x = zeeman_boltzmann_exponent(g_eff, field_b, temperature)
    return gamma_tls0 + gamma_tls1 * np.exp(-x)


def spectral_diffusion_linewidth(params: DephasingParams, t23):
    """Gamma0 + Gamma1/2 * (1 - exp(-R t23)), the waiting-time dependent linewidth."""
    t23 = np.asarray(t23, dtype=float)
    if np.any(t23 < 0):
        raise DomainError("t23 must be >= 0")
    return (params.gamma0 + 0.5 * params.gamma1 * -np.expm1(-params.rate_r * t23))[()]


def superhyperfine_splitting(slope, field_b):
    """Linear side-hole (or echo-modulation) frequency slope * B."""
    _positive("slope", slope)
    field_b = np.asarray(field_b, dtype=float)
    if np.any(field_b < 0):
        raise DomainError("field_b must be >= 0")
    return (slope * field_b)[()]


def shb_linewidth_from_sd_model(params: DephasingParams) -> float:
    """Saturated hole-burning linewidth Gamma0 + Gamma1 (limit R t23 >> 1)."""
    return params.gamma0 + params.gamma1


def shb_homogeneous_linewidth(params: DephasingParams, env: Environment) -> float:
    """Linewidth seen by hole burning under the configured model."""
    if params.shb_linewidth == "spectral_diffusion":
        return shb_linewidth_from_sd_model(params)
    return activation_linewidth(params, env)


def echo_t2(params: DephasingParams, env: Environment) -> float:
    if params.t2 is not None:
        return float(params.t2)
    return float(linewidth_to_t2(activation_linewidth(params, env)))
