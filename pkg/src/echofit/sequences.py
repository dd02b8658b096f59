"""Forward models for hole burning, two- and three-pulse echoes.

All simulators return noiseless data; see :mod:`echofit.workbench` for the
noise model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import voigt_profile

from .errors import ConfigError
from .physics import (
    DephasingParams,
    Environment,
    echo_t2,
    shb_homogeneous_linewidth,
    spectral_diffusion_linewidth,
    superhyperfine_splitting,
)
from .rng import Xoshiro256, stream_key

FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


class AxisKind(str, enum.Enum):
    TIME_DELAY = "time_delay"
    DETUNING = "detuning"
    FIELD = "field"
    TEMPERATURE = "temperature"
    POWER = "power"

    @property
    def unit(self) -> str:
        return _AXIS_UNITS[self]


_AXIS_UNITS = {
    AxisKind.TIME_DELAY: "s",
    AxisKind.DETUNING: "Hz",
    AxisKind.FIELD: "T",
    AxisKind.TEMPERATURE: "K",
    AxisKind.POWER: "relative",
}


def _as_grid(values, name, allow_negative=True) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{name}: expected a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name}: contains non-finite values")
    if np.any(np.diff(arr) <= 0):
        raise ConfigError(f"{name}: must be strictly increasing")
    if not allow_negative and arr[0] < 0:
        raise ConfigError(f"{name}: values must be >= 0")
    return arr


@dataclass
class Curve:
    """A sampled 1-D signal with optional 1-sigma uncertainties (zero marks an exact sample).

    ``y`` is an intensity for echo decays and a frequency in Hz for
    linewidth series. ``meta`` carries free-form labels (field, temperature)
    that survive serialization.
    """

    x: np.ndarray
    y: np.ndarray
    sigma: Optional[np.ndarray] = None
    axis_kind: AxisKind = AxisKind.TIME_DELAY
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_kind = AxisKind(self.axis_kind)
        self.x = _as_grid(self.x, "x")
        self.y = np.asarray(self.y, dtype=float)
        if self.y.shape != self.x.shape:
            raise ConfigError(f"y: length {self.y.size} does not match x length {self.x.size}")
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if self.sigma.shape != self.x.shape:
                raise ConfigError("sigma: length does not match x")
            if not np.all(self.sigma >= 0):
                raise ConfigError("sigma: uncertainties must be >= 0")

    def __len__(self):
        return self.x.size

    def window(self, lo=-np.inf, hi=np.inf) -> "Curve":
        keep = (self.x >= lo) & (self.x <= hi)
        return Curve(self.x[keep], self.y[keep], None if self.sigma is None else self.sigma[keep],
                     self.axis_kind, dict(self.meta))

    def scaled(self, c: float) -> "Curve":
        return Curve(self.x, self.y * c, None if self.sigma is None else self.sigma * abs(c),
                     self.axis_kind, dict(self.meta))


@dataclass
class Pe3Surface:
    """Three-pulse echo peak intensity versus t23 at one fixed t12.

    ``sigma`` may hold Monte Carlo standard errors, which can be zero.
    """

    t12: float
    t23_grid: np.ndarray
    intensity: np.ndarray
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.t12 > 0:
            raise ConfigError(f"t12: must be > 0, got {self.t12!r}")
        self.t12 = float(self.t12)
        self.t23_grid = _as_grid(self.t23_grid, "t23_grid", allow_negative=False)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.intensity.shape != self.t23_grid.shape:
            raise ConfigError("intensity: length does not match t23_grid")
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if self.sigma.shape != self.t23_grid.shape or np.any(self.sigma < 0):
                raise ConfigError("sigma: must match t23_grid and be >= 0")

    def to_curve(self) -> Curve:
        sigma = self.sigma
        return Curve(self.t23_grid, self.intensity, sigma, AxisKind.TIME_DELAY,
                     {"kind": "pe3_surface", "t12": self.t12})

    @classmethod
    def from_curve(cls, curve: Curve, t12: Optional[float] = None) -> "Pe3Surface":
        t12 = curve.meta.get("t12") if t12 is None else t12
        if t12 is None:
            raise ConfigError("t12: missing; a 3PE surface needs the fixed t12 delay")
        return cls(float(t12), curve.x, curve.y, curve.sigma)


@dataclass
class HoleSpectrum:
    """Transmission change versus laser detuning.

    ``central_fwhm`` is the full width of the central hole including laser
    jitter; ``gamma_h`` is the homogeneous linewidth it was built from.
    """

    detuning: np.ndarray
    transmission_change: np.ndarray
    central_fwhm: float
    side_offset: float
    side_depth: float
    gamma_h: float = float("nan")
    laser_fwhm: float = 0.0
    sigma: Optional[np.ndarray] = None

    def to_curve(self) -> Curve:
        meta = {"kind": "hole_spectrum", "central_fwhm": self.central_fwhm,
                "side_offset": self.side_offset, "side_depth": self.side_depth,
                "gamma_h": self.gamma_h, "laser_fwhm": self.laser_fwhm}
        return Curve(self.detuning, self.transmission_change, self.sigma, AxisKind.DETUNING, meta)

    @classmethod
    def from_curve(cls, curve: Curve) -> "HoleSpectrum":
        m = curve.meta
        return cls(curve.x, curve.y, float(m.get("central_fwhm", "nan")),
                   float(m.get("side_offset", "nan")), float(m.get("side_depth", "nan")),
                   float(m.get("gamma_h", "nan")), float(m.get("laser_fwhm", 0.0)), curve.sigma)


# -- line shapes -------------------------------------------------------------

VOIGT_NEGLIGIBLE = 1e-10

def jitter_gaussian_fwhm(laser_fwhm: float) -> float:
    """Burn and read each add laser jitter, so the hole sees sqrt(2) * laser width."""
    return np.sqrt(2.0) * laser_fwhm


def voigt_peak_normalized(x, lorentz_fwhm: float, gauss_fwhm: float):
    """Voigt line of unit peak height."""
    sigma = gauss_fwhm / FWHM_PER_SIGMA
    gamma = 0.5 * lorentz_fwhm
    x = np.asarray(x, dtype=float)
    # the Faddeeva evaluation loses the smaller width entirely at extreme ratios
    if sigma <= VOIGT_NEGLIGIBLE * gamma:
        return 1.0 / (1.0 + (x / gamma) ** 2)
    if gamma <= VOIGT_NEGLIGIBLE * sigma:
        return np.exp(-0.5 * (x / sigma) ** 2)
    return voigt_profile(x, sigma, gamma) / voigt_profile(0.0, sigma, gamma)


def voigt_fwhm(lorentz_fwhm: float, gauss_fwhm: float) -> float:
    """Exact full width at half maximum of a Voigt profile."""
    if gauss_fwhm <= 0:
        return float(lorentz_fwhm)
    if lorentz_fwhm <= 0:
        return float(gauss_fwhm)
    hi = lorentz_fwhm + gauss_fwhm
    half = brentq(lambda x: voigt_peak_normalized(x, lorentz_fwhm, gauss_fwhm) - 0.5,
                  0.0, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    return 2.0 * half


def hole_profile(detuning, amplitude, lorentz_fwhm, gauss_fwhm, side_offset, side_depth):
    """Central hole plus two side holes at +/- ``side_offset`` of relative depth ``side_depth``."""
    detuning = np.asarray(detuning, dtype=float)
    if side_offset == 0:
        return amplitude * (1.0 + 2.0 * side_depth) * voigt_peak_normalized(detuning, lorentz_fwhm, gauss_fwhm)
    shape = voigt_peak_normalized(detuning, lorentz_fwhm, gauss_fwhm)
    shape = shape + side_depth * (voigt_peak_normalized(detuning - side_offset, lorentz_fwhm, gauss_fwhm)
                                  + voigt_peak_normalized(detuning + side_offset, lorentz_fwhm, gauss_fwhm))
    return amplitude * shape


def symmetric_grid(half_width: float, count: int) -> np.ndarray:
    return np.linspace(-half_width, half_width, count)


# -- simulators --------------------------------------------------------------

def simulate_shb_spectrum(params: DephasingParams, env: Environment, grid: Sequence[float]) -> HoleSpectrum:
    """Hole-burning spectrum with superhyperfine side holes.

    The central hole is a Lorentzian of FWHM 2 * Gamma_h convolved with a
    Gaussian of FWHM sqrt(2) * laser_fwhm. At zero field the side holes sit
    on top of the central one and are folded into its depth.
    """
    grid = _as_grid(grid, "grid")
    scale = np.max(np.abs(grid))
    if not np.allclose(grid, -grid[::-1], rtol=0.0, atol=1e-9 * scale):
        raise ConfigError("grid: detuning grid must be symmetric about zero")
    gamma_h = shb_homogeneous_linewidth(params, env)
    lorentz = 2.0 * gamma_h
    gauss = jitter_gaussian_fwhm(params.laser_fwhm)
    offset = float(superhyperfine_splitting(params.shf_slope, env.field_b))
    y = hole_profile(grid, 1.0, lorentz, gauss, offset, params.side_hole_depth)
    return HoleSpectrum(grid, y, voigt_fwhm(lorentz, gauss), offset, params.side_hole_depth,
                        gamma_h, params.laser_fwhm)


def modulation_factor(params: DephasingParams, env: Environment, t12):
    """Damped single-sideband envelope modulation, 1 - d sin^2(pi f t) exp(-2 pi^2 s^2 t^2)."""
    t12 = np.asarray(t12, dtype=float)
    f_m = params.mod_slope * env.field_b
    damp = np.exp(-2.0 * np.pi**2 * params.mod_damp_sigma**2 * t12**2)
    return 1.0 - params.mod_depth * np.sin(np.pi * f_m * t12) ** 2 * damp


def simulate_2pe_decay(params: DephasingParams, env: Environment, t12_grid: Sequence[float],
                       i0: float = 1.0) -> Curve:
    """Two-pulse echo peak intensity I0 exp(-4 t12 / T2) M(t12)."""
    t12 = _as_grid(t12_grid, "t12_grid", allow_negative=False)
    t2 = echo_t2(params, env)
    y = i0 * np.exp(-4.0 * t12 / t2) * modulation_factor(params, env, t12)
    return Curve(t12, y, None, AxisKind.TIME_DELAY,
                 {"kind": "pe2_decay", "field_b": env.field_b, "temperature": env.temperature, "t2": t2})


def pe3_intensity(t12, t23, gamma0, gamma1, rate_r, t1, amplitude=1.0):
    """exp(-2 t23/T1) exp(-4 pi t12 Gamma_h(t23)) with the spectral diffusion linewidth."""
    t23 = np.asarray(t23, dtype=float)
    gamma_h = gamma0 + 0.5 * gamma1 * -np.expm1(-rate_r * t23)
    return amplitude * np.exp(-2.0 * t23 / t1 - 4.0 * np.pi * t12 * gamma_h)


def simulate_3pe_surface(params: DephasingParams, t12: float, t23_grid: Sequence[float]) -> Pe3Surface:
    t23 = _as_grid(t23_grid, "t23_grid", allow_negative=False)
    if not t12 > 0:
        raise ConfigError(f"t12: must be > 0, got {t12!r}")
    gamma_h = spectral_diffusion_linewidth(params, t23)
    y = np.exp(-2.0 * t23 / params.t1) * np.exp(-4.0 * np.pi * t12 * gamma_h)
    return Pe3Surface(t12, t23, y)


def simulate_power_broadening_series(params: DephasingParams, env: Environment, powers: Sequence[float],
                                     p_sat: float = 1.0) -> Curve:
    """Hole FWHM versus excitation power, FWHM(0) * sqrt(1 + P / P_sat)."""
    powers = _as_grid(powers, "powers", allow_negative=False)
    if not p_sat > 0:
        raise ConfigError(f"p_sat: must be > 0, got {p_sat!r}")
    gamma_h = shb_homogeneous_linewidth(params, env)
    fwhm0 = voigt_fwhm(2.0 * gamma_h, jitter_gaussian_fwhm(params.laser_fwhm))
    y = fwhm0 * np.sqrt(1.0 + powers / p_sat)
    return Curve(powers, y, None, AxisKind.POWER, {"kind": "power_series", "fwhm0": fwhm0, "p_sat": p_sat})


# -- sudden-jump Monte Carlo ---------------------------------------------------

def _window_phase(gen: Xoshiro256, delta, length, rate, hwhm):
    """Phase 2 pi * integral(delta dt) over one window of a jump trajectory.

    Returns the accumulated phase and the detuning at the end of the window.
    """
    n = delta.size
    phase = np.zeros(n)
    remaining = np.full(n, float(length))
    active = np.ones(n, dtype=bool)
    while active.any():
        if rate > 0:
            wait = gen.exponential(rate, active)
        else:
            wait = np.full(n, np.inf)
        step = np.minimum(wait, remaining)
        phase = np.where(active, phase + 2.0 * np.pi * delta * step, phase)
        jumped = active & (wait < remaining)
        remaining = np.where(jumped, remaining - wait, 0.0)
        if jumped.any():
            delta = np.where(jumped, gen.cauchy(hwhm, jumped), delta)
        active = jumped
    return phase, delta


def mc_sudden_jump_echo(params: DephasingParams, env: Environment, t12: float, t23_grid: Sequence[float],
                        n_traj: int, seed: int) -> Pe3Surface:
    """Three-pulse echo intensity from a sudden-jump spectral diffusion Monte Carlo.

    Each trajectory starts at a Lorentzian detuning (FWHM Gamma1) and jumps to
    a fresh Lorentzian value at Poisson rate R. The echo amplitude is
    exp(i [phi(0, t12) - phi(t12 + t23, 2 t12 + t23)]) and the intensity is
    |<amplitude>|^2 times the population and intrinsic decay factors.

    Only the detuning entering the second window matters after the gap, and
    for a memoryless jump process it is a fresh draw if any jump occurred in
    the gap, so the gap is sampled with a single exponential waiting time.
    Trajectory ``k`` at grid point ``j`` uses stream ``(seed, j, k)``, which
    makes results independent of batching. ``sigma`` holds the standard
    error of the intensity (delta method on the mean amplitude). ``env`` is
    accepted for a uniform simulator signature; the jump model ignores it.
    """
    if int(n_traj) < 1:
        raise ConfigError(f"n_traj: must be >= 1, got {n_traj!r}")
    n_traj = int(n_traj)
    t23 = _as_grid(t23_grid, "t23_grid", allow_negative=False)
    if not t12 > 0:
        raise ConfigError(f"t12: must be > 0, got {t12!r}")
    hwhm = 0.5 * params.gamma1
    rate = params.rate_r
    traj = np.arange(n_traj, dtype=np.uint64)
    intensity = np.empty(t23.size)
    stderr = np.empty(t23.size)
    for j, gap in enumerate(t23):
        gen = Xoshiro256(stream_key(seed, j, traj))
        delta = gen.cauchy(hwhm)
        phi1, delta = _window_phase(gen, delta, t12, rate, hwhm)
        if rate > 0:
            jumped = gen.exponential(rate) < gap
            if jumped.any():
                delta = np.where(jumped, gen.cauchy(hwhm, jumped), delta)
        phi2, _ = _window_phase(gen, delta, t12, rate, hwhm)
        dphi = phi1 - phi2
        re, im = np.cos(dphi), np.sin(dphi)
        mr, mi = re.mean(), im.mean()
        intensity[j] = mr * mr + mi * mi
        if n_traj > 1:
            cov = np.cov(np.vstack([re, im]))
            g = np.array([2.0 * mr, 2.0 * mi])
            stderr[j] = np.sqrt(max(g @ cov @ g, 0.0) / n_traj)
        else:
            stderr[j] = 0.0
    decay = np.exp(-2.0 * t23 / params.t1) * np.exp(-4.0 * np.pi * t12 * params.gamma0)
    return Pe3Surface(t12, t23, intensity * decay, stderr * decay)


def effective_linewidth(surface: Pe3Surface, t1: float):
    """Linewidth implied by a 3PE intensity after removing population decay."""
    return -np.log(surface.intensity * np.exp(2.0 * surface.t23_grid / t1)) / (4.0 * np.pi * surface.t12)


def with_noise_curve(spectrum: HoleSpectrum, curve: Curve) -> HoleSpectrum:
    return replace(spectrum, transmission_change=curve.y, sigma=curve.sigma)
