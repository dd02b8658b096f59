"""Parameter recovery by weighted least squares and spectral analysis.

Every fitter returns a :class:`FitResult` whose uncertainties are two
standard deviations. If the data carry per-point ``sigma`` the residuals are
(y - model) / sigma and the covariance is absolute; otherwise decays and
surfaces are fitted with uniform weights on log intensity, spectra and
linewidth series on the linear scale, and the covariance is scaled by the
reduced chi-square.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InsufficientDataError, RankError
from .physics import t2_from_decay_constant, zeeman_boltzmann_exponent
from .sequences import (
    Curve,
    HoleSpectrum,
    Pe3Surface,
    hole_profile,
    jitter_gaussian_fwhm,
    voigt_fwhm,
)
from .solver import FitOptions, covariance_from_jacobian, levenberg_marquardt

PE2_MODULATION_END = 200e-9  # s; echo modulation has died out beyond this delay
DECAY_WINDOW_TAUS = 5.0

UNITS = {
    "i0": "arb", "tau": "s", "t2": "s", "f_m": "Hz", "slope": "y/x", "intercept": "y",
    "a": "Hz K^-exponent", "exponent": "1", "gamma_tls0": "Hz", "gamma_tls1": "Hz",
    "g_eff": "1", "amplitude": "arb", "gamma0": "Hz", "gamma1": "Hz", "rate_r": "1/s",
    "t1": "s", "gamma_h": "Hz", "side_offset": "Hz", "side_depth": "1", "central_fwhm": "Hz",
}


@dataclass
class FitResult:
    names: list
    values: np.ndarray
    covariance: np.ndarray
    residual_rms: float = 0.0
    iterations: int = 0
    converged: bool = True
    flags: list = field(default_factory=list)
    fixed: list = field(default_factory=list)
    max_iterations: int = 200

    def __post_init__(self):
        self.names = list(self.names)
        self.values = np.asarray(self.values, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float).reshape(len(self.names), len(self.names))

    @property
    def two_sigma(self) -> np.ndarray:
        return 2.0 * np.sqrt(np.diag(self.covariance))

    @property
    def units(self) -> dict:
        return {n: UNITS.get(n, "") for n in self.names}

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def error(self, name: str) -> float:
        """Two-sigma uncertainty of one parameter."""
        return float(self.two_sigma[self.names.index(name)])

    def as_dict(self) -> dict:
        return {n: (self[n], self.error(n)) for n in self.names}

    @classmethod
    def from_values(cls, names, values, two_sigma=None, **kw) -> "FitResult":
        values = np.asarray(values, dtype=float)
        two_sigma = np.zeros_like(values) if two_sigma is None else np.asarray(two_sigma, dtype=float)
        return cls(names, values, np.diag((two_sigma / 2.0) ** 2), **kw)


def _extend(names, values, cov, name, value, grad):
    """Append a derived quantity with gradient ``grad`` w.r.t. the existing parameters."""
    grad = np.asarray(grad, dtype=float)
    nz = grad != 0
    with np.errstate(invalid="ignore"):
        row = cov[:, nz] @ grad[nz]
        var = grad[nz] @ cov[np.ix_(nz, nz)] @ grad[nz]
    row = np.where(np.isnan(row), np.inf, row)
    var = np.inf if np.isnan(var) else var
    n = len(names)
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = cov
    out[n, :n] = row
    out[:n, n] = row
    out[n, n] = var
    return names + [name], np.append(values, value), out


def _usable_sigma(sigma):
    """Per-point sigma for weighting; zeros (exact samples) are raised to the smallest nonzero value."""
    if sigma is None:
        return None
    sigma = np.asarray(sigma, dtype=float)
    nonzero = sigma[sigma > 0]
    if nonzero.size == 0:
        return None
    return np.where(sigma > 0, sigma, nonzero.min())


def _weights(y, sigma, log_space):
    """Per-point scale for residuals; log-space scale is sigma / y."""
    if sigma is None:
        return np.ones_like(y), False
    if not log_space:
        return sigma, True
    with np.errstate(divide="ignore", invalid="ignore"):
        return sigma / y, True


def _rms(r) -> float:
    return float(np.sqrt(np.mean(r * r))) if r.size else 0.0


# -- exponential decay ----------------------------------------------------------

def _positive_for_start(y, sigma, need):
    """Mask of samples usable for a log-space start.

    Without sigma the fit itself is done on log intensities, so every sample
    must be positive. With sigma the fit is in linear space and noisy
    non-positive samples are kept; only the start skips them, preferring
    samples more than one sigma above zero.
    """
    pos = y > 0
    if sigma is None and not pos.all():
        raise DomainError("intensities must be > 0 when no sigma is given")
    if sigma is not None and np.count_nonzero(y > sigma) >= need:
        pos = y > sigma
    if pos.sum() < need:
        raise DomainError(f"need >= {need} positive intensities, got {pos.sum()}")
    return pos


def _fit_log_exponential(x, y, sigma, options):
    sigma = _usable_sigma(sigma)
    if x.size < 4:
        raise InsufficientDataError(f"need >= 4 points inside the fit window, got {x.size}")
    pos = _positive_for_start(y, sigma, 2)
    s, absolute = _weights(y, sigma, log_space=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ly = np.log(y)
    w = 1.0 / s[pos] ** 2
    design = np.column_stack([np.ones(pos.sum()), -x[pos]])
    coef = np.linalg.lstsq(design * np.sqrt(w)[:, None], ly[pos] * np.sqrt(w), rcond=None)[0]
    if coef[1] <= 0:
        coef[1] = 1.0 / (x[-1] - x[0])
    p0 = np.array([np.exp(coef[0]), 1.0 / coef[1]])

    if absolute:
        def resid(p):
            return (y - p[0] * np.exp(-x / p[1])) / sigma
    else:
        def resid(p):
            return ly - np.log(p[0]) + x / p[1]

    lower, upper = options.box(["i0", "tau"], [1e-300, 1e-300], [np.inf, np.inf])
    sol = levenberg_marquardt(resid, p0, lower=lower, upper=upper, options=options)
    cov, _ = covariance_from_jacobian(sol.jacobian, sol.residual, absolute)
    return sol, cov


def _count_in(x, lo, hi) -> int:
    return int(np.count_nonzero((x >= lo) & (x <= hi)))


def fit_exponential_decay(curve: Curve, window=None, options: Optional[FitOptions] = None) -> FitResult:
    """Fit I0 exp(-t/tau) to an echo decay and report T2 = 4 tau.

    Without an explicit ``window`` the fit starts at 200 ns, where the
    superhyperfine modulation has died out, and ends at 5 tau, re-estimated
    until the window stops changing. Data without sigma are cut before the
    first non-positive sample. If the echo is gone before 200 ns the fit
    starts at zero delay and is flagged "window includes modulated region".
    """
    options = options or FitOptions()
    flags = []
    if window is None:
        lo, hi = PE2_MODULATION_END, np.inf
        if curve.sigma is None:
            nonpos = curve.x[curve.y <= 0]
            if nonpos.size:
                hi = np.nextafter(nonpos[0], -np.inf)
        if _count_in(curve.x, lo, hi) < 4:
            lo = -np.inf
            flags.append("window includes modulated region")
        for _ in range(10):
            part = curve.window(lo, hi)
            sol, cov = _fit_log_exponential(part.x, part.y, part.sigma, options)
            new_hi = min(DECAY_WINDOW_TAUS * sol.x[1], hi)
            if _count_in(curve.x, lo, new_hi) < 4 or _count_in(curve.x, lo, new_hi) == part.x.size:
                break
            hi = new_hi
    else:
        if _count_in(curve.x, *window) == 0:
            raise InsufficientDataError(f"no samples inside the fit window {tuple(window)}")
        part = curve.window(*window)
        sol, cov = _fit_log_exponential(part.x, part.y, part.sigma, options)
    names, values = ["i0", "tau"], sol.x
    names, values, cov = _extend(names, values, cov, "t2", float(t2_from_decay_constant(sol.x[1])), [0.0, 4.0])
    return FitResult(names, values, cov, _rms(sol.residual), sol.iterations, sol.converged, flags,
                     max_iterations=options.max_iterations)


# -- modulation frequency ----------------------------------------------------------

def _periodogram_peak(resid, dt, pad_factor):
    """Peak of the mirrored, zero-padded periodogram beyond the zero-frequency lobe.

    Returns (frequency, bin width, peak power, median power, spectral variance)
    or None when no interior peak exists. The refinement is a parabola through
    the log power of the three highest bins, exact for the Gaussian peaks of
    a Gaussian-damped cosine; its curvature gives the spectral variance.
    """
    # the envelope is even in t; mirroring keeps the zero-frequency lobe real and narrow
    mirrored = np.concatenate([resid[:0:-1], resid])
    nfft = int(2 ** np.ceil(np.log2(mirrored.size * pad_factor)))
    power = np.abs(np.fft.rfft(mirrored, nfft)) ** 2
    df = 1.0 / (nfft * dt)
    k0 = 1
    while k0 < power.size - 1 and not (power[k0] <= power[k0 - 1] and power[k0] <= power[k0 + 1]):
        k0 += 1
    band = power[k0:]
    if band.size < 3:
        return None
    k = k0 + int(np.argmax(band))
    if k >= power.size - 1 or not np.all(power[k - 1:k + 2] > 0):
        return None
    a, b, c = np.log(power[k - 1:k + 2])
    denom = a - 2.0 * b + c
    shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
    var = -2.0 * df**2 / denom if denom < 0 else np.inf
    return (k + shift) * df, df, power[k], float(np.median(band)), var


def _modulation_shape(t, f_m, sigma_f):
    """Relative echo change -(1 - cos 2 pi f t) exp(-2 pi^2 s^2 t^2) for unit depth/2."""
    return -(1.0 - np.cos(2.0 * np.pi * f_m * t)) * np.exp(-2.0 * np.pi**2 * sigma_f**2 * t**2)


def _unblend(t, dt, pad_factor, f0, var0, max_iter=200):
    """Remove the pull of the zero-frequency lobe on the periodogram peak.

    Finds the frequency and damping whose noiseless residual puts its
    periodogram peak at ``f0`` with spectral variance ``var0``. Returns
    (frequency, damping) or None when the search does not settle.
    """
    f, s = f0, np.sqrt(var0)
    nyquist = 0.5 / dt
    for _ in range(max_iter):
        peak = _periodogram_peak(_modulation_shape(t, f, s), dt, pad_factor)
        if peak is None or not np.isfinite(peak[4]):
            return None
        fs, df, _, _, vs = peak
        step = f0 - fs
        f = f + step
        s = min(s * np.sqrt(var0 / vs), nyquist)
        if not 0 < f < nyquist:
            return None
        if abs(step) < 1e-4 * df and abs(var0 / vs - 1.0) < 1e-6:
            return f, s
    return None


def fit_modulation_frequency(curve: Curve, early_window=(0.0, PE2_MODULATION_END), decay_window=None,
                             min_peak_ratio: float = 20.0, pad_factor: int = 64) -> FitResult:
    """Dominant echo-modulation frequency.

    The exponential decay fitted beyond the modulated region is divided out
    of the early samples. What is left is mirrored to negative delays (the
    damped modulation is even in t12) and the peak of its zero-padded
    periodogram, skipping the lobe around zero frequency, is refined by a
    parabola through the log power of the three highest bins. The early
    window should start at or near zero delay and hold at least two periods.

    The non-oscillating part of the residual leaks into the peak when the
    damping is comparable to the frequency; that pull is removed by matching
    the peak position and width of a noiseless damped cosine. If the match
    fails the raw peak is kept, flagged "modulation blended with zero
    frequency", and twice the spectral width of the peak is added to the error.
    The 2-sigma error combines the bin width with the first-order response
    of the peak position to the residual noise. A peak less than
    ``min_peak_ratio`` times the median periodogram level is reported as no
    modulation.
    """
    decay = fit_exponential_decay(curve, decay_window)
    if _count_in(curve.x, *early_window) < 8:
        raise InsufficientDataError(f"need >= 8 points in the early window, got {_count_in(curve.x, *early_window)}")
    early = curve.window(*early_window)
    model = decay["i0"] * np.exp(-early.x / decay["tau"])
    dt = float(np.median(np.diff(early.x)))
    t = dt * np.arange(int(round(early.x[-1] / dt)) + 1)
    resid = np.interp(t, early.x, early.y / model - 1.0)

    peak = None if np.sqrt(np.mean(resid**2)) < 1e-9 else _periodogram_peak(resid, dt, pad_factor)
    if peak is None or peak[2] < min_peak_ratio * peak[3]:
        return FitResult(["f_m"], [np.nan], [[np.nan]], 0.0, 0, True, ["no modulation detected"])
    f0, df, _, _, var0 = peak

    flags = []
    bias = 0.0
    solved = _unblend(t, dt, pad_factor, f0, var0) if np.isfinite(var0) else None
    if solved is None:
        flags.append("modulation blended with zero frequency")
        f_m, damp = f0, np.sqrt(var0) if np.isfinite(var0) else 0.0
        # the line cannot be placed better than its own spectral width
        bias = 2.0 * damp if damp > 0 else f0
    else:
        f_m, damp = solved

    # noise in the residual from the measured sigma, else from the misfit of the damped cosine
    shape = _modulation_shape(t, f_m, damp)
    misfit = resid - float(shape @ resid / (shape @ shape)) * shape
    early_sigma = _usable_sigma(early.sigma)
    if early_sigma is not None:
        noise = np.interp(t, early.x, early_sigma / model)
    else:
        noise = np.full_like(t, np.sqrt(misfit @ misfit / max(t.size - 3, 1)))
    # the mirrored transform is the cosine sum X(f) = sum c_n r_n cos(2 pi f t_n);
    # at the peak X' = 0, so a perturbation moves it by -dX'/X''
    c = np.where(t > 0, 2.0, 1.0)
    w = 2.0 * np.pi * t
    x2 = -np.sum(c * resid * w**2 * np.cos(w * f0))
    dx1 = c * w * np.sin(w * f0) * noise
    var_noise = float(dx1 @ dx1) / x2**2 if x2 != 0 else np.inf
    var = var_noise + (df / 2.0) ** 2 + (bias / 2.0) ** 2
    return FitResult(["f_m"], [f_m], [[var]], _rms(misfit), 1, True, flags)


# -- straight line and power law -----------------------------------------------------

def _weighted_line(x, y, sigma):
    sigma = _usable_sigma(sigma)
    if x.size < 2:
        raise InsufficientDataError(f"need >= 2 points, got {x.size}")
    if np.ptp(x) == 0:
        raise RankError("all abscissa values are equal; slope is undefined")
    w = np.ones_like(y) if sigma is None else 1.0 / sigma**2
    design = np.column_stack([x, np.ones_like(x)])
    sw = np.sqrt(w)
    a = design * sw[:, None]
    coef, *_ = np.linalg.lstsq(a, y * sw, rcond=None)
    resid = (y - design @ coef) * sw
    cov = np.linalg.inv(a.T @ a)
    if sigma is None:
        dof = x.size - 2
        cov = cov * (resid @ resid / dof if dof > 0 else 0.0)
    return coef, cov, resid


def fit_linear(points: Curve) -> FitResult:
    """Weighted straight line y = slope * x + intercept."""
    coef, cov, resid = _weighted_line(points.x, points.y, points.sigma)
    return FitResult(["slope", "intercept"], coef, cov, _rms(resid), 1, True)


def fit_powerlaw(points: Curve) -> FitResult:
    """y = a * x**exponent by linear regression in log-log space."""
    if points.x.size < 3:
        raise InsufficientDataError(f"need >= 3 points, got {points.x.size}")
    if np.any(points.x <= 0) or np.any(points.y <= 0):
        raise DomainError("power-law fit needs strictly positive abscissa and ordinate")
    sigma = _usable_sigma(points.sigma)
    ls = None if sigma is None else sigma / points.y
    coef, cov, resid = _weighted_line(np.log(points.x), np.log(points.y), ls)
    a = np.exp(coef[1])
    # reorder to (a, exponent); d a / d log a = a
    jac = np.array([[0.0, a], [1.0, 0.0]])
    return FitResult(["a", "exponent"], [a, coef[0]], jac @ cov @ jac.T, _rms(resid), 1, True)


# -- thermal activation ------------------------------------------------------------------

G_EFF_MAX = 20.0
G_EFF_MIN = 1e-9
ACTIVATION_NAMES = ["gamma_tls0", "gamma_tls1", "g_eff"]


def fit_activation(points: Curve, temperature: float, options: Optional[FitOptions] = None) -> FitResult:
    """Fit Gamma(B) = Gamma_TLS0 + Gamma_TLS1 exp(-g_eff mu_B B / kT) at one temperature.

    g_eff is confined to (0, 20]. The starting point comes from a scan over
    g_eff with the two linewidths solved linearly at each trial value.
    """
    options = options or FitOptions()
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature!r}")
    b, y = points.x, points.y
    if b.size < 4:
        raise InsufficientDataError(f"need >= 4 field points, got {b.size}")
    if np.ptp(b) == 0:
        raise RankError("all field values are equal; g_eff is undefined")
    s, absolute = _weights(y, _usable_sigma(points.sigma), log_space=False)
    unit = zeeman_boltzmann_exponent(1.0, b, temperature)

    best = None
    for g in np.geomspace(0.05, G_EFF_MAX, 120):
        design = np.column_stack([np.ones_like(b), np.exp(-g * unit)]) / s[:, None]
        coef = np.linalg.lstsq(design, y / s, rcond=None)[0]
        coef = np.maximum(coef, 0.0)
        cost = np.sum((design @ coef - y / s) ** 2)
        if best is None or cost < best[0]:
            best = (cost, coef, g)
    _, (g0, g1), g = best
    yscale = max(np.max(np.abs(y)), 1e-300)
    p0 = np.array([max(g0, 1e-3 * yscale), max(g1, 1e-3 * yscale), g])

    def resid(p):
        return (y - p[0] - p[1] * np.exp(-p[2] * unit)) / s

    lower, upper = options.box(ACTIVATION_NAMES, [0.0, 0.0, G_EFF_MIN], [np.inf, np.inf, G_EFF_MAX])
    sol = levenberg_marquardt(resid, p0, scale=[yscale, yscale, 1.0], lower=lower, upper=upper, options=options)
    cov, bad = covariance_from_jacobian(sol.jacobian, sol.residual, absolute)
    flags = [f"{n} unidentifiable" for n, x in zip(ACTIVATION_NAMES, bad) if x]
    if sol.x[2] >= upper[2]:
        flags.append("g_eff at upper bound")
    return FitResult(ACTIVATION_NAMES, sol.x, cov, _rms(sol.residual),
                     sol.iterations, sol.converged, flags, max_iterations=options.max_iterations)


# -- three-pulse echo -----------------------------------------------------------------------

PE3_NAMES = ["amplitude", "gamma0", "gamma1", "rate_r", "t1"]


def fit_3pe_surface(surface: Pe3Surface, gamma0: Optional[float] = 0.4e6, amplitude: Optional[float] = 1.0,
                    options: Optional[FitOptions] = None) -> FitResult:
    """Fit the spectral diffusion model to a three-pulse echo decay.

    ln I = ln A - 2 t23/T1 - 4 pi t12 [Gamma0 + Gamma1/2 (1 - exp(-R t23))].

    With a single t12 the amplitude A and Gamma0 are interchangeable, so at
    least one of them is held. By default the data are taken as absolutely
    normalized (A = 1, as produced by the simulators) and Gamma0 is fixed,
    typically to the two-pulse echo value. ``gamma0=None`` fits Gamma0;
    ``amplitude=None`` frees A for data in arbitrary units (then Gamma0 only
    labels the result).
    """
    options = options or FitOptions()
    if gamma0 is None and amplitude is None:
        amplitude = 1.0
    t12 = surface.t12
    t = surface.t23_grid
    y = surface.intensity
    if t.size < 5:
        raise InsufficientDataError(f"need >= 5 t23 points, got {t.size}")
    sigma = _usable_sigma(surface.sigma)
    pos = _positive_for_start(y, sigma, 4)
    s, absolute = _weights(y, sigma, log_space=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ly = np.log(y)
    k = 4.0 * np.pi * t12

    # linear in (offset, 2/T1, Gamma1) for each trial rate
    positive = t[t > 0]
    span = (positive[0] if positive.size else t[-1]), t[-1]
    best = None
    for rate in np.geomspace(0.1 / span[1], 10.0 / span[0], 200):
        tp = t[pos]
        design = np.column_stack([np.ones_like(tp), -tp, -0.5 * k * -np.expm1(-rate * tp)]) / s[pos, None]
        coef = np.linalg.lstsq(design, ly[pos] / s[pos], rcond=None)[0]
        cost = np.sum((design @ coef - ly[pos] / s[pos]) ** 2)
        if best is None or cost < best[0]:
            best = (cost, coef, rate)
    _, (c0, inv_t1, g1), rate = best
    t1 = 2.0 / inv_t1 if inv_t1 > 0 else 10.0 * t[-1]
    g1 = max(g1, 0.0)
    if gamma0 is None:
        g0 = max((np.log(amplitude) - c0) / k, 0.0)
        a0 = amplitude
    else:
        g0 = gamma0
        a0 = amplitude if amplitude is not None else np.exp(c0 + k * gamma0)

    full0 = np.array([a0, g0, g1, rate, t1], dtype=float)
    free = np.array([amplitude is None, gamma0 is None, True, True, True])
    gscale = max(g1, 1.0 / k)
    scale_all = np.array([a0, gscale, gscale, rate, t1])
    lower_all = np.array([1e-300, 0.0, 0.0, 0.0, 1e-300])

    def unpack(p):
        full = full0.copy()
        full[free] = p
        return full

    def resid(p):
        a, g0_, g1_, r, t1_ = unpack(p)
        log_model = np.log(a) - 2.0 * t / t1_ - k * (g0_ + 0.5 * g1_ * -np.expm1(-r * t))
        if absolute:
            return (y - np.exp(log_model)) / sigma
        return ly - log_model

    lower, upper = options.box([n for n, f in zip(PE3_NAMES, free) if f], lower_all[free],
                               np.full(free.sum(), np.inf))
    sol = levenberg_marquardt(resid, full0[free], scale=scale_all[free], lower=lower, upper=upper,
                              options=options)
    cov_free, bad = covariance_from_jacobian(sol.jacobian, sol.residual, absolute)
    idx = np.nonzero(free)[0]
    cov = np.zeros((5, 5))
    cov[np.ix_(idx, idx)] = cov_free
    values = unpack(sol.x)
    fixed = [PE3_NAMES[i] for i in range(5) if not free[i]]

    flags = [f"{PE3_NAMES[i]} unidentifiable" for i, b in zip(idx, bad) if b]
    g1_hat, r_hat = values[2], values[3]
    g1_err = 2.0 * np.sqrt(cov[2, 2])
    if (g1_hat <= 0 or not g1_err < g1_hat) and "rate_r unidentifiable" not in flags:
        flags.append("rate_r unidentifiable")
    if r_hat > 0 and np.isfinite(r_hat):
        n_fast = np.count_nonzero(t <= 1.0 / r_hat)
        n_slow = np.count_nonzero(t >= 5.0 / r_hat)
        if n_fast < 3 or n_slow < 3:
            flags.append("regime under-constrained")
    return FitResult(PE3_NAMES, values, cov, _rms(sol.residual), sol.iterations, sol.converged,
                     flags, fixed, max_iterations=options.max_iterations)


# -- hole profile --------------------------------------------------------------------------------

HOLE_NAMES = ["amplitude", "gamma_h", "side_offset", "side_depth"]
SIDE_HOLE_DETECTION_SIGMA = 5.0


def _half_max_width(x, y):
    peak = np.max(y)
    above = np.nonzero(y >= 0.5 * peak)[0]
    return max(x[above[-1]] - x[above[0]], np.median(np.diff(x)))


def _lorentz_from_total(total, gauss):
    if gauss <= 0 or total <= gauss:
        return max(total - gauss, 0.05 * total) if gauss > 0 else total
    def excess(f):
        return voigt_fwhm(f, gauss) - total

    if excess(total) <= 0:
        # Gaussian negligible at this width
        return total
    return brentq(excess, 1e-9 * total, total)


def fit_hole_profile(spectrum: HoleSpectrum, laser_fwhm: Optional[float] = None,
                     options: Optional[FitOptions] = None) -> FitResult:
    """Fit central hole plus symmetric side holes with shared widths.

    The laser jitter Gaussian (FWHM sqrt(2) * ``laser_fwhm``) is held fixed,
    so the reported ``gamma_h`` is half the Lorentzian FWHM of the hole.
    When the fitted side-hole offset is below half the central FWHM, or the
    side holes are not significant, the central-only fit is returned with a
    flag.
    """
    options = options or FitOptions()
    laser = spectrum.laser_fwhm if laser_fwhm is None else laser_fwhm
    gauss = jitter_gaussian_fwhm(laser)
    x = np.asarray(spectrum.detuning, dtype=float)
    y = np.asarray(spectrum.transmission_change, dtype=float)
    if x.size < 8:
        raise InsufficientDataError(f"need >= 8 spectral points, got {x.size}")
    s, absolute = _weights(y, _usable_sigma(spectrum.sigma), log_space=False)
    amp0 = float(np.max(y))
    width0 = _half_max_width(x, y)
    gh0 = 0.5 * _lorentz_from_total(width0, gauss)
    wscale = max(gh0, np.median(np.diff(x)))

    def central_resid(p):
        return (y - hole_profile(x, p[0], 2.0 * p[1], gauss, 0.0, 0.0)) / s

    lower, upper = options.box(HOLE_NAMES, [0.0, 1e-300, 0.0, 0.0], np.full(4, np.inf))
    central = levenberg_marquardt(central_resid, [amp0, gh0], scale=[amp0, wscale],
                                  lower=lower[:2], upper=upper[:2], options=options)
    amp_c, gh_c = central.x

    def full_model(p):
        return hole_profile(x, p[0], 2.0 * p[1], gauss, p[2], p[3])

    # side-hole start: scan offsets, solve central and side amplitudes linearly
    fwhm_c = voigt_fwhm(2.0 * gh_c, gauss)
    best = None
    for off in np.linspace(0.25 * fwhm_c, 0.9 * x[-1], 200):
        c = hole_profile(x, 1.0, 2.0 * gh_c, gauss, 0.0, 0.0)
        side = hole_profile(x, 1.0, 2.0 * gh_c, gauss, off, 1.0) - c
        design = np.column_stack([c, side]) / s[:, None]
        coef = np.linalg.lstsq(design, y / s, rcond=None)[0]
        cost = np.sum((design @ coef - y / s) ** 2)
        if coef[0] > 0 and coef[1] > 0 and (best is None or cost < best[0]):
            best = (cost, coef, off)

    result = None
    if best is not None:
        _, (ac, aside), off = best
        p0 = [ac, gh_c, off, aside / ac]
        full = levenberg_marquardt(lambda p: (y - full_model(p)) / s, p0, scale=[amp_c, wscale, off, 1.0],
                                   lower=lower, upper=upper, options=options)
        cov, bad = covariance_from_jacobian(full.jacobian, full.residual, absolute)
        fwhm = voigt_fwhm(2.0 * full.x[1], gauss)
        depth_sd = np.sqrt(cov[3, 3])
        if full.x[2] < 0.5 * fwhm:
            flag = "holes unresolved"
        # 5 sigma: the offset scan picks the best of many trial positions
        elif not (full.x[3] > SIDE_HOLE_DETECTION_SIGMA * depth_sd) or bad.any():
            flag = "side holes not detected"
        else:
            flag = None
            result = (full, cov, HOLE_NAMES, [])
    else:
        flag = "side holes not detected"
    if result is None:
        cov_c, _ = covariance_from_jacobian(central.jacobian, central.residual, absolute)
        cov = np.zeros((4, 4))
        cov[:2, :2] = cov_c
        values = np.array([amp_c, gh_c, 0.0, 0.0])
        solution = central
        flags = [flag]
    else:
        solution, cov, _, flags = result
        values = solution.x
    gh = values[1]
    fwhm = voigt_fwhm(2.0 * gh, gauss)
    h = 1e-6 * gh
    dfwhm = (voigt_fwhm(2.0 * (gh + h), gauss) - voigt_fwhm(2.0 * (gh - h), gauss)) / (2.0 * h)
    names, vals, cov = _extend(list(HOLE_NAMES), values, cov,
                               "central_fwhm", fwhm, [0.0, dfwhm, 0.0, 0.0])
    return FitResult(names, vals, cov, _rms(solution.residual), solution.iterations, solution.converged,
                     flags, max_iterations=options.max_iterations)


# -- consistency ----------------------------------------------------------------------------------

@dataclass
class ConsistencyReport:
    predicted: float
    predicted_two_sigma: float
    measured: float
    measured_two_sigma: float
    discrepancy: float
    verdict: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def consistency_report(gamma0_2pe: float, shb_gamma: float, sd_fit: FitResult,
                       shb_two_sigma: float = 0.0, gamma0_two_sigma: float = 0.0) -> ConsistencyReport:
    """Compare Gamma0 + Gamma1 from echo data with a hole-burning linewidth.

    The verdict is "consistent" when the two 2-sigma intervals overlap.
    """
    for name, v in (("gamma0_2pe", gamma0_2pe), ("shb_gamma", shb_gamma)):
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be finite and > 0, got {v!r}")
    g1 = sd_fit["gamma1"]
    g1_err = sd_fit.error("gamma1")
    predicted = gamma0_2pe + g1
    pred_err = float(np.hypot(g1_err, gamma0_two_sigma))
    discrepancy = shb_gamma - predicted
    overlap = abs(discrepancy) <= pred_err + shb_two_sigma
    return ConsistencyReport(predicted, pred_err, shb_gamma, shb_two_sigma, discrepancy,
                             "consistent" if overlap else "inconsistent")
