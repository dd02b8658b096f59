"""Bounded Levenberg-Marquardt with central-difference Jacobians.

Parameters are rescaled by their typical magnitude before solving so that
rates in 1/s, times in s and widths in Hz condition alike. Steps that leave
the box are projected back onto it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

_EPS = np.finfo(float).eps
_H = _EPS ** (1.0 / 3.0)
FTOL = 1e-12  # relative cost decrease treated as stationary


@dataclass
class FitOptions:
    max_iterations: int = 200
    relative_tolerance: float = 1e-10
    initial_damping: float = 1e-3
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        errors = []
        if not self.relative_tolerance > 0:
            errors.append("relative_tolerance: must be > 0")
        if int(self.max_iterations) < 1:
            errors.append("max_iterations: must be >= 1")
        if not self.initial_damping > 0:
            errors.append("initial_damping: must be > 0")
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                errors.append(f"bounds.{name}: lower {lo} must be < upper {hi}")
        if errors:
            raise ConfigError(errors)

    def box(self, names, lower, upper):
        """Intersect a fitter's own box with the user bounds for the named free parameters."""
        lower = np.array(lower, dtype=float)
        upper = np.array(upper, dtype=float)
        unknown = [n for n in self.bounds if n not in names]
        if unknown:
            raise ConfigError([f"bounds.{n}: not a free parameter of this fit ({list(names)})" for n in unknown])
        for i, name in enumerate(names):
            if name in self.bounds:
                lo, hi = self.bounds[name]
                lower[i] = max(lower[i], lo)
                upper[i] = min(upper[i], hi)
                if not lower[i] < upper[i]:
                    raise ConfigError(f"bounds.{name}: empty intersection with the allowed range")
        return lower, upper


@dataclass
class Solution:
    x: np.ndarray
    jacobian: np.ndarray
    residual: np.ndarray
    iterations: int
    converged: bool
    message: str


def numeric_jacobian(fun: Callable, x: np.ndarray, r0: np.ndarray, lower, upper) -> np.ndarray:
    """Central differences, falling back to one-sided steps at the bounds."""
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = _H * max(abs(x[j]), 1.0)
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        if up[j] > upper[j]:
            jac[:, j] = (r0 - fun(dn)) / h
        elif dn[j] < lower[j]:
            jac[:, j] = (fun(up) - r0) / h
        else:
            jac[:, j] = (fun(up) - fun(dn)) / (2.0 * h)
    return jac


def levenberg_marquardt(residual: Callable, p0, scale=None, lower=None, upper=None,
                        options: Optional[FitOptions] = None) -> Solution:
    """Minimize 0.5 * ||residual(p)||^2 inside the box [lower, upper].

    ``residual`` maps a parameter vector to the weighted residual vector.
    The returned ``x`` and ``jacobian`` are in the original parameter units.
    """
    options = options or FitOptions()
    p0 = np.asarray(p0, dtype=float)
    n = p0.size
    scale = np.where(np.abs(p0) > 0, np.abs(p0), 1.0) if scale is None else np.asarray(scale, dtype=float)
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float) / scale
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float) / scale

    def fun(x):
        return np.asarray(residual(x * scale), dtype=float)

    x = np.clip(p0 / scale, lo, hi)
    r = fun(x)
    if not np.all(np.isfinite(r)):
        raise ValueError("residual is not finite at the initial guess")
    cost = 0.5 * r @ r
    tol = options.relative_tolerance
    converged = False
    message = "maximum iterations reached"
    iterations = 0
    jac = numeric_jacobian(fun, x, r, lo, hi)
    a = jac.T @ jac
    lam = options.initial_damping * max(np.max(np.diag(a)), 1e-300)
    nu = 2.0
    # scaled step length cap; keeps early steps from jumping across a singularity
    radius = max(np.linalg.norm(x[np.isfinite(x)]), 1.0)
    while iterations < options.max_iterations:
        iterations += 1
        if cost == 0.0:
            converged, message = True, "exact fit"
            break
        a = jac.T @ jac
        g = jac.T @ r
        d = np.maximum(np.diag(a), 1e-12 * max(np.max(np.diag(a)), 1e-300))
        # parameters held at a bound by the gradient drop out of the step
        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        if not free.any():
            converged, message = True, "all parameters at active bounds"
            break
        af = a[np.ix_(free, free)]
        df = np.diag(d[free]) / max(np.max(d), 1e-300)
        # Nielsen's damping update driven by the gain ratio
        accepted = False
        while lam < 1e300:
            step = np.zeros(n)
            try:
                step[free] = np.linalg.solve(af + lam * df, -g[free])
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2.0
                continue
            x_new = np.clip(x + step, lo, hi)
            step = x_new - x
            r_new = fun(x_new)
            with np.errstate(over="ignore"):
                cost_new = 0.5 * r_new @ r_new if np.all(np.isfinite(r_new)) else np.inf
            predicted = -(g @ step) - 0.5 * step @ a @ step
            if cost_new < cost and predicted > 0 and np.linalg.norm(step) <= radius:
                rho = (cost - cost_new) / predicted
                lam *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                nu = 2.0
                if rho > 0.75:
                    radius = max(radius, 2.0 * np.linalg.norm(step))
                accepted = True
                break
            if np.linalg.norm(step) <= tol * (np.linalg.norm(x) + tol):
                break
            lam *= nu
            nu *= 2.0
        if not accepted:
            converged, message = True, "no further decrease possible"
            break
        small_step = np.linalg.norm(step) <= tol * (np.linalg.norm(x) + tol)
        small_gain = cost - cost_new <= FTOL * cost
        x, r, cost = x_new, r_new, cost_new
        jac = numeric_jacobian(fun, x, r, lo, hi)
        if small_step or small_gain:
            converged, message = True, "step below tolerance" if small_step else "cost stationary"
            break
    return Solution(x * scale, jac / scale, r, iterations, converged, message)


def covariance_from_jacobian(jac: np.ndarray, residual: np.ndarray, absolute_sigma: bool, rcond: float = 1e-10):
    """Parameter covariance (J^T J)^-1, scaled by the reduced chi-square unless ``absolute_sigma``.

    Directions with singular values below ``rcond`` times the largest are
    unidentifiable; every parameter with weight in such a direction gets an
    infinite variance. Returns ``(covariance, unidentifiable_mask)``.
    """
    m, n = jac.shape
    colscale = np.linalg.norm(jac, axis=0)
    colscale = np.where(colscale > 0, colscale, 1.0)
    u, s, vt = np.linalg.svd(jac / colscale, full_matrices=False)
    keep = s > rcond * (s[0] if s.size and s[0] > 0 else 1.0)
    keep &= s > 0
    v = vt.T
    cov = (v[:, keep] / s[keep] ** 2) @ v[:, keep].T
    cov = cov / np.outer(colscale, colscale)
    bad = np.zeros(n, dtype=bool)
    if not keep.all():
        bad = np.any(np.abs(v[:, ~keep]) > 1e-6, axis=1)
    if np.any(np.linalg.norm(jac, axis=0) == 0):
        bad |= np.linalg.norm(jac, axis=0) == 0
    if not absolute_sigma:
        dof = m - n
        chi2 = float(residual @ residual)
        cov = cov * (chi2 / dof if dof > 0 else 0.0)
    cov[bad, :] = np.inf
    cov[:, bad] = np.inf
    return cov, bad
