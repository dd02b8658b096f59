import numpy as np
import pytest

from echofit.errors import DomainError, InsufficientDataError, RankError
from echofit.estimation import (
    FitResult,
    consistency_report,
    fit_3pe_surface,
    fit_activation,
    fit_exponential_decay,
    fit_hole_profile,
    fit_linear,
    fit_modulation_frequency,
    fit_powerlaw,
)
from echofit.physics import DephasingParams, Environment, activation_law
from echofit.sequences import (
    AxisKind,
    Curve,
    HoleSpectrum,
    Pe3Surface,
    simulate_2pe_decay,
    simulate_3pe_surface,
    simulate_power_broadening_series,
    simulate_shb_spectrum,
    symmetric_grid,
)
from echofit.solver import FitOptions
from echofit.workbench import NoiseSpec, add_noise

MHZ = 1e6
PAPER_SD = DephasingParams(gamma0=0.4e6, gamma1=1.3e6, rate_r=0.026e6, t1=6.7e-3)
PE3_GRID = np.geomspace(1e-6, 30e-3, 30)


def rel_err(got, want):
    return np.max(np.abs(np.asarray(got) / np.asarray(want) - 1))


def decay_curve(tau, t, i0=1.0):
    return Curve(t, i0 * np.exp(-t / tau))


def field_series(g0, g1, g, b=np.linspace(0, 2.2, 16), t=0.5):
    return Curve(b, activation_law(b, g0, g1, g, t), None, AxisKind.FIELD, {"temperature": t})


def hole_spectrum(params, b, grid=symmetric_grid(60e6, 1201)):
    return simulate_shb_spectrum(params, Environment(b, 0.5), grid)


def noisy_surface(params, seed, noise=0.05):
    s = simulate_3pe_surface(params, 50e-9, PE3_GRID)
    c = add_noise(s.to_curve(), NoiseSpec(noise), seed)
    return Pe3Surface(s.t12, c.x, c.y, c.sigma)


# -- FitResult -------------------------------------------------------------------------

def test_fit_result_two_sigma_definition():
    r = FitResult(["a", "b"], [1.0, 2.0], [[4.0, 1.0], [1.0, 9.0]])
    assert r.two_sigma.tolist() == [4.0, 6.0]
    assert r["b"] == 2.0 and r.error("a") == 4.0
    assert r.units == {"a": "Hz K^-exponent", "b": ""}


# -- exponential decay -------------------------------------------------------------------

def test_decay_noiseless_exact():
    c = decay_curve(940e-9, np.linspace(0, 5e-6, 200))
    r = fit_exponential_decay(c)
    assert r["t2"] == pytest.approx(3760e-9, rel=1e-9)
    assert r.converged and r.residual_rms >= 0
    assert r.error("t2") == pytest.approx(4 * r.error("tau"))


def test_decay_3_percent_noise_hits_quoted_uncertainty():
    t = np.linspace(0, 2.6e-6, 40)
    base = decay_curve(427.5e-9, t)
    hits = []
    for seed in range(200):
        r = fit_exponential_decay(add_noise(base, NoiseSpec(0.03), seed))
        hits.append(abs(r["t2"] - 1710e-9) <= 60e-9)
    assert np.mean(hits) >= 0.9


def test_decay_window_removes_modulation_bias():
    t = np.linspace(0, 5e-6, 1001)
    env = Environment(2.2, 0.15)
    plain = simulate_2pe_decay(DephasingParams(t2=3760e-9, mod_depth=0.0), env, t)
    modulated = simulate_2pe_decay(DephasingParams(t2=3760e-9, mod_depth=0.5), env, t)
    a = fit_exponential_decay(plain, (200e-9, 2e-6))
    b = fit_exponential_decay(modulated, (200e-9, 2e-6))
    assert abs(b["tau"] / a["tau"] - 1) < 0.02
    # without the window the modulation drags the fit
    c = fit_exponential_decay(modulated, (0.0, 2e-6))
    assert abs(c["tau"] / a["tau"] - 1) > abs(b["tau"] / a["tau"] - 1)


def test_decay_errors():
    with pytest.raises(InsufficientDataError):
        fit_exponential_decay(decay_curve(1e-6, np.linspace(0, 1e-6, 10)), (0.0, 2e-7))
    c = Curve(np.linspace(0, 1e-6, 10), np.r_[np.ones(9), -1.0])
    with pytest.raises(DomainError):
        fit_exponential_decay(c, (0.0, 1e-6))


def test_decay_non_convergence_flagged_not_thrown():
    c = add_noise(decay_curve(427.5e-9, np.linspace(0, 2.6e-6, 40)), NoiseSpec(0.03), 1)
    r = fit_exponential_decay(c, options=FitOptions(max_iterations=1))
    assert not r.converged
    assert np.all(np.isfinite(r.values))


# -- modulation frequency ------------------------------------------------------------------

def test_modfreq_recovers_generator_frequency():
    t = np.linspace(0, 3e-6, 1501)
    c = simulate_2pe_decay(DephasingParams(t2=3760e-9), Environment(2.2, 0.15), t)
    r = fit_modulation_frequency(c)
    assert abs(r["f_m"] - 23.32e6) <= r.error("f_m")
    assert not r.flags


def test_modfreq_no_modulation():
    t = np.linspace(0, 3e-6, 1501)
    c = simulate_2pe_decay(DephasingParams(t2=3760e-9, mod_depth=0.0), Environment(2.2, 0.15), t)
    r = fit_modulation_frequency(c)
    assert r.flags == ["no modulation detected"]
    assert np.isnan(r["f_m"])


def test_modfreq_slope_law_noiseless():
    t = np.linspace(0, 3e-6, 1501)
    p = DephasingParams(t2=3760e-9, mod_damp_sigma=1.5e6)
    fields = [0.6, 1.3, 2.2]
    f = [fit_modulation_frequency(simulate_2pe_decay(p, Environment(b, 0.15), t), (0, 600e-9), (600e-9, 3e-6))["f_m"]
         for b in fields]
    slope = fit_linear(Curve(fields, f, None, AxisKind.FIELD))["slope"]
    assert slope == pytest.approx(10.6e6, rel=0.02)


# -- straight line ---------------------------------------------------------------------------

def test_linear_exact_and_two_points():
    r = fit_linear(Curve([0.5, 1.0, 2.0], [6.15e6, 12.3e6, 24.6e6]))
    assert r["slope"] == pytest.approx(12.3e6, rel=1e-12)
    assert r["intercept"] == pytest.approx(0.0, abs=1e-6)
    r = fit_linear(Curve([1.0, 3.0], [2.0, 7.0]))
    assert r["slope"] == pytest.approx(2.5) and r["intercept"] == pytest.approx(-0.5)


def test_linear_degenerate_abscissa():
    # a Curve cannot hold equal abscissae, so build the degenerate case directly
    c = Curve([0.0, 1.0], [2.0, 3.0])
    c.x = np.array([1.0, 1.0])
    with pytest.raises(RankError):
        fit_linear(c)


def test_power_extrapolation_overestimates_slightly():
    c = simulate_power_broadening_series(DephasingParams(), Environment(0.0, 0.5), [0.2, 0.4, 0.8], p_sat=1.0)
    r = fit_linear(c)
    over = r["intercept"] / c.meta["fwhm0"] - 1
    assert 0 < over < 0.03


# -- power law ----------------------------------------------------------------------------------

def test_powerlaw_noiseless_and_constant():
    t = np.linspace(2, 10, 8)
    r = fit_powerlaw(Curve(t, 3e6 * t**1.4, None, AxisKind.TEMPERATURE))
    assert abs(r["exponent"] - 1.4) < 1e-12
    assert r["a"] == pytest.approx(3e6, rel=1e-12)
    r = fit_powerlaw(Curve(t, np.full(8, 5e6), None, AxisKind.TEMPERATURE))
    assert abs(r["exponent"]) < 1e-12


def test_powerlaw_unit_invariance():
    t = np.linspace(2, 10, 8)
    c = add_noise(Curve(t, 3e6 * t**1.4, None, AxisKind.TEMPERATURE), NoiseSpec(0.2), 3)
    hz = fit_powerlaw(c)
    mhz = fit_powerlaw(c.scaled(1e-6))
    assert mhz["exponent"] == pytest.approx(hz["exponent"], rel=1e-12, abs=1e-12)
    assert mhz.error("exponent") == pytest.approx(hz.error("exponent"), rel=1e-10)
    assert mhz["a"] == pytest.approx(hz["a"] * 1e-6, rel=1e-10)


def test_powerlaw_domain():
    with pytest.raises(DomainError):
        fit_powerlaw(Curve([1.0, 2.0, 3.0], [1.0, -1.0, 2.0]))
    with pytest.raises(InsufficientDataError):
        fit_powerlaw(Curve([1.0, 2.0], [1.0, 2.0]))


# -- activation law ----------------------------------------------------------------------------

def test_activation_noiseless_exact():
    r = fit_activation(field_series(2.2e6, 6.0e6, 5.0), 0.5)
    assert rel_err(r.values, [2.2e6, 6.0e6, 5.0]) < 1e-6
    assert r.converged and not r.flags


def test_activation_without_knee_is_poorly_constrained():
    b = np.linspace(1.0, 2.2, 10)
    c = add_noise(field_series(2.2e6, 6.0e6, 5.0, b=b), NoiseSpec(0.05), 0)
    r = fit_activation(c, 0.5)
    full = fit_activation(add_noise(field_series(2.2e6, 6.0e6, 5.0), NoiseSpec(0.05), 0), 0.5)
    assert r.converged
    assert not np.isfinite(r.error("g_eff")) or r.error("g_eff") > 3 * full.error("g_eff")


def test_activation_errors():
    c = field_series(2.2e6, 6.0e6, 5.0)
    with pytest.raises(DomainError):
        fit_activation(c, 0.0)
    with pytest.raises(InsufficientDataError):
        fit_activation(field_series(2.2e6, 6.0e6, 5.0, b=np.array([0.0, 1.0, 2.0])), 0.5)


def test_activation_g_eff_bounded():
    c = field_series(2.2e6, 6.0e6, 50.0)
    r = fit_activation(c, 0.5)
    assert 0 < r["g_eff"] <= 20.0


def test_activation_user_bounds():
    c = add_noise(field_series(2.2e6, 6.0e6, 5.0), NoiseSpec(0.2), 4)
    r = fit_activation(c, 0.5, FitOptions(bounds={"g_eff": (1.0, 3.0)}))
    assert 1.0 <= r["g_eff"] <= 3.0


# -- three-pulse echo ---------------------------------------------------------------------------

def test_3pe_noiseless_exact():
    s = simulate_3pe_surface(PAPER_SD, 50e-9, PE3_GRID)
    r = fit_3pe_surface(s, gamma0=0.4e6)
    assert rel_err([r["gamma1"], r["rate_r"], r["t1"]], [1.3e6, 0.026e6, 6.7e-3]) < 1e-6
    assert r.fixed == ["amplitude", "gamma0"]
    assert r.error("gamma0") == 0.0 and not r.flags


def test_3pe_cofit_gamma0():
    s = simulate_3pe_surface(PAPER_SD, 50e-9, PE3_GRID)
    r = fit_3pe_surface(s, gamma0=None)
    assert rel_err([r["gamma0"], r["gamma1"], r["rate_r"], r["t1"]], [0.4e6, 1.3e6, 0.026e6, 6.7e-3]) < 1e-6


def test_3pe_free_amplitude():
    s = simulate_3pe_surface(PAPER_SD, 50e-9, PE3_GRID)
    s = Pe3Surface(s.t12, s.t23_grid, 3.0 * s.intensity)
    r = fit_3pe_surface(s, gamma0=0.4e6, amplitude=None)
    assert rel_err([r["amplitude"], r["gamma1"], r["rate_r"], r["t1"]], [3.0, 1.3e6, 0.026e6, 6.7e-3]) < 1e-6


def test_3pe_without_spectral_diffusion_flags_rate():
    p = PAPER_SD.replace(gamma1=0.0)
    r = fit_3pe_surface(noisy_surface(p, 0), gamma0=0.4e6)
    assert "rate_r unidentifiable" in r.flags
    assert r["t1"] == pytest.approx(6.7e-3, rel=0.05)


def test_3pe_single_regime_flagged():
    s = simulate_3pe_surface(PAPER_SD, 50e-9, np.geomspace(1e-6, 30e-6, 20))
    c = add_noise(s.to_curve(), NoiseSpec(0.05), 2)
    r = fit_3pe_surface(Pe3Surface(s.t12, c.x, c.y, c.sigma), gamma0=0.4e6)
    assert "regime under-constrained" in r.flags


def test_3pe_needs_positive_data():
    s = Pe3Surface(50e-9, PE3_GRID[:6], [0.5, 0.4, -0.1, 0.3, 0.2, 0.1])
    with pytest.raises(DomainError):
        fit_3pe_surface(s)


# -- hole profile ----------------------------------------------------------------------------------

def test_hole_noiseless_round_trip():
    s = hole_spectrum(DephasingParams(), 1.28)
    r = fit_hole_profile(s)
    assert rel_err([r["gamma_h"], r["side_offset"], r["side_depth"], r["central_fwhm"]],
                   [s.gamma_h, s.side_offset, s.side_depth, s.central_fwhm]) < 1e-6
    assert r["side_offset"] == pytest.approx(15.744e6, rel=1e-6)
    assert not r.flags


def test_hole_offset_within_grid_resolution_under_noise():
    s = hole_spectrum(DephasingParams(), 1.28)
    c = add_noise(s.to_curve(), NoiseSpec(0.0, 0.01), 5)
    r = fit_hole_profile(HoleSpectrum.from_curve(c))
    step = s.detuning[1] - s.detuning[0]
    assert abs(r["side_offset"] - 15.744e6) < step


def test_hole_unresolved_at_low_field():
    s = hole_spectrum(DephasingParams(), 0.08)
    r = fit_hole_profile(s)
    assert r.flags and r.flags[0] in ("holes unresolved", "side holes not detected")
    assert r["side_offset"] == 0.0 and r["side_depth"] == 0.0


def test_hole_without_side_holes():
    s = hole_spectrum(DephasingParams(side_hole_depth=0.0), 1.5)
    c = add_noise(s.to_curve(), NoiseSpec(0.0, 0.01), 1)
    r = fit_hole_profile(HoleSpectrum.from_curve(c))
    assert r.flags == ["side holes not detected"]
    assert r["gamma_h"] == pytest.approx(s.gamma_h, rel=0.05)


def test_side_hole_slope_law():
    fields = np.linspace(0.7, 2.2, 7)
    offsets = [fit_hole_profile(hole_spectrum(DephasingParams(), b))["side_offset"] for b in fields]
    r = fit_linear(Curve(fields, offsets, None, AxisKind.FIELD))
    assert abs(r["slope"] - 12.3e6) < 0.8e6


# -- consistency ----------------------------------------------------------------------------------

def test_consistency_examples():
    sd = FitResult.from_values(["gamma1"], [1.3e6], [0.1e6])
    rep = consistency_report(0.4e6, 1.6e6, sd, shb_two_sigma=0.3e6)
    assert rep.verdict == "consistent"
    assert rep.predicted == pytest.approx(1.7e6)
    sd0 = FitResult.from_values(["gamma1"], [0.0], [0.0])
    assert consistency_report(0.4e6, 1.6e6, sd0, shb_two_sigma=0.3e6).verdict == "inconsistent"
    rep = consistency_report(0.4e6, 1.7e6, sd)
    assert rep.verdict == "consistent" and rep.discrepancy == pytest.approx(0.0, abs=1e-6)


def test_consistency_rejects_bad_input():
    sd = FitResult.from_values(["gamma1"], [1.3e6], [0.1e6])
    with pytest.raises(DomainError):
        consistency_report(float("nan"), 1.6e6, sd)
    with pytest.raises(DomainError):
        consistency_report(0.4e6, -1.0, sd)


# -- module-wide properties ---------------------------------------------------------------------------

DRAWS = np.random.default_rng(20240501)


def _draws(n, lo, hi, log=False):
    if log:
        return np.exp(DRAWS.uniform(np.log(lo), np.log(hi), n))
    return DRAWS.uniform(lo, hi, n)


def test_round_trip_decay_random_draws():
    for i0, tau in zip(_draws(50, 0.1, 10), _draws(50, 100e-9, 5e-6, log=True)):
        t = np.linspace(0, 6 * tau, 60)
        r = fit_exponential_decay(decay_curve(tau, t, i0), (0.0, t[-1]))
        assert rel_err([r["i0"], r["tau"]], [i0, tau]) < 1e-6


def test_round_trip_powerlaw_random_draws():
    for a, mu in zip(_draws(50, 1e4, 1e8, log=True), _draws(50, 0.0, 2.0)):
        t = np.linspace(2, 10, 8)
        r = fit_powerlaw(Curve(t, a * t ** (1 + mu), None, AxisKind.TEMPERATURE))
        assert rel_err(r["a"], a) < 1e-6 and abs(r["exponent"] - (1 + mu)) < 1e-6


def test_round_trip_linear_random_draws():
    for m, c in zip(_draws(50, -1e7, 1e7), _draws(50, -1e6, 1e6)):
        x = np.linspace(0, 3, 7)
        r = fit_linear(Curve(x, m * x + c))
        assert abs(r["slope"] - m) <= 1e-6 * abs(m) and abs(r["intercept"] - c) <= 1e-6 * max(abs(c), abs(m))


def test_round_trip_activation_random_draws():
    for g0, g1, g in zip(_draws(50, 0.5e6, 5e6), _draws(50, 1e6, 20e6), _draws(50, 1.0, 10.0)):
        b = np.linspace(0, 5.0 / g, 16)
        r = fit_activation(field_series(g0, g1, g, b=b), 0.5)
        assert rel_err(r.values, [g0, g1, g]) < 1e-6, (g0, g1, g)


def test_round_trip_3pe_random_draws():
    for g1, rate, t1 in zip(_draws(50, 0.5e6, 3e6), _draws(50, 5e3, 1e5, log=True), _draws(50, 2e-3, 20e-3)):
        p = PAPER_SD.replace(gamma1=g1, rate_r=rate, t1=t1)
        grid = np.geomspace(0.05 / rate, 3 * t1, 30)
        r = fit_3pe_surface(simulate_3pe_surface(p, 50e-9, grid), gamma0=0.4e6)
        assert rel_err([r["gamma1"], r["rate_r"], r["t1"]], [g1, rate, t1]) < 1e-6, (g1, rate, t1)


def test_round_trip_hole_random_draws():
    for b, depth, laser, g0 in zip(_draws(50, 0.8, 2.2), _draws(50, 0.1, 0.6), _draws(50, 0.2e6, 1.0e6),
                                   _draws(50, 0.3e6, 2e6)):
        p = DephasingParams(gamma0=g0, gamma1=1.0e6, shb_linewidth="spectral_diffusion", side_hole_depth=depth,
                            laser_fwhm=laser)
        s = hole_spectrum(p, b)
        r = fit_hole_profile(s)
        assert rel_err([r["gamma_h"], r["side_offset"], r["side_depth"]],
                       [s.gamma_h, s.side_offset, s.side_depth]) < 1e-6, (b, depth, laser, g0)


def test_round_trip_modfreq_random_draws_within_one_bin():
    t = np.linspace(0, 3e-6, 1501)
    for b in _draws(50, 1.0, 3.0):
        c = simulate_2pe_decay(DephasingParams(t2=3760e-9), Environment(b, 0.15), t)
        r = fit_modulation_frequency(c)
        assert abs(r["f_m"] - 10.6e6 * b) <= r.error("f_m")


def test_rescaling_changes_only_amplitudes():
    c = add_noise(decay_curve(500e-9, np.linspace(0, 3e-6, 80)), NoiseSpec(0.03), 1)
    a, b = fit_exponential_decay(c), fit_exponential_decay(c.scaled(7.5))
    assert b["i0"] == pytest.approx(7.5 * a["i0"], rel=1e-9)
    assert b["tau"] == pytest.approx(a["tau"], rel=1e-9)

    s = noisy_surface(PAPER_SD, 3)
    a = fit_3pe_surface(s, gamma0=0.4e6, amplitude=None)
    b = fit_3pe_surface(Pe3Surface(s.t12, s.t23_grid, 7.5 * s.intensity, 7.5 * s.sigma), gamma0=0.4e6,
                        amplitude=None)
    assert b["amplitude"] == pytest.approx(7.5 * a["amplitude"], rel=1e-8)
    for name in ("gamma1", "rate_r", "t1"):
        assert b[name] == pytest.approx(a[name], rel=1e-8)

    h = hole_spectrum(DephasingParams(), 1.28)
    hc = add_noise(h.to_curve(), NoiseSpec(0.0, 0.01), 2)
    a = fit_hole_profile(HoleSpectrum.from_curve(hc))
    b = fit_hole_profile(HoleSpectrum.from_curve(hc.scaled(7.5)))
    assert b["amplitude"] == pytest.approx(7.5 * a["amplitude"], rel=1e-8)
    for name in ("gamma_h", "side_offset", "side_depth"):
        assert b[name] == pytest.approx(a[name], rel=1e-8)

    f = add_noise(field_series(2.2e6, 6.0e6, 5.0), NoiseSpec(0.2), 5)
    a, b = fit_activation(f, 0.5), fit_activation(f.scaled(7.5), 0.5)
    assert b["g_eff"] == pytest.approx(a["g_eff"], rel=1e-8)


def test_fits_bit_identical():
    s = noisy_surface(PAPER_SD, 7)
    a, b = fit_3pe_surface(s), fit_3pe_surface(s)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.covariance, b.covariance)
    h = HoleSpectrum.from_curve(add_noise(hole_spectrum(DephasingParams(), 1.28).to_curve(), NoiseSpec(0, 0.01), 1))
    a, b = fit_hole_profile(h), fit_hole_profile(h)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.covariance, b.covariance)


def test_converged_implies_iteration_budget():
    s = noisy_surface(PAPER_SD, 1)
    for opts in (FitOptions(), FitOptions(max_iterations=3)):
        r = fit_3pe_surface(s, options=opts)
        assert not r.converged or r.iterations <= opts.max_iterations
        assert r.residual_rms >= 0
        np.testing.assert_array_equal(r.two_sigma, 2 * np.sqrt(np.diag(r.covariance)))


# -- 2-sigma calibration per fitter ------------------------------------------------------------------------

def _coverage(truth, fits):
    return np.mean([abs(r[name] - v) <= r.error(name) for r in fits for name, v in truth.items()])


@pytest.mark.slow
def test_coverage_decay():
    t = np.linspace(0, 3e-6, 60)
    fits = [fit_exponential_decay(add_noise(decay_curve(500e-9, t), NoiseSpec(0.03), s)) for s in range(200)]
    assert _coverage({"tau": 500e-9}, fits) >= 0.8


@pytest.mark.slow
def test_coverage_powerlaw():
    t = np.linspace(2, 10, 8)
    base = Curve(t, 3e6 * t**1.4, None, AxisKind.TEMPERATURE)
    fits = [fit_powerlaw(add_noise(base, NoiseSpec(0.2), s)) for s in range(300)]
    assert _coverage({"exponent": 1.4}, fits) >= 0.8


@pytest.mark.slow
def test_coverage_activation():
    fits = [fit_activation(add_noise(field_series(2.2e6, 6.0e6, 5.0), NoiseSpec(0.2), s), 0.5) for s in range(200)]
    assert _coverage({"g_eff": 5.0}, fits) >= 0.8


@pytest.mark.slow
def test_coverage_3pe():
    fits = [fit_3pe_surface(noisy_surface(PAPER_SD, s), gamma0=0.4e6) for s in range(200)]
    assert _coverage({"gamma1": 1.3e6, "rate_r": 0.026e6, "t1": 6.7e-3}, fits) >= 0.8


@pytest.mark.slow
def test_coverage_hole():
    h = hole_spectrum(DephasingParams(), 1.28)
    fits = [fit_hole_profile(HoleSpectrum.from_curve(add_noise(h.to_curve(), NoiseSpec(0.0, 0.02), s)))
            for s in range(200)]
    assert _coverage({"gamma_h": h.gamma_h, "side_offset": h.side_offset}, fits) >= 0.8


@pytest.mark.slow
def test_coverage_linear():
    x = np.linspace(0.7, 2.2, 7)
    base = Curve(x, 12.3e6 * x)
    fits = [fit_linear(add_noise(base, NoiseSpec(0.0, 0.3e6), s)) for s in range(300)]
    assert _coverage({"slope": 12.3e6, "intercept": 0.0}, fits) >= 0.8


def test_modfreq_flags_line_blended_with_zero_frequency():
    # 0.6 T with 5 MHz damping: barely one period in the window and the line merges with the zero lobe
    t = np.linspace(0, 3e-6, 1501)
    c = simulate_2pe_decay(DephasingParams(t2=3760e-9), Environment(0.6, 0.15), t)
    r = fit_modulation_frequency(c)
    assert r.flags == ["modulation blended with zero frequency"]
    assert abs(r["f_m"] - 6.36e6) <= r.error("f_m")


@pytest.mark.slow
def test_coverage_modfreq():
    t = np.linspace(0, 3e-6, 1501)
    base = simulate_2pe_decay(DephasingParams(t2=3760e-9, mod_damp_sigma=1.5e6), Environment(1.3, 0.15), t)
    fits = [fit_modulation_frequency(add_noise(base, NoiseSpec(0.01), s), (0, 600e-9), (600e-9, 3e-6))
            for s in range(200)]
    assert _coverage({"f_m": 13.78e6}, fits) >= 0.8
