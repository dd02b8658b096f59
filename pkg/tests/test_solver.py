import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import least_squares

from echofit.errors import ConfigError
from echofit.solver import FitOptions, covariance_from_jacobian, levenberg_marquardt, numeric_jacobian


def exp_problem(seed, n=40):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 5, n)
    y = 3.0 * np.exp(-t / 1.3) + 0.5 + 0.02 * rng.standard_normal(n)
    return lambda p: p[0] * np.exp(-t / p[1]) + p[2] - y


def oracle(fun, p0, lower=-np.inf, upper=np.inf):
    return least_squares(fun, p0, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15, method="trf")


@pytest.mark.parametrize("seed", range(5))
def test_matches_scipy_on_exponential(seed):
    fun = exp_problem(seed)
    ours = levenberg_marquardt(fun, [1.0, 1.0, 0.0], scale=[1.0, 1.0, 1.0])
    ref = oracle(fun, [1.0, 1.0, 0.0])
    assert ours.converged
    np.testing.assert_allclose(ours.x, ref.x, rtol=1e-7, atol=1e-9)


def test_rosenbrock_minimum():
    def fun(p):
        return np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])

    sol = levenberg_marquardt(fun, [-1.2, 1.0], scale=[1.0, 1.0])
    assert sol.converged
    np.testing.assert_allclose(sol.x, [1.0, 1.0], rtol=1e-8)


def test_active_bound_matches_scipy():
    fun = exp_problem(1)
    lower, upper = [0.0, 1.5, -1.0], [10.0, 10.0, 1.0]
    ours = levenberg_marquardt(fun, [1.0, 2.0, 0.0], lower=lower, upper=upper)
    ref = oracle(fun, [1.0, 2.0, 0.0], lower, upper)
    assert ours.x[1] == pytest.approx(1.5)
    np.testing.assert_allclose(ours.x, ref.x, rtol=1e-6, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 5), st.floats(0.2, 3), st.floats(-1, 1), st.integers(0, 1000))
def test_random_exponentials_match_scipy(a, tau, c, seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 4 * tau, 30)
    y = a * np.exp(-t / tau) + c + 0.01 * rng.standard_normal(30)

    def fun(p):
        # trial steps may send tau negative
        with np.errstate(over="ignore"):
            return p[0] * np.exp(-t / p[1]) + p[2] - y

    p0 = [1.0, 1.0, 0.0]
    ours = levenberg_marquardt(fun, p0, scale=[1.0, 1.0, 1.0])
    ref = oracle(fun, p0)
    cost_ours = 0.5 * np.sum(fun(ours.x) ** 2)
    assert cost_ours <= ref.cost * (1 + 1e-8) + 1e-14


def test_numeric_jacobian_is_accurate():
    x = np.array([0.7, -1.3])

    def fun(p):
        return np.array([np.sin(p[0]) * p[1], p[0] ** 3, np.exp(p[1])])

    exact = np.array([[np.cos(0.7) * -1.3, np.sin(0.7)], [3 * 0.49, 0.0], [0.0, np.exp(-1.3)]])
    jac = numeric_jacobian(fun, x, fun(x), np.full(2, -np.inf), np.full(2, np.inf))
    np.testing.assert_allclose(jac, exact, rtol=1e-8, atol=1e-10)


def test_numeric_jacobian_one_sided_at_bound():
    x = np.array([0.0])
    calls = []

    def fun(p):
        calls.append(p[0])
        return np.array([p[0] ** 2 + p[0]])

    jac = numeric_jacobian(fun, x, fun(x), np.array([0.0]), np.array([np.inf]))
    assert min(calls) >= 0.0
    assert jac[0, 0] == pytest.approx(1.0, rel=1e-4)


def test_covariance_matches_linear_theory():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((50, 3))
    r = rng.standard_normal(50)
    cov, bad = covariance_from_jacobian(a, r, absolute_sigma=True)
    np.testing.assert_allclose(cov, np.linalg.inv(a.T @ a), rtol=1e-10)
    assert not bad.any()
    scaled, _ = covariance_from_jacobian(a, r, absolute_sigma=False)
    np.testing.assert_allclose(scaled, np.linalg.inv(a.T @ a) * (r @ r) / 47, rtol=1e-10)


def test_covariance_flags_unidentifiable_direction():
    rng = np.random.default_rng(1)
    col = rng.standard_normal(30)
    jac = np.column_stack([col, 2 * col, rng.standard_normal(30)])
    cov, bad = covariance_from_jacobian(jac, np.zeros(30), absolute_sigma=True)
    assert bad.tolist() == [True, True, False]
    assert np.isinf(cov[0, 0]) and np.isfinite(cov[2, 2])


def test_iteration_limit_reports_not_converged():
    sol = levenberg_marquardt(exp_problem(0), [1.0, 1.0, 0.0], options=FitOptions(max_iterations=1))
    assert not sol.converged
    assert sol.iterations == 1
    assert np.all(np.isfinite(sol.x))


def test_deterministic():
    a = levenberg_marquardt(exp_problem(3), [1.0, 1.0, 0.0])
    b = levenberg_marquardt(exp_problem(3), [1.0, 1.0, 0.0])
    assert np.array_equal(a.x, b.x) and np.array_equal(a.jacobian, b.jacobian)


def test_options_validation_collects_errors():
    with pytest.raises(ConfigError) as exc:
        FitOptions(max_iterations=0, relative_tolerance=0.0, bounds={"x": (1.0, 0.0)})
    assert len(exc.value.errors) == 3


def test_options_box_tightens_and_rejects_unknown():
    lo, hi = FitOptions(bounds={"b": (1.0, 2.0)}).box(["a", "b"], [0.0, 0.0], [np.inf, 5.0])
    assert lo.tolist() == [0.0, 1.0] and hi.tolist() == [np.inf, 2.0]
    with pytest.raises(ConfigError):
        FitOptions(bounds={"c": (1.0, 2.0)}).box(["a", "b"], [0.0, 0.0], [1.0, 1.0])


def test_non_finite_start_rejected():
    with pytest.raises(ValueError):
        levenberg_marquardt(lambda p: np.array([np.nan]), [1.0])
