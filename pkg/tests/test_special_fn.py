import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from scipy.integrate import quad

from censem.errors import DomainError, NonConvergenceError
from censem.special_fn import (
    EULER_GAMMA,
    SpecialFnConfig,
    d_series,
    euler_gamma,
    gamma_complete,
    gamma_lower,
    gamma_upper,
)

SQRT_PI = 1.7724538509055159


# --- independent oracles ----------------------------------------------------


def gamma_quad(s: float) -> float:
    """Adaptive quadrature of the defining integral, split at t=1."""
    f = lambda t: t ** (s - 1.0) * math.exp(-t)
    a, _ = quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    b, _ = quad(f, 1.0, np.inf, epsabs=1e-13, epsrel=1e-13)
    return a + b


def gamma_upper_quad(s: float, x: float) -> float:
    f = lambda t: t ** (s - 1.0) * math.exp(-t)
    v, _ = quad(f, x, np.inf, epsabs=1e-13, epsrel=1e-13)
    return v


def d_series_decimal(a: float, z: float, terms: int = 200) -> float:
    """Brute-force 200-term summation at 60-digit precision."""
    getcontext().prec = 60
    s = Decimal(a) + 1
    zd = Decimal(z)
    log_z = zd.ln()
    total = Decimal(0)
    fact = Decimal(1)
    for p in range(terms):
        if p:
            fact *= p
        exponent = s + p
        term = (log_z * exponent).exp() / (fact * exponent * exponent)
        total += term if p % 2 == 0 else -term
    return float(total)


# --- gamma_complete ---------------------------------------------------------


def test_gamma_complete_factorial():
    assert gamma_complete(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_complete(5.0) == pytest.approx(24.0, rel=1e-14)


def test_gamma_complete_half():
    assert gamma_complete(0.5) == pytest.approx(SQRT_PI, rel=1e-13)


def test_gamma_complete_vs_quadrature():
    s = 2.7526
    assert gamma_complete(s) == pytest.approx(gamma_quad(s), rel=1e-10)


def test_gamma_complete_domain():
    with pytest.raises(DomainError):
        gamma_complete(0.0)
    with pytest.raises(DomainError):
        gamma_complete(-1.5)


def test_gamma_complete_saturates():
    assert gamma_complete(200.0) == math.inf


# --- gamma_upper ------------------------------------------------------------


def test_gamma_upper_order_one_is_survival():
    assert gamma_upper(1.0, 0.7) == pytest.approx(math.exp(-0.7), rel=1e-13)


def test_gamma_upper_at_zero_is_complete():
    assert gamma_upper(0.5, 0.0) == pytest.approx(SQRT_PI, rel=1e-13)


def test_gamma_upper_order_zero_vs_quadrature():
    v, _ = quad(lambda t: math.exp(-t) / t, 1.0, np.inf, epsabs=1e-14)
    assert gamma_upper(0.0, 1.0) == pytest.approx(v, rel=1e-11)
    assert gamma_upper(0.0, 1.0) == pytest.approx(0.2193839, abs=5e-8)


def test_gamma_upper_order_zero_small_x_branch():
    # the series and continued-fraction branches must agree near x = 1
    for x in (0.2, 0.8, 0.999, 1.0, 1.001, 3.0):
        assert gamma_upper(0.0, x) == pytest.approx(gamma_upper_quad(0.0, x), rel=1e-10)


def test_gamma_upper_domain():
    with pytest.raises(DomainError):
        gamma_upper(0.0, 0.0)
    with pytest.raises(DomainError):
        gamma_upper(-0.1, 1.0)
    with pytest.raises(DomainError):
        gamma_upper(1.0, -0.1)


def test_gamma_upper_random_spot_checks_vs_quadrature():
    rng = np.random.default_rng(42)
    for _ in range(25):
        s = float(rng.uniform(0.05, 9.0))
        x = float(rng.uniform(0.01, 25.0))
        assert gamma_upper(s, x) == pytest.approx(gamma_upper_quad(s, x), rel=1e-9)


# --- property grids (recurrence, complementarity, monotonicity) -------------


def _grid(n=50):
    return (
        np.linspace(0.1, 10.0, n),
        np.geomspace(0.01, 30.0, n),
    )


def test_recurrence_grid():
    # Gamma(s+1, x) = s Gamma(s, x) + x^s e^(-x)
    svals, xvals = _grid()
    worst = 0.0
    for s in svals:
        for x in xvals:
            lhs = gamma_upper(s + 1.0, x)
            rhs = s * gamma_upper(s, x) + x ** s * math.exp(-x)
            worst = max(worst, abs(lhs - rhs) / lhs)
    assert worst <= 1e-10


def test_complementarity_grid():
    for s in np.linspace(0.1, 10.0, 50):
        assert gamma_upper(s, 0.0) == pytest.approx(gamma_complete(s), rel=1e-12)


def test_lower_plus_upper_is_complete():
    for s in (0.1, 0.7, 1.0, 3.3, 9.5):
        for x in (0.01, 0.5, 1.0, 4.0, 25.0):
            total = gamma_lower(s, x) + gamma_upper(s, x)
            assert total == pytest.approx(gamma_complete(s), rel=1e-12)


def test_monotone_decreasing_in_x():
    # Strict decrease wherever the analytic decrement gamma(s,b)-gamma(s,a)
    # is representable at double resolution; never an increase anywhere.
    svals, xvals = _grid()
    for s in svals[::7]:
        prev_x = xvals[0]
        prev = gamma_upper(s, prev_x)
        for x in xvals[1:]:
            cur = gamma_upper(s, x)
            decrement = gamma_lower(s, x) - gamma_lower(s, prev_x)
            if decrement > 1e-12 * prev:
                assert cur < prev
            else:
                assert cur <= prev
            prev, prev_x = cur, x


def test_outputs_finite_on_domain():
    svals, xvals = _grid(20)
    for s in svals:
        for x in xvals:
            assert math.isfinite(gamma_upper(s, x))
            assert math.isfinite(gamma_lower(s, x))


# --- euler_gamma ------------------------------------------------------------


def test_euler_gamma_value():
    assert euler_gamma() == pytest.approx(0.5772156649015329, abs=1e-15)
    assert euler_gamma() == pytest.approx(0.5772157, abs=5e-8)


def test_euler_gamma_as_e1_limit():
    # -(e^(-z) log z + Gamma(0, z)) -> euler gamma as z -> 0+
    z = 1e-8
    approx = -(math.exp(-z) * math.log(z) + gamma_upper(0.0, z))
    assert approx == pytest.approx(EULER_GAMMA, abs=1e-6)


def test_e1_series_expansion_consistency():
    z = 1e-8
    assert gamma_upper(0.0, z) + math.log(z) + EULER_GAMMA == pytest.approx(0.0, abs=1e-6)


# --- d_series ---------------------------------------------------------------


def test_d_series_zero_argument():
    assert d_series(1.0, 0.0) == 0.0


def test_d_series_vs_decimal_oracle_single():
    assert d_series(1.0, 0.5) == pytest.approx(d_series_decimal(1.0, 0.5), rel=1e-12)


def test_d_series_vs_decimal_oracle_grid():
    for a in (0.1, 0.5, 1.0, 2.0, 5.0):
        for z in (0.1, 0.5, 1.0, 2.0, 5.0):
            assert d_series(a, z) == pytest.approx(d_series_decimal(a, z), rel=1e-10), (a, z)


def test_d_series_vs_order_derivative_of_gamma_upper():
    # d_series(a, z) = d/ds Gamma(s, z)|_{s=a+1} - Gamma'(a+1) + gamma_lower(a+1, z) log z
    a, z = 0.5, 2.0
    h = 1e-5
    s = a + 1.0
    dgu = (gamma_upper(s + h, z) - gamma_upper(s - h, z)) / (2 * h)
    dgc = (gamma_complete(s + h) - gamma_complete(s - h)) / (2 * h)
    lower = gamma_complete(s) - gamma_upper(s, z)
    expected = dgu - dgc + lower * math.log(z)
    assert d_series(a, z) == pytest.approx(expected, rel=1e-6)


def test_d_series_non_convergence_for_huge_z():
    with pytest.raises(NonConvergenceError):
        d_series(1.0, 200.0)


def test_d_series_domain():
    with pytest.raises(DomainError):
        d_series(0.0, 1.0)
    with pytest.raises(DomainError):
        d_series(1.0, -1.0)


# --- config -----------------------------------------------------------------


def test_config_validation():
    with pytest.raises(DomainError):
        SpecialFnConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        SpecialFnConfig(rel_tol=1e-3)
    with pytest.raises(DomainError):
        SpecialFnConfig(max_terms=10)


def test_config_controls_termination():
    loose = SpecialFnConfig(rel_tol=1e-7, max_terms=500)
    assert gamma_upper(2.0, 3.0, config=loose) == pytest.approx(
        gamma_upper(2.0, 3.0), rel=1e-6
    )
