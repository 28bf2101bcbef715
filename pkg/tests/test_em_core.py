import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from censem import (
    CensoringInterval,
    ComponentSpec,
    MixtureModel,
    censored_log_likelihood,
    e_step,
    fit,
    interval_prob,
    log_pdf,
    m_step_direct,
    q_objective,
    sample,
    update_weights,
)
from censem.em_core import (
    EmConfig,
    InitSpec,
    MStepVariant,
    Responsibilities,
    _interval_terms,
    censored_weibull_expected_logpdf,
    censored_weibull_shape_term,
    m_step_exponential,
    m_step_weibull_alpha,
    m_step_weibull_beta,
    truncated_mean_exp,
    _wbl_shape_equation,
)
from censem.errors import BracketError, DomainError, ResponsibilityUnderflowError
from censem.rootfind import golden_max
from censem.sample_data import CensoredSample, build_sample, generate_synthetic


def resp(z_rows, zt_rows):
    return Responsibilities(
        z=np.asarray(z_rows, dtype=float).reshape(-1, np.asarray(z_rows).shape[-1] if np.asarray(z_rows).size else 1),
        z_tilde=np.asarray(zt_rows, dtype=float),
    )


# --- quadrature oracles -------------------------------------------------------


def expected_logpdf_quad(prev: ComponentSpec, alpha: float, beta: float, iv: CensoringInterval) -> float:
    """E[log f(Y|alpha,beta) | Y in iv] under prev, by quadrature in the
    unit-exponential variable of the previous parameters."""
    a = 0.0 if iv.lo == 0.0 else (iv.lo / prev.alpha) ** prev.beta
    b = (iv.hi / prev.alpha) ** prev.beta
    la_prev = math.log(prev.alpha)

    def integrand(u):
        log_y = la_prev + math.log(u) / prev.beta
        rel = log_y - math.log(alpha)
        return (math.log(beta) - math.log(alpha) + (beta - 1.0) * rel
                - math.exp(beta * rel)) * math.exp(-u)

    val, _ = quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
    mass = math.exp(-a) - math.exp(-b)
    return val / mass


def cond_mean_exp_quad(alpha: float, iv: CensoringInterval) -> float:
    num, _ = quad(lambda y: y * math.exp(-y / alpha) / alpha, iv.lo, iv.hi,
                  epsabs=1e-14, epsrel=1e-13)
    den, _ = quad(lambda y: math.exp(-y / alpha) / alpha, iv.lo, iv.hi,
                  epsabs=1e-14, epsrel=1e-13)
    return num / den


# --- e_step --------------------------------------------------------------------


def test_e_step_symmetric_components():
    c = ComponentSpec.exponential(2.0)
    m = MixtureModel([0.5, 0.5], [c, c])
    s = CensoredSample(np.array([1.0, 3.0]), [CensoringInterval(0.0, 0.5, 2)])
    r = e_step(m, s)
    assert np.allclose(r.z, 0.5, atol=1e-14)
    assert np.allclose(r.z_tilde, 0.5, atol=1e-14)


def test_e_step_two_exponentials_formula():
    m = MixtureModel([0.5, 0.5], [ComponentSpec.exponential(1.0), ComponentSpec.exponential(2.0)])
    s = CensoredSample(np.array([1.0]), [])
    r = e_step(m, s)
    f1, f2 = math.exp(-1.0), 0.5 * math.exp(-0.5)
    assert r.z[0, 0] == pytest.approx(f1 / (f1 + f2), rel=1e-12)
    assert r.z[0, 0] == pytest.approx(0.5481, abs=5e-5)


def test_e_step_zero_weight_component():
    m = MixtureModel([0.0, 1.0], [ComponentSpec.exponential(1.0), ComponentSpec.exponential(2.0)])
    s = CensoredSample(np.array([1.0, 2.0, 3.0]), [])
    r = e_step(m, s)
    assert np.all(r.z[:, 0] == 0.0)


def test_e_step_rows_sum_to_one(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 500, rng_seed=3))
    r = e_step(reference_mixture, s)
    assert np.allclose(r.z.sum(axis=1), 1.0, atol=1e-10)
    assert np.allclose(r.z_tilde.sum(axis=1), 1.0, atol=1e-10)


def test_e_step_underflow_raises_with_index():
    m = MixtureModel([1.0], [ComponentSpec.weibull(1.0, 2.0)])
    s = CensoredSample(np.array([5.0, 1e300]), [])
    with pytest.raises(ResponsibilityUnderflowError) as err:
        e_step(m, s)
    assert err.value.index == 1


def test_e_step_interval_underflow_gets_uniform_row(caplog):
    m = MixtureModel([0.5, 0.5], [ComponentSpec.exponential(1.0), ComponentSpec.weibull(1.0, 2.0)])
    s = CensoredSample(np.array([1.0]), [CensoringInterval(1e290, 1e295, 2)])
    with caplog.at_level("WARNING"):
        r = e_step(m, s)
    assert np.allclose(r.z_tilde[0], 0.5)
    assert any("underflow" in rec.message for rec in caplog.records)


# --- update_weights -------------------------------------------------------------


def test_update_weights_uniform_responsibilities():
    s = CensoredSample(np.array([1.0, 2.0]), [CensoringInterval(0.0, 0.5, 2)])
    r = resp(np.full((2, 2), 0.5), np.full((1, 2), 0.5))
    w = update_weights(r, s)
    assert np.allclose(w, [0.5, 0.5], atol=1e-15)


def test_update_weights_single_component():
    s = CensoredSample(np.array([1.0]), [])
    r = resp(np.ones((1, 1)), np.empty((0, 1)))
    assert update_weights(r, s).tolist() == [1.0]


def test_update_weights_simplex_property_random():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        z = rng.random((n, m))
        z /= z.sum(axis=1, keepdims=True)
        zt = rng.random((1, m))
        zt /= zt.sum()
        counts = int(rng.integers(0, 9))
        s = CensoredSample(
            rng.random(n) + 0.6, [CensoringInterval(0.0, 0.5, counts)]
        )
        w = update_weights(resp(z, zt), s)
        assert abs(w.sum() - 1.0) <= 1e-12
        assert np.all(w >= 0.0)


# --- truncated exponential mean ---------------------------------------------------


def test_truncated_mean_full_range_is_scale():
    assert truncated_mean_exp(1.0, CensoringInterval(0.0, 1e9)) == pytest.approx(1.0, abs=1e-12)


def test_truncated_mean_zero_bin_vs_quadrature():
    iv = CensoringInterval(0.0, 0.5)
    v = truncated_mean_exp(1.0, iv)
    assert v == pytest.approx(cond_mean_exp_quad(1.0, iv), abs=1e-12)
    # frozen from the quadrature oracle above
    assert v == pytest.approx(0.2292529587, abs=1e-9)


def test_truncated_mean_inside_interval():
    rng = np.random.default_rng(5)
    for _ in range(50):
        alpha = float(rng.uniform(0.1, 50.0))
        lo = float(rng.uniform(0.0, 10.0))
        hi = lo + float(rng.uniform(0.01, 20.0))
        v = truncated_mean_exp(alpha, CensoringInterval(lo, hi))
        assert lo < v < hi


# --- exponential M-step ------------------------------------------------------------


def test_exp_m_step_uncensored_is_mean():
    x = np.array([1.0, 2.0, 6.0])
    s = CensoredSample(x, [])
    r = resp(np.ones((3, 1)), np.empty((0, 1)))
    assert m_step_exponential(r, s, 0, alpha_prev=2.0) == pytest.approx(x.mean(), rel=1e-14)


def test_exp_m_step_fully_censored_is_conditional_mean():
    iv = CensoringInterval(0.0, 0.5, 10)
    s = CensoredSample(np.empty(0), [iv])
    r = resp(np.empty((0, 1)), np.ones((1, 1)))
    assert m_step_exponential(r, s, 0, alpha_prev=1.0) == pytest.approx(
        truncated_mean_exp(1.0, iv), rel=1e-14
    )


def test_exp_m_step_matches_block_maximizer():
    # hand-set two-component responsibilities; golden-section maximization
    # of the exponential conditional-expectation block is the oracle
    x = np.array([0.7, 1.3, 4.0, 9.0])
    iv = CensoringInterval(0.0, 0.5, 6)
    s = CensoredSample(x, [iv])
    z = np.array([[0.9, 0.1], [0.7, 0.3], [0.2, 0.8], [0.05, 0.95]])
    zt = np.array([[0.6, 0.4]])
    r = resp(z, zt)
    alpha_prev = 2.0
    got = m_step_exponential(r, s, 0, alpha_prev)
    C = truncated_mean_exp(alpha_prev, iv)
    wsum = z[:, 0].sum() + 6 * zt[0, 0]
    bsum = (z[:, 0] * x).sum() + 6 * zt[0, 0] * C

    def block(alpha):
        return -wsum * math.log(alpha) - bsum / alpha

    a_star, _ = golden_max(block, got / 10.0, got * 10.0, xtol=1e-12)
    assert got == pytest.approx(a_star, rel=1e-6)


# --- Weibull scale M-step ------------------------------------------------------------


def test_wbl_alpha_beta_one_equals_exponential():
    x = np.array([1.0, 2.0, 6.0])
    s = CensoredSample(x, [])
    r = resp(np.ones((3, 1)), np.empty((0, 1)))
    prev = ComponentSpec.weibull(2.0, 1.0)
    assert m_step_weibull_alpha(r, s, 0, prev) == pytest.approx(
        m_step_exponential(r, s, 0, 2.0), rel=1e-13
    )


def test_wbl_alpha_uncensored_fixed_shape_mle():
    x = np.array([0.5, 1.5, 2.5, 8.0])
    beta = 1.7
    s = CensoredSample(x, [])
    r = resp(np.ones((4, 1)), np.empty((0, 1)))
    prev = ComponentSpec.weibull(3.0, beta)
    expected = (np.mean(x ** beta)) ** (1.0 / beta)
    assert m_step_weibull_alpha(r, s, 0, prev) == pytest.approx(expected, rel=1e-13)


def test_wbl_alpha_censored_matches_score_root():
    # oracle: bracketed root of the scale score with the shape pinned,
    # using the closed form Gamma(2,x) = (1+x) e^(-x)
    x = np.array([1.0, 2.0, 3.0, 10.0, 40.0])
    iv = CensoringInterval(0.0, 0.5, 7)
    s = CensoredSample(x, [iv])
    z = np.array([[1.0], [1.0], [1.0], [1.0], [1.0]])
    zt = np.array([[1.0]])
    r = resp(z, zt)
    prev = ComponentSpec.weibull(5.0, 0.8)
    got = m_step_weibull_alpha(r, s, 0, prev)

    zl = (iv.lo / prev.alpha) ** prev.beta
    zh = (iv.hi / prev.alpha) ** prev.beta
    mass = math.exp(-zl) - math.exp(-zh)
    g2 = lambda t: (1.0 + t) * math.exp(-t)
    G = (g2(zl) - g2(zh)) / mass

    def residual(alpha):
        t1 = np.sum(-1.0 + (x / alpha) ** prev.beta)
        t2 = 7.0 * (-1.0 + (prev.alpha / alpha) ** prev.beta * G)
        return t1 + t2

    root = brentq(residual, 1e-3, 1e4, xtol=1e-12, rtol=1e-15)
    assert got == pytest.approx(root, rel=1e-8)


# --- Weibull shape M-step -------------------------------------------------------------


def test_wbl_beta_equation_reduces_to_textbook_form():
    x = np.array([0.4, 1.1, 2.2, 5.0])
    w = np.ones(4)
    alpha = 1.9
    f = _wbl_shape_equation(x, w, np.empty(0), [], alpha, beta_prev=1.0)
    for beta in (0.3, 0.8, 1.5, 3.0):
        l = np.log(x / alpha)
        direct = x.size / beta + l.sum() - np.sum((x / alpha) ** beta * l)
        assert f(beta) == pytest.approx(direct, rel=1e-12)


def test_wbl_beta_consistency_large_sample():
    xs = sample(MixtureModel([1.0], [ComponentSpec.weibull(3.0, 2.0)]), 100_000, rng_seed=17)
    s = CensoredSample(xs, [])
    res = fit(s, (0, 1))
    assert res.converged
    assert res.model.components[0].beta == pytest.approx(2.0, abs=0.03)


def test_wbl_beta_censoring_vanishes_continuously():
    xs = sample(MixtureModel([1.0], [ComponentSpec.weibull(1.0, 0.8)]), 3000, rng_seed=23)
    base = fit(CensoredSample(np.sort(xs), []), (0, 1)).model.components[0].beta
    deviations = []
    for cut in (0.3, 0.1, 0.03, 0.01, 0.003):
        censored = xs[xs >= cut]
        count = int((xs < cut).sum())
        s = CensoredSample(np.sort(censored), [CensoringInterval(0.0, cut, count)])
        beta_hat = fit(s, (0, 1)).model.components[0].beta
        deviations.append(abs(beta_hat - base))
    assert deviations[-1] < 0.01
    assert deviations[-1] <= deviations[0] + 1e-9


def test_wbl_beta_bracket_failure_reports_endpoints():
    x = np.array([2.0, 2.0, 2.0, 2.0])  # zero spread: no interior root
    s = CensoredSample(x, [])
    r = resp(np.ones((4, 1)), np.empty((0, 1)))
    prev = ComponentSpec.weibull(2.0, 1.0)
    with pytest.raises(BracketError) as err:
        m_step_weibull_beta(r, s, 0, prev, alpha_new=2.0, config=EmConfig(beta_bracket=(0.5, 4.0)))
    assert err.value.f_lo is not None and err.value.f_hi is not None


# --- residuals of the score equations at the returned updates --------------------------


def test_score_residuals_at_m_step_solution(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 4000, rng_seed=29))
    r = e_step(reference_mixture, s)
    prev = reference_mixture.components[1]
    alpha_new = m_step_weibull_alpha(r, s, 1, prev)
    beta_new = m_step_weibull_beta(r, s, 1, prev, alpha_new)

    x = s.uncensored
    z = r.z[:, 1]
    iv = s.intervals[0]
    nzt = iv.count * r.z_tilde[0, 1]
    zl = (iv.lo / prev.alpha) ** prev.beta
    zh = (iv.hi / prev.alpha) ** prev.beta
    mass = math.exp(-zl) - math.exp(-zh)
    g2 = lambda t: (1.0 + t) * math.exp(-t)
    G = (g2(zl) - g2(zh)) / mass

    pos_scale = float(np.sum(z * (x / alpha_new) ** prev.beta) + nzt * (prev.alpha / alpha_new) ** prev.beta * G)
    resid_alpha = float(np.sum(z * (-1.0 + (x / alpha_new) ** prev.beta))
                        + nzt * (-1.0 + (prev.alpha / alpha_new) ** prev.beta * G))
    assert abs(resid_alpha) <= 1e-8 * pos_scale

    f = _wbl_shape_equation(
        x, z, np.array([nzt]),
        [_interval_terms(iv, prev.alpha, prev.beta)],
        alpha_new, prev.beta,
    )
    l = np.log(x / alpha_new)
    pos_beta = (z.sum() + nzt) / beta_new + float(np.sum(np.abs(z * l)))
    assert abs(f(beta_new)) <= 1e-8 * pos_beta


# --- censored conditional expectations vs quadrature ------------------------------------


CENSORED_TERM_CASES = [
    (ComponentSpec.weibull(1.0, 0.8), 1.3, 0.9, CensoringInterval(0.0, 0.5)),
    (ComponentSpec.weibull(2500.0, 0.57), 2000.0, 0.5, CensoringInterval(0.0, 0.5)),
    (ComponentSpec.weibull(3.0, 1.4), 3.5, 1.8, CensoringInterval(0.5, 1.5)),
    (ComponentSpec.weibull(10.0, 0.6), 8.0, 0.75, CensoringInterval(1.0, 4.0)),
]


@pytest.mark.parametrize("prev,alpha,beta,iv", CENSORED_TERM_CASES)
def test_expected_logpdf_matches_quadrature(prev, alpha, beta, iv):
    terms = _interval_terms(iv, prev.alpha, prev.beta)
    got = censored_weibull_expected_logpdf(prev, alpha, beta, terms)
    want = expected_logpdf_quad(prev, alpha, beta, iv)
    assert got == pytest.approx(want, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("prev,alpha,beta,iv", CENSORED_TERM_CASES)
def test_shape_term_matches_quadrature_derivative(prev, alpha, beta, iv):
    terms = _interval_terms(iv, prev.alpha, prev.beta)
    got = censored_weibull_shape_term(prev, alpha, beta, terms)
    h = 1e-5 * beta
    e_plus = expected_logpdf_quad(prev, alpha, beta + h, iv)
    e_minus = expected_logpdf_quad(prev, alpha, beta - h, iv)
    d_expect = (e_plus - e_minus) / (2 * h)
    want = (d_expect - 1.0 / beta - math.log(prev.alpha / alpha)) * terms.mass
    assert got == pytest.approx(want, rel=2e-7, abs=2e-7)


# --- q_objective ---------------------------------------------------------------------


def test_q_objective_uncensored_is_weighted_logpdf(reference_mixture):
    s = CensoredSample(np.array([1.0, 40.0, 900.0]), [])
    r = e_step(reference_mixture, s)
    comps = reference_mixture.components
    got = q_objective(comps, r, s, comps)
    want = 0.0
    for j, x in enumerate(s.uncensored):
        for i, c in enumerate(comps):
            want += r.z[j, i] * log_pdf(c, float(x))
    assert got == pytest.approx(want, rel=1e-12)


def test_q_objective_censored_only_matches_quadrature():
    prev = ComponentSpec.weibull(2.0, 0.7)
    iv = CensoringInterval(0.0, 0.5, 9)
    s = CensoredSample(np.empty(0), [iv])
    r = resp(np.empty((0, 1)), np.array([[1.0]]))
    got = q_objective([prev], r, s, [prev])
    want = 9.0 * expected_logpdf_quad(prev, prev.alpha, prev.beta, iv)
    assert got == pytest.approx(want, rel=1e-8)


def test_q_objective_kind_mismatch_rejected():
    r = resp(np.empty((0, 1)), np.empty((0, 1)))
    s = CensoredSample(np.empty(0), [])
    with pytest.raises(DomainError):
        q_objective([ComponentSpec.exponential(1.0)], r, s, [ComponentSpec.weibull(1.0, 1.0)])


# --- direct M-step ----------------------------------------------------------------------


def _two_component_setup(seed=37):
    truth = MixtureModel(
        [0.3, 0.7], [ComponentSpec.exponential(5.0), ComponentSpec.weibull(60.0, 0.9)]
    )
    s = build_sample(generate_synthetic(truth, 1500, rng_seed=seed))
    r = e_step(truth, s)
    return truth, s, r


def test_direct_exp_agrees_with_closed_form():
    truth, s, r = _two_component_setup()
    out = m_step_direct(r, s, truth.components)
    closed = m_step_exponential(r, s, 0, truth.components[0].alpha)
    assert out[0].alpha == pytest.approx(closed, rel=1e-6)


def test_direct_weibull_uncensored_agrees_with_mle():
    xs = sample(MixtureModel([1.0], [ComponentSpec.weibull(4.0, 1.3)]), 4000, rng_seed=41)
    s = CensoredSample(xs, [])
    r = resp(np.ones((xs.size, 1)), np.empty((0, 1)))
    prev = ComponentSpec.weibull(3.0, 1.0)
    out = m_step_direct(r, s, [prev], EmConfig(direct_sweeps=30, direct_xtol=1e-10))

    # textbook MLE oracle: profile the shape equation, closed-form scale
    def shape_eq(beta):
        l = np.log(xs)
        ab = np.mean(xs ** beta)
        return 1.0 / beta + l.mean() - np.sum(xs ** beta * l) / (xs.size * ab)

    beta_star = brentq(shape_eq, 0.2, 5.0, xtol=1e-13)
    alpha_star = np.mean(xs ** beta_star) ** (1.0 / beta_star)
    assert out[0].beta == pytest.approx(beta_star, rel=2e-4)
    assert out[0].alpha == pytest.approx(alpha_star, rel=2e-4)


def test_direct_solution_is_local_max_of_q():
    truth, s, r = _two_component_setup(seed=43)
    out = m_step_direct(r, s, truth.components, EmConfig(direct_sweeps=40, direct_xtol=1e-11))
    q0 = q_objective(out, r, s, truth.components)
    for i, c in enumerate(out):
        for field_name in ("alpha", "beta"):
            if c.kind.value == "exp" and field_name == "beta":
                continue
            for sign in (+1.0, -1.0):
                cand = list(out)
                if field_name == "alpha":
                    cand[i] = (ComponentSpec.exponential(c.alpha * (1 + 1e-3 * sign))
                               if c.kind.value == "exp"
                               else ComponentSpec.weibull(c.alpha * (1 + 1e-3 * sign), c.beta))
                else:
                    cand[i] = ComponentSpec.weibull(c.alpha, c.beta * (1 + 1e-3 * sign))
                assert q_objective(cand, r, s, truth.components) < q0


# --- fit ---------------------------------------------------------------------------------


def test_fit_single_exponential_recovery():
    xs = sample(MixtureModel([1.0], [ComponentSpec.exponential(5.0)]), 20_000, rng_seed=51)
    s = CensoredSample(xs, [])
    res = fit(s, (1, 0))
    assert res.converged and res.iterations <= 5
    se = 5.0 / math.sqrt(xs.size)
    assert res.model.components[0].alpha == pytest.approx(xs.mean(), abs=1e-9)
    assert abs(res.model.components[0].alpha - 5.0) <= 2 * se


def test_fit_huge_epsilon_stops_after_one_iteration(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 500, rng_seed=53))
    res = fit(s, (1, 1), EmConfig(epsilon=1e18))
    assert res.converged and res.iterations == 1
    assert res.loglik_trace.size == 2


def test_fit_recovers_reference_model(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 30_000, rng_seed=59))
    res = fit(s, (1, 1))
    assert res.converged and not res.degenerate
    w_exp = float(res.model.weights[0])
    c_exp, c_wbl = res.model.components
    assert abs(w_exp - 0.2) <= 0.03
    assert abs(c_exp.alpha - 17.0) / 17.0 <= 0.08
    assert abs(c_wbl.alpha - 2500.0) / 2500.0 <= 0.08
    assert abs(c_wbl.beta - 0.57) <= 0.03


def test_fit_trace_matches_independent_loglik(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 2000, rng_seed=61))
    res = fit(s, (1, 1))
    assert res.loglik == pytest.approx(censored_log_likelihood(res.model, s), abs=1e-9)
    assert res.converged
    assert abs(res.loglik_trace[-1] - res.loglik_trace[-2]) <= 1e-5


def test_fit_responsibility_rows_sum_to_one(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 1000, rng_seed=67))
    res = fit(s, (1, 1))
    r = res.final_responsibilities
    assert np.allclose(r.z.sum(axis=1), 1.0, atol=1e-10)
    assert np.allclose(r.z_tilde.sum(axis=1), 1.0, atol=1e-10)
    assert abs(res.model.weights.sum() - 1.0) <= 1e-12


def test_fit_exchangeable_under_init_permutation():
    truth = MixtureModel(
        [0.4, 0.6], [ComponentSpec.weibull(2.0, 1.5), ComponentSpec.weibull(50.0, 0.8)]
    )
    xs = sample(truth, 4000, rng_seed=71)
    s = CensoredSample(xs, [])
    cfg_a = EmConfig(init=InitSpec(alphas=(2.5, 40.0), betas=(1.0, 1.0)))
    cfg_b = EmConfig(init=InitSpec(alphas=(40.0, 2.5), betas=(1.0, 1.0)))
    res_a = fit(s, (0, 2), cfg_a)
    res_b = fit(s, (0, 2), cfg_b)
    assert res_a.loglik == pytest.approx(res_b.loglik, abs=1e-9)
    order_a = np.argsort([c.alpha for c in res_a.model.components])
    order_b = np.argsort([c.alpha for c in res_b.model.components])
    for ia, ib in zip(order_a, order_b):
        assert res_a.model.components[ia].alpha == pytest.approx(
            res_b.model.components[ib].alpha, rel=1e-6
        )


def test_fit_zeta_transform_consistency(reference_mixture):
    for c in reference_mixture.components:
        iv = CensoringInterval(0.0, 0.5)
        t = _interval_terms(iv, c.alpha, c.beta)
        assert interval_prob(c, iv) == pytest.approx(t.mass, abs=1e-12)


def test_fit_monotone_trace_direct_variant(reference_mixture):
    s = build_sample(generate_synthetic(reference_mixture, 1500, rng_seed=73))
    res = fit(s, (1, 1), EmConfig(m_step_variant=MStepVariant.DIRECT_OBJECTIVE))
    assert np.all(np.diff(res.loglik_trace) >= -1e-9)


def test_fit_sample_too_small_rejected():
    s = CensoredSample(np.array([1.0, 2.0]), [])
    with pytest.raises(DomainError):
        fit(s, (1, 1))


def test_fit_all_censored_flags_degenerate():
    s = CensoredSample(np.empty(0), [CensoringInterval(0.0, 0.5, 50)])
    res = fit(s, (1, 0), EmConfig(max_iter=50))
    assert res.degenerate or not res.converged


def test_config_validation():
    with pytest.raises(DomainError):
        EmConfig(epsilon=0.0)
    with pytest.raises(DomainError):
        EmConfig(max_iter=0)
    with pytest.raises(DomainError):
        EmConfig(beta_bracket=(2.0, 1.0))
    with pytest.raises(DomainError):
        EmConfig(weight_floor=1.5)
