import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quantar.ar1 import Theta, simulate
from quantar.filter import (
    filter_step,
    init_filter,
    log_likelihood,
    log_likelihood_terms,
    mc_likelihood_oracle,
)
from quantar.laws import gaussian_quantized_law
from quantar.normal import GaussianParams, interval_prob

mpmath.mp.dps = 30
S0_STD = 0.382924922548026  # Phi(1/2) - Phi(-1/2)

thetas = st.builds(Theta, st.floats(0.0, 0.9), st.floats(-1, 1), st.floats(0.5, 2.0))


def test_init_examples():
    for a in (0.0, 0.3, 0.9):
        st0 = init_filter(Theta(a, 0.0, 1.0), 0)
        assert math.exp(st0.log_lik) == pytest.approx(S0_STD, abs=1e-15)
        assert np.dot(st0.weights, st0.density) == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(st0.nodes) > 0)
        assert st0.nodes[0] > -0.5 and st0.nodes[-1] < 0.5


def test_init_degenerate():
    st0 = init_filter(Theta(0.5, 0.0, 1.0), 30)
    assert st0.degenerate
    assert st0.log_lik == -math.inf
    assert not np.any(np.isnan(st0.density))
    assert filter_step(st0, Theta(0.5, 0.0, 1.0), 0) is st0
    assert log_likelihood(Theta(0.5, 0.0, 1.0), [30, 0, 1]) == -math.inf


def test_step_without_memory():
    th = Theta(0.0, 0.3, 0.8)
    state = init_filter(th, 2)
    for y in (0, 1, -1, 1):
        nxt = filter_step(state, th, y)
        s = math.exp(nxt.log_lik - state.log_lik)
        assert s == pytest.approx(interval_prob(y - 0.5, y + 0.5, GaussianParams(0.3, 0.8)), rel=1e-12)
        state = nxt


def _exact_one_step(alpha, mu, sigma, y0, y1):
    """P(Y1 = y1 | Y0 = y0) by adaptive mpmath quadrature of the exact integral."""
    def joint(x0):
        dens = mpmath.npdf(x0, mu, sigma)
        m = alpha * x0 + mu
        return dens * (mpmath.ncdf((y1 + 0.5 - m) / sigma) - mpmath.ncdf((y1 - 0.5 - m) / sigma))
    num = mpmath.quad(joint, [y0 - 0.5, y0 + 0.5])
    den = mpmath.ncdf((y0 + 0.5 - mu) / sigma) - mpmath.ncdf((y0 - 0.5 - mu) / sigma)
    return float(num / den)


@pytest.mark.parametrize("m", [32, 128])
def test_one_step_against_exact_integral(m):
    th = Theta(0.5, 0.2, 1.0)
    st0 = init_filter(th, 0, m)
    st1 = filter_step(st0, th, 1)
    s1 = math.exp(st1.log_lik - st0.log_lik)
    assert s1 == pytest.approx(_exact_one_step(0.5, 0.2, 1.0, 0, 1), abs=1e-8)


def test_one_step_refinement_agreement():
    th = Theta(0.5, 0.2, 1.0)
    a = filter_step(init_filter(th, 0, 32), th, 1).log_lik
    b = filter_step(init_filter(th, 0, 128), th, 1).log_lik
    assert abs(math.exp(a) - math.exp(b)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(thetas, st.lists(st.integers(-4, 4), min_size=2, max_size=12))
def test_conditional_probabilities_in_unit_interval(theta, y):
    terms = log_likelihood_terms(theta, y)
    finite = terms[np.isfinite(terms)]
    assert np.all(finite <= 0)
    assert not np.any(np.isnan(terms))


def test_single_observation():
    th = Theta(0.4, -0.3, 1.4)
    assert log_likelihood(th, [1]) == pytest.approx(
        math.log(interval_prob(0.5, 1.5, GaussianParams(-0.3, 1.4))), rel=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_iid_factorization(seed):
    th = Theta(0.0, 0.2 * seed - 0.4, 0.6 + 0.3 * seed)
    y = simulate(th, 300, seed).y
    law = gaussian_quantized_law(th.mu, th.sigma)
    expect = math.fsum(math.log(law.mass(k)) for k in y)
    assert log_likelihood(th, y) == pytest.approx(expect, abs=1e-10)


def test_state_api_matches_kernel():
    th = Theta(0.6, 0.1, 0.9)
    y = simulate(th, 50, 4).y
    state = init_filter(th, y[0])
    for yk in y[1:]:
        state = filter_step(state, th, yk)
        assert np.dot(state.weights, state.density) == pytest.approx(1.0, abs=1e-10)
        assert np.all(state.density >= 0)
    assert state.log_lik == pytest.approx(log_likelihood(th, y), abs=1e-10)


def test_chain_rule_and_monotonicity():
    th = Theta(0.5, 0.2, 1.0)
    y = simulate(th, 40, 8).y
    prev = None
    for n in range(1, len(y) + 1):
        cur = log_likelihood(th, y[:n])
        if prev is not None:
            assert cur <= prev
            assert cur - prev == pytest.approx(log_likelihood_terms(th, y[:n])[-1], abs=1e-12)
        prev = cur


@pytest.mark.parametrize("theta", [Theta(0.5, 0.2, 1.0), Theta(0.9, -1.0, 0.5), Theta(0.0, 1.0, 0.5),
                                   Theta(0.9, 1.0, 2.0), Theta(0.3, -0.5, 0.5)])
def test_quadrature_self_convergence(theta):
    y = simulate(theta, 10**4 - 1, 13).y
    diff = abs(log_likelihood(theta, y, 32) - log_likelihood(theta, y, 128))
    assert diff <= 1e-7 * len(y)


def test_likelihood_input_validation():
    th = Theta(0.5, 0.2, 1.0)
    with pytest.raises(ValueError):
        log_likelihood(th, [])
    with pytest.raises(ValueError):
        log_likelihood(th, [0.5, 1])
    with pytest.raises(ValueError):
        log_likelihood(th, [0, 1], m=1)
    with pytest.raises(TypeError):
        log_likelihood((0.5, 0.2, 1.0), [0, 1])


def test_mc_oracle_iid_and_determinism():
    th = Theta(0.0, 0.0, 1.0)
    p, se = mc_likelihood_oracle(th, [0], 10**5, seed=1)
    assert 0 <= p <= 1
    assert abs(p - S0_STD) < 3 * se
    assert mc_likelihood_oracle(th, [0], 10**5, seed=1) == (p, se)


def test_filter_against_monte_carlo_example():
    th = Theta(0.5, 0.2, 1.0)
    y = [0, 1, 0, 1]
    p, se = mc_likelihood_oracle(th, y, 10**7, seed=99)
    assert abs(math.exp(log_likelihood(th, y)) - p) < 3 * se
