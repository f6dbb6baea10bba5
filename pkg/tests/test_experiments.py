import json

import numpy as np
import pytest

from quantar.ar1 import DEFAULT_BOX, THETA_STAR, Theta, ThetaBox, simulate
from quantar.experiments import (
    consistency_experiment,
    gn_convergence_trace,
    kl_gap_estimate,
    likelihood_profile,
)
from quantar.mle import EstimateConfig

from conftest import CONSISTENCY_N

FAST = EstimateConfig(grid_dims=(3, 3, 3), max_evals=60)


def test_consistency_shape():
    rep = consistency_experiment(THETA_STAR, DEFAULT_BOX, (100,), reps=1, seed=1, config=FAST)
    rows = list(rep.rows())
    assert rep.errors.shape == (1, 1, 3)
    assert {r[1] for r in rows} == {"alpha", "mu", "sigma"}
    assert len([r for r in rows if r[2] == "median"]) == 3
    assert np.all(rep.errors >= 0)
    d = rep.to_dict()
    assert len(d["per_parameter_error_quantiles"]) == 3
    json.dumps(d)


def test_consistency_collapsed_box_zero_error():
    rep = consistency_experiment(THETA_STAR, ThetaBox.point(THETA_STAR), (50, 100), reps=3, seed=2)
    assert np.all(rep.errors == 0)
    assert rep.missing == 0


def test_consistency_reproducible():
    a = consistency_experiment(THETA_STAR, DEFAULT_BOX, (60,), reps=2, seed=4, config=FAST)
    b = consistency_experiment(THETA_STAR, DEFAULT_BOX, (60,), reps=2, seed=4, config=FAST)
    np.testing.assert_array_equal(a.errors, b.errors)


def test_consistency_preconditions():
    with pytest.raises(ValueError):
        consistency_experiment(Theta(0.95, 0.0, 1.0), DEFAULT_BOX, (10,), reps=1)
    with pytest.raises(ValueError):
        consistency_experiment(THETA_STAR, DEFAULT_BOX, (10,), reps=0)


@pytest.mark.slow
def test_consistency_median_error_non_increasing(consistency_run):
    med = consistency_run.median
    assert consistency_run.n_values == list(CONSISTENCY_N)
    assert consistency_run.missing == 0
    assert np.all(np.diff(med, axis=0) <= 0), med


def test_profile_single_point():
    y = simulate(THETA_STAR, 200, 3).y
    rep = likelihood_profile(THETA_STAR, y, "sigma", [1.0])
    assert rep.grid.shape == rep.normalized_log_lik.shape == (1,)
    assert rep.argmax == 1.0


def test_profile_bad_axis():
    with pytest.raises(ValueError):
        likelihood_profile(THETA_STAR, [0, 1], "beta", [1.0])


AXIS_GRIDS = {
    "alpha": np.round(np.arange(0.0, 0.9 + 1e-9, 0.1), 10),
    "mu": np.round(np.arange(-1.0, 1.0 + 1e-9, 0.1), 10),
    "sigma": np.round(np.arange(0.5, 2.0 + 1e-9, 0.1), 10),
}
TRUTH = {"alpha": 0.5, "mu": 0.2, "sigma": 1.0}


@pytest.mark.parametrize("axis", sorted(AXIS_GRIDS))
def test_profile_maximum_near_truth(axis):
    hits = 0
    seeds = range(500, 505)
    for seed in seeds:
        y = simulate(THETA_STAR, 4000, seed).y
        rep = likelihood_profile(THETA_STAR, y, axis, AXIS_GRIDS[axis])
        assert np.all(np.isfinite(rep.normalized_log_lik))
        hits += abs(rep.argmax - TRUTH[axis]) <= 0.1 + 1e-9
    assert hits >= 0.8 * len(seeds)


def test_kl_gap_zero_at_truth():
    assert kl_gap_estimate(THETA_STAR, THETA_STAR, 200, reps=3, seed=1) == (0.0, 0.0)


def test_kl_gap_positive_example_and_reproducible():
    th = Theta(0.5, 0.2, 1.5)
    gap, se = kl_gap_estimate(THETA_STAR, th, 1000, reps=20, seed=5)
    assert gap > 3 * se
    assert kl_gap_estimate(THETA_STAR, th, 1000, reps=20, seed=5) == (gap, se)


def test_gn_trace_iid_constant():
    th_star = Theta(0.0, 0.2, 1.0)
    th = Theta(0.0, 0.0, 1.3)
    mean, se = gn_convergence_trace(th, th_star, 40, reps=200, seed=3, return_se=True)
    centre = mean.mean()
    assert np.all(np.abs(mean - centre) < 5 * se)


def test_gn_trace_flattens():
    th = Theta(0.6, 0.1, 1.2)
    mean, se = gn_convergence_trace(th, THETA_STAR, 80, reps=40, seed=9, return_se=True)
    diffs = np.abs(np.diff(mean))[30:]
    floor = 3 * (se[30:-1] + se[31:])
    assert np.all(diffs < floor)


def test_gn_trace_reproducible_and_validation():
    a = gn_convergence_trace(THETA_STAR, THETA_STAR, 20, reps=3, seed=1)
    b = gn_convergence_trace(THETA_STAR, THETA_STAR, 20, reps=3, seed=1)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (21,)
    with pytest.raises(ValueError):
        gn_convergence_trace(THETA_STAR, THETA_STAR, 5)
