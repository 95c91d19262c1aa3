"""Schedule policies, the measurement/depth laws, and the analytic risk curve."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from alphavqe.bayes import NormalBelief, variance_gain
from alphavqe.engine import SyntheticOracle, run_estimation
from alphavqe.schedules import (
    AlphaQPE,
    BetaQPE,
    RFPE,
    StatisticalSampling,
    alpha_max,
    analytic_risk_curve,
    depth_accounting,
    n_min,
    n_min_restarts,
    next_setting,
    predicted_iterations,
)


def test_theta_is_mu_minus_sigma_for_every_policy():
    belief = NormalBelief(0.7, 0.2)
    for policy in (AlphaQPE(0.5), RFPE(), BetaQPE(16.0), StatisticalSampling()):
        assert next_setting(policy, belief).theta == pytest.approx(0.5)


def test_alpha_qpe_repetition_counts():
    belief = NormalBelief(0.0, 0.01)
    assert next_setting(AlphaQPE(0.0), belief).m == pytest.approx(1.0)
    assert next_setting(AlphaQPE(0.5), belief).m == pytest.approx(10.0)
    assert next_setting(AlphaQPE(1.0), belief).m == pytest.approx(100.0)
    assert next_setting(AlphaQPE(1.0, scale=1.25), belief).m == pytest.approx(125.0)


def test_rfpe_and_beta_qpe_ceil_rule():
    belief = NormalBelief(0.0, 0.3)
    assert next_setting(RFPE(), belief).m == 5.0  # ceil(1.25 / 0.3)
    assert next_setting(BetaQPE(16.0), belief).m == 4.0  # ceil(1 / 0.3)
    assert next_setting(BetaQPE(2.0), belief).m == 2.0  # budget binds


def test_depth_cap_clamps_every_policy():
    belief = NormalBelief(0.0, 1e-3)
    for policy in (
        AlphaQPE(1.0, depth_cap=32.0),
        RFPE(depth_cap=32.0),
        BetaQPE(1e6, depth_cap=32.0),
    ):
        assert next_setting(policy, belief).m == 32.0


def test_statistical_sampling_never_repeats():
    for sigma in (1.0, 0.1, 1e-6):
        assert next_setting(StatisticalSampling(), NormalBelief(0.0, sigma)).m == 1.0


@pytest.mark.parametrize("alpha", [-0.1, 1.1])
def test_alpha_out_of_range_rejected(alpha):
    with pytest.raises(ValueError):
        AlphaQPE(alpha)


def test_predicted_iterations_spot_values():
    # direct substitution into the closed form at epsilon = 0.05
    assert predicted_iterations(0.05, 0.0) == pytest.approx(798.0, rel=1e-12)
    assert predicted_iterations(0.05, 0.5) == pytest.approx(76.0, rel=1e-12)
    assert predicted_iterations(0.05, 0.75) == pytest.approx(8.0 * (np.sqrt(20.0) - 1.0), rel=1e-12)
    assert predicted_iterations(0.05, 1.0) == pytest.approx(4.0 * np.log(20.0), rel=1e-12)


def test_predicted_iterations_continuous_at_alpha_one():
    eps = 0.03
    near = predicted_iterations(eps, 1.0 - 1e-9)
    assert near == pytest.approx(predicted_iterations(eps, 1.0), rel=1e-6)


def test_alpha_max_spots():
    assert alpha_max(0.01, 10.0) == pytest.approx(0.5)
    assert alpha_max(0.01, 100.0) == pytest.approx(1.0)
    assert alpha_max(0.01, 1e6) == 1.0  # saturates at 1
    assert alpha_max(0.1, 1.0) == 0.0


def test_n_min_spot_values():
    assert n_min(0.01, 10.0) == pytest.approx(396.0, abs=1e-9)
    # unconstrained regime: d_max >= 1/epsilon collapses to the alpha = 1 count
    assert n_min(0.01, 100.0) == pytest.approx(4.0 * np.log(100.0), abs=1e-9)
    assert n_min(0.01, 1e5) == pytest.approx(4.0 * np.log(100.0), abs=1e-9)


def test_n_min_restarts_spot_values():
    want = 2.0 * ((1.0 / 0.1) ** 2 - 1.0) + 4.0 * np.log(10.0)
    assert n_min_restarts(0.01, 10.0) == pytest.approx(want, abs=1e-9)
    assert n_min_restarts(0.01, 10.0) == pytest.approx(207.2103403719761, abs=1e-9)
    assert n_min_restarts(0.01, 100.0) == pytest.approx(4.0 * np.log(100.0), abs=1e-9)


def test_restarts_never_worse_and_equality_region():
    rng = np.random.default_rng(23)
    for _ in range(300):
        eps = rng.uniform(0.005, 0.5)
        d = rng.uniform(1.0, 2.0 / eps)
        lhs = n_min_restarts(eps, d)
        rhs = n_min(eps, d)
        assert lhs <= rhs * (1.0 + 1e-12)
        if d >= 1.0 / eps:
            assert lhs == pytest.approx(rhs, rel=1e-12)
        elif d > 1.0:
            assert lhs < rhs


def test_analytic_curve_alpha_zero_matches_inverse_sqrt_growth():
    # alpha = 0: 1/r^2 grows by 1/2 per measurement from the anchor
    k = np.arange(0, 101, dtype=float)
    r = analytic_risk_curve(k, 0.0, 1.0, 0.0)
    assert_allclose(1.0 / r**2, 1.0 + 0.5 * k, rtol=1e-12)


def test_analytic_curve_alpha_one_is_geometric():
    r10 = analytic_risk_curve(10.0, 10.0, 0.5, 1.0)
    r12 = analytic_risk_curve(12.0, 10.0, 0.5, 1.0)
    assert r10 == pytest.approx(0.5)
    assert r12 == pytest.approx(0.5 * (1.0 - variance_gain(1.0)), rel=1e-12)


def test_analytic_curve_rejects_bad_anchor():
    with pytest.raises(ValueError):
        analytic_risk_curve(5.0, 10.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        analytic_risk_curve(10.0, 5.0, 1.5, 0.5)


def test_analytic_curve_decreasing_in_alpha():
    # more coherence per measurement can only help at matched k
    k = 40.0
    values = [analytic_risk_curve(k, 0.0, 1.0, a) for a in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_depth_accounting_counts_raw_and_rounded():
    _, trace = run_estimation(
        SyntheticOracle(0.3),
        AlphaQPE(0.5),
        NormalBelief(0.0, 1.0),
        max_iterations=25,
        seed=3,
    )
    report = depth_accounting(trace, depth_of_u=7.0)
    assert report.n_measurements == 25
    ms = [row.m for row in trace.rows]
    assert report.max_m == pytest.approx(max(ms))
    assert report.max_depth == pytest.approx(max(ms) * 7.0)
    assert report.total_depth == pytest.approx(sum(ms) * 7.0)
    assert report.max_m_rounded == max(max(1, round(m)) for m in ms)
    assert report.total_depth_rounded == pytest.approx(
        sum(max(1, round(m)) for m in ms) * 7.0
    )


def test_depth_accounting_rejects_empty_trace():
    _, trace = run_estimation(
        SyntheticOracle(0.0),
        StatisticalSampling(),
        NormalBelief(0.0, 1.0),
        max_iterations=0,
        seed=0,
    )
    with pytest.raises(ValueError):
        depth_accounting(trace, depth_of_u=1.0)
