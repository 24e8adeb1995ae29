"""Alternating-optimizer tests: initialization, monotonicity, QoS, bounds."""

import dataclasses

import numpy as np
import pytest

from rmsbeam.ao import (
    AO_CONVERGED,
    AoConfig,
    coarse_rate_upper_bound,
    initialize,
    lifted_objective,
    optimize,
)
from rmsbeam.experiments import ScenarioConfig, scenario_channels
from rmsbeam.linkmath import LinkBudget, all_sinrs, effective_gains, sum_rate
from rmsbeam.solver import extract_rank_one

from conftest import make_channels


def small_config(**overrides):
    base = dict(max_outer_iterations=30)
    base.update(overrides)
    return AoConfig(**base)


def test_initialize_cophases_strongest_user():
    channels = make_channels(0)
    budget = ScenarioConfig().budget()
    expansion = initialize(channels, budget)
    strengths = [np.sum(np.abs(ch.coefficients)) for ch in channels]
    best = int(np.argmax(strengths))
    f = extract_rank_one(expansion.f_matrix)
    achieved = abs(np.vdot(channels[best].coefficients, f.values))
    assert achieved == pytest.approx(strengths[best], rel=1e-9)
    np.testing.assert_allclose(np.abs(f.values), 1.0, atol=1e-9)
    np.testing.assert_allclose(
        expansion.powers.powers, budget.total_power / len(channels), rtol=1e-12
    )


def test_initialize_deterministic():
    channels = make_channels(3)
    budget = ScenarioConfig().budget()
    a = initialize(channels, budget)
    b = initialize(channels, budget)
    assert (a.f_matrix.matrix == b.f_matrix.matrix).all()
    assert (a.powers.powers == b.powers.powers).all()


def test_single_user_reaches_cophasing_rate():
    budget = ScenarioConfig().budget()
    for seed in range(5):
        channels = make_channels(seed, k_users=1, m_side=3)
        result = optimize(channels, budget, small_config())
        rate = result.trace.iterations[-1].sum_rate
        h = channels[0].coefficients
        oracle = np.log2(1.0 + budget.total_power * np.sum(np.abs(h)) ** 2 / budget.noise_power)
        assert rate == pytest.approx(oracle, rel=0.02)
        assert result.powers.powers[0] == pytest.approx(budget.total_power, rel=1e-4)


def test_surrogate_monotone_and_converged():
    budget = ScenarioConfig().budget()
    for seed in range(5):
        channels = make_channels(seed)
        result = optimize(channels, budget, small_config())
        assert result.status == AO_CONVERGED
        assert result.trace.monotone(tol=1e-8)
        # iterate-to-iterate continuity of the recorded surrogate at fixed penalty
        its = result.trace.iterations
        for prev, cur in zip(its, its[1:]):
            if prev.penalty == cur.penalty:
                assert cur.surrogate_before == pytest.approx(prev.surrogate_after, rel=1e-12)


def test_surrogate_below_coarse_upper_bound():
    budget = ScenarioConfig().budget()
    for seed in range(5):
        channels = make_channels(seed)
        result = optimize(channels, budget, small_config())
        bound = coarse_rate_upper_bound(channels, budget)
        assert all(it.surrogate_after <= bound + 1e-9 for it in result.trace.iterations)


def test_final_point_feasible():
    budget = ScenarioConfig().budget()
    channels = make_channels(1)
    result = optimize(channels, budget, small_config())
    assert np.abs(result.beam.values).max() <= 1.0 + 1e-9
    assert result.powers.powers.sum() <= budget.total_power * (1 + 1e-9)
    assert (result.powers.powers > 0).all()


def test_qos_constrained_run_meets_threshold():
    config = ScenarioConfig(gamma_th_db=-10.0, k_users=3)
    budget = config.budget()
    assert budget.sinr_threshold == pytest.approx(0.1)
    channels = scenario_channels(config, 7)
    result = optimize(channels, budget, small_config())
    assert result.status == AO_CONVERGED
    gains = effective_gains(channels, result.beam)
    sinrs = all_sinrs(gains, result.powers, budget)
    assert (sinrs >= budget.sinr_threshold * (1 - 1e-6)).all()
    # QoS genuinely binds: every user keeps a nontrivial power share
    assert result.powers.powers.min() / result.powers.powers.sum() > 0.01


def test_infeasible_threshold_reported():
    # K=2 sharing one beam caps the max-min SINR at 1/(K-1) = 1 (0 dB)
    config = ScenarioConfig(k_users=2, gamma_th_db=6.0)
    channels = scenario_channels(config, 0)
    result = optimize(channels, config.budget(), small_config())
    assert result.status == "infeasible"
    assert result.beam is None


def test_frozen_power_mode_keeps_equal_split():
    budget = ScenarioConfig().budget()
    channels = make_channels(2)
    config = dataclasses.replace(small_config(), optimize_power=False)
    result = optimize(channels, budget, config)
    np.testing.assert_allclose(
        result.powers.powers, budget.total_power / len(channels), rtol=1e-12
    )
    assert result.trace.monotone(tol=1e-8)


def test_lifted_objective_matches_true_rate_at_rank_one():
    budget = ScenarioConfig().budget()
    channels = make_channels(4)
    result = optimize(channels, budget, small_config())
    f_mat = np.outer(result.beam.values, result.beam.values.conj())
    lifted = lifted_objective(f_mat, result.powers, channels, budget, penalty=0.0)
    true = sum_rate(channels, result.beam, result.powers, budget)
    assert lifted == pytest.approx(true, rel=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        AoConfig(convergence_threshold=0.0)
    with pytest.raises(ValueError):
        AoConfig(max_outer_iterations=0)
