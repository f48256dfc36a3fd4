"""Monte Carlo dynamics: determinism, bookkeeping, and agreement with the
closed forms."""

import math

import numpy as np
import pytest

from vise.analytic import (
    MONTE_CARLO,
    acceptance_probability,
    expected_increment_exact,
    neutral_mean_increment,
)
from vise.core import Environment, VotingRule
from vise.simulate import (
    Proposal,
    SimulationConfig,
    SocietyState,
    apply_step,
    estimate_increment_curve,
    generate_proposal,
    run_simulation,
    tally_votes,
)
from vise.simulate import _gini


def make_rng(seed=42):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


class TestGenerateProposal:
    def test_sample_moments(self):
        env = Environment(mu=3.0, sigma=10.0)
        rng = make_rng()
        draws = np.concatenate([generate_proposal(env, 1000, rng).increments for _ in range(1000)])
        assert draws.mean() == pytest.approx(3.0, abs=0.03 * 3)
        assert draws.std(ddof=1) == pytest.approx(10.0, abs=0.03)

    def test_deterministic_given_stream(self):
        env = Environment(mu=-1.0, sigma=2.0)
        a = generate_proposal(env, 50, make_rng(7)).increments
        b = generate_proposal(env, 50, make_rng(7)).increments
        assert np.array_equal(a, b)


class TestTallyVotes:
    def test_all_gain(self):
        assert tally_votes(Proposal(np.ones(9))) == 9

    def test_all_lose(self):
        assert tally_votes(Proposal(-np.ones(9))) == 0

    def test_zero_increment_is_a_no(self):
        assert tally_votes(Proposal(np.array([-2.0, 0.0, 3.0]))) == 1


class TestApplyStep:
    def test_majority_passes(self):
        state = SocietyState(capitals=np.zeros(3))
        nxt, accepted = apply_step(state, Proposal(np.array([1.0, 1.0, -1.0])), VotingRule(3, 0.5))
        assert accepted  # 2 yes >= floor(1.5) + 1 = 2
        assert np.array_equal(nxt.capitals, [1.0, 1.0, -1.0])
        assert nxt.step_index == 1

    def test_minority_rejected(self):
        state = SocietyState(capitals=np.array([5.0, 5.0, 5.0]))
        nxt, accepted = apply_step(state, Proposal(np.array([9.0, -1.0, -1.0])), VotingRule(3, 0.5))
        assert not accepted
        assert np.array_equal(nxt.capitals, state.capitals)

    def test_even_split_rejected_for_even_n(self):
        # strict threshold: 10 of 20 is not a majority, 11 are needed
        inc = np.array([1.0] * 10 + [-1.0] * 10)
        state = SocietyState(capitals=np.zeros(20))
        _, accepted = apply_step(state, Proposal(inc), VotingRule(20, 0.5))
        assert not accepted
        _, accepted = apply_step(state, Proposal(np.where(np.arange(20) < 11, 1.0, -1.0)),
                                 VotingRule(20, 0.5))
        assert accepted

    def test_conservation_on_rejection(self):
        state = SocietyState(capitals=np.array([0.1, 0.2, 0.3]))
        before = state.capitals.copy()
        nxt, accepted = apply_step(state, Proposal(np.array([-1.0, -2.0, 0.5])), VotingRule(3, 0.5))
        assert not accepted
        assert np.array_equal(nxt.capitals, before)
        assert np.array_equal(state.capitals, before)

    def test_dimension_mismatch(self):
        state = SocietyState(capitals=np.zeros(3))
        with pytest.raises(ValueError):
            apply_step(state, Proposal(np.zeros(4)), VotingRule(3, 0.5))


class TestRunSimulation:
    def test_reject_all(self):
        cfg = SimulationConfig(
            env=Environment(mu=5.0, sigma=1.0), rule=VotingRule(21, 1.0),
            steps=200, trials=5, seed=3,
        )
        summary = run_simulation(cfg)
        assert summary.mean_step_increment == 0.0
        assert summary.std_error == 0.0
        assert summary.acceptance_rate == 0.0
        assert summary.mean_final_capital == 0.0

    def test_accept_all(self):
        env = Environment(mu=-2.0, sigma=4.0)
        cfg = SimulationConfig(env=env, rule=VotingRule(7, -1 / 7), steps=2000, trials=20, seed=11)
        summary = run_simulation(cfg)
        assert summary.acceptance_rate == 1.0
        assert abs(summary.mean_step_increment - env.mu) <= 3 * summary.std_error

    def test_accounting_identity(self):
        # replay the exact same Philox stream two ways: stepwise through
        # apply_step, and through the vectorized trial used by run_simulation
        env = Environment(mu=-1.0, sigma=3.0)
        rule = VotingRule(5, 0.5)
        steps, seed = 300, 99
        cfg = SimulationConfig(env=env, rule=rule, steps=steps, trials=1, seed=seed)
        summary = run_simulation(cfg)

        child = np.random.SeedSequence(seed).spawn(1)[0]
        rng = np.random.Generator(np.random.Philox(child))
        inc = rng.normal(env.mu, env.sigma, size=(steps, rule.n))

        state = SocietyState(capitals=np.zeros(rule.n))
        accepted_flags = []
        for row in inc:
            state, accepted = apply_step(state, Proposal(row), rule)
            accepted_flags.append(accepted)
        accepted_flags = np.array(accepted_flags)

        # step API and vectorized path agree on every decision and on the books
        assert state.step_index == steps
        matrix_final = inc[accepted_flags].sum(axis=0)
        assert summary.mean_final_capital == matrix_final.mean()
        assert np.allclose(state.capitals, matrix_final, rtol=0, atol=1e-9)
        assert summary.acceptance_rate == accepted_flags.mean()
        assert summary.mean_step_increment == inc[accepted_flags].sum() / (steps * rule.n)

    def test_initial_capital_and_ruin(self):
        env = Environment(mu=5.0, sigma=1.0)
        cfg = SimulationConfig(env=env, rule=VotingRule(3, 1.0), steps=10, trials=2, seed=0,
                               initial_capital=7.0, ruin_level=8.0)
        summary = run_simulation(cfg)
        assert summary.mean_final_capital == 7.0
        assert summary.ruined_count_mean == 3.0  # 7 < 8: everyone below the line
        assert summary.gini_final == 0.0

    def test_same_seed_same_summary(self):
        cfg = SimulationConfig(
            env=Environment(mu=-5.0, sigma=10.0), rule=VotingRule(21, 0.5),
            steps=500, trials=8, seed=12345,
        )
        assert run_simulation(cfg) == run_simulation(cfg)

    def test_worker_count_does_not_change_results(self):
        cfg = SimulationConfig(
            env=Environment(mu=-5.0, sigma=10.0), rule=VotingRule(21, 0.5),
            steps=400, trials=12, seed=2718,
        )
        one = run_simulation(cfg, workers=1)
        assert one == run_simulation(cfg, workers=3)
        assert one == run_simulation(cfg, workers=8)

    def test_matches_exact_sum(self):
        env = Environment(mu=-5.0, sigma=10.0)
        rule = VotingRule(21, 0.5)
        cfg = SimulationConfig(env=env, rule=rule, steps=4000, trials=50, seed=31415)
        summary = run_simulation(cfg, workers=2)
        exact = expected_increment_exact(env, rule).value
        assert abs(summary.mean_step_increment - exact) <= 4 * summary.std_error
        p_acc = acceptance_probability(env, rule)
        se = math.sqrt(p_acc * (1 - p_acc) / (cfg.steps * cfg.trials))
        assert abs(summary.acceptance_rate - p_acc) <= 4 * se

    def test_chunking_invariant(self, monkeypatch):
        # shrinking the chunk size must not change anything
        import vise.simulate as sim

        cfg = SimulationConfig(
            env=Environment(mu=0.0, sigma=1.0), rule=VotingRule(11, 0.5),
            steps=333, trials=3, seed=8,
        )
        full = run_simulation(cfg)
        monkeypatch.setattr(sim, "_CHUNK_VALUES", 64)
        chunked = run_simulation(cfg)
        assert full.acceptance_rate == chunked.acceptance_rate
        assert full.mean_step_increment == pytest.approx(chunked.mean_step_increment, rel=1e-12)
        assert full.mean_final_capital == pytest.approx(chunked.mean_final_capital, rel=1e-12)

    def test_config_validation(self):
        env = Environment(mu=0.0, sigma=1.0)
        with pytest.raises(ValueError):
            SimulationConfig(env=env, rule=VotingRule(3, 0.5), steps=0, trials=1, seed=0)
        with pytest.raises(ValueError):
            SimulationConfig(env=env, rule=VotingRule(3, 0.5), steps=1, trials=0, seed=0)


class TestEstimateIncrementCurve:
    def test_neutral_point_matches_law(self):
        envs = [Environment(mu=0.0, sigma=1.0)]
        curve = estimate_increment_curve(envs, VotingRule(21, 0.5), 200_000, seed=5, workers=2)
        (rho, res), = curve
        assert rho == 0.0
        assert res.method == MONTE_CARLO
        assert abs(res.value - neutral_mean_increment(1.0, 21)) <= 4 * res.std_error

    def test_reject_all_exact_zero(self):
        curve = estimate_increment_curve([Environment(mu=1.0, sigma=1.0)], VotingRule(5, 1.0), 1000, seed=5)
        (_, res), = curve
        assert res.value == 0.0
        assert res.std_error == 0.0

    def test_same_seed_identical(self):
        envs = [Environment.from_rho(r, 2.0) for r in (-0.5, 0.0, 0.5)]
        a = estimate_increment_curve(envs, VotingRule(9, 0.5), 5000, seed=77)
        b = estimate_increment_curve(envs, VotingRule(9, 0.5), 5000, seed=77)
        assert a == b

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            estimate_increment_curve([], VotingRule(9, 0.5), 1000, seed=1)


class TestGini:
    def test_equal_is_zero(self):
        assert _gini(np.full(10, 3.7)) == 0.0

    def test_classic_two_point(self):
        assert _gini(np.array([0.0, 1.0])) == pytest.approx(0.5)

    def test_shift_to_nonnegative(self):
        assert _gini(np.array([-1.0, 1.0])) == pytest.approx(0.5)

    def test_all_zero(self):
        assert _gini(np.zeros(5)) == 0.0
