"""Seeded Monte Carlo dynamics: proposals, egoist votes, alpha-majority rule,
capital trajectories.

Each voter supports exactly the proposals that strictly increase its own
capital; a proposal passes when the yes count reaches min_yes_votes. The
simulator is the independent oracle for every closed form in the analytic
module, so it shares nothing with it beyond the acceptance rule.

Reproducibility: trial t draws from a counter-based Philox stream keyed by
(seed, t); within a trial, draws are consumed in (step, agent) order. Results
are therefore identical for any worker count, and trials may run concurrently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import core
from .analytic import MONTE_CARLO, IncrementResult
from .core import Environment, VotingRule

__all__ = [
    "SimulationConfig",
    "Proposal",
    "SocietyState",
    "SimulationSummary",
    "generate_proposal",
    "tally_votes",
    "apply_step",
    "run_simulation",
    "estimate_increment_curve",
]

# Cap on doubles generated per chunk (~16 MB); chunking does not change the
# draw sequence, it only bounds memory.
_CHUNK_VALUES = 1 << 21


@dataclass(frozen=True)
class SimulationConfig:
    """One simulation request: environment, rule, budget and seeding.

    Capital starts at initial_capital; an agent whose final capital is
    strictly below ruin_level counts as ruined. Both default to 0 and only
    feed the descriptive summary statistics.
    """

    env: Environment
    rule: VotingRule
    steps: int
    trials: int
    seed: int
    initial_capital: float = 0.0
    ruin_level: float = 0.0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Proposal:
    """A vector of proposed capital increments, one per agent."""

    increments: np.ndarray


@dataclass(frozen=True)
class SocietyState:
    """Current capitals plus the number of proposals processed so far."""

    capitals: np.ndarray
    step_index: int = 0


@dataclass(frozen=True)
class SimulationSummary:
    """Aggregate outcome of a run.

    mean_step_increment is the grand mean over agents, steps and trials of
    the realized per-step increment (0 when a proposal is rejected); its
    std_error comes from the between-trial variance (0 for a single trial).
    Ruin counts and the Gini coefficient are descriptive only.
    """

    mean_step_increment: float
    std_error: float
    acceptance_rate: float
    mean_final_capital: float
    ruined_count_mean: float
    gini_final: Optional[float] = None


def generate_proposal(env: Environment, n: int, rng: np.random.Generator) -> Proposal:
    """Draw one proposal: n independent N(mu, sigma) increments."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Proposal(increments=rng.normal(env.mu, env.sigma, size=n))


def tally_votes(proposal: Proposal) -> int:
    """Count the yes votes: strictly positive increments. Zero is a no."""
    return int(np.count_nonzero(proposal.increments > 0.0))


def apply_step(state: SocietyState, proposal: Proposal, rule: VotingRule) -> tuple[SocietyState, bool]:
    """Put one proposal to the vote and advance the society one step.

    Returns the next state and whether the proposal was accepted; capitals
    change only on acceptance.
    """
    if len(proposal.increments) != rule.n or len(state.capitals) != rule.n:
        raise ValueError(
            f"dimension mismatch: rule.n={rule.n}, proposal has {len(proposal.increments)}, "
            f"state has {len(state.capitals)}"
        )
    accepted = tally_votes(proposal) >= core.min_yes_votes(rule)
    capitals = state.capitals + proposal.increments if accepted else state.capitals.copy()
    return SocietyState(capitals=capitals, step_index=state.step_index + 1), accepted


def _gini(values: np.ndarray) -> float:
    """Gini coefficient on values shifted to be nonnegative; 0 when the total
    is 0 (all equal, or everything cancelled)."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x[0] < 0.0:
        x = x - x[0]
    total = x.sum()
    if total <= 0.0:
        return 0.0
    n = x.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return max(0.0, float(2.0 * (ranks * x).sum() / (n * total) - (n + 1.0) / n))


def _run_trial(cfg: SimulationConfig, child_seed: np.random.SeedSequence):
    """Simulate one trial; returns (mean increment, accepted count,
    mean final capital, ruined count, gini)."""
    n = cfg.rule.n
    m = core.min_yes_votes(cfg.rule)
    rng = np.random.Generator(np.random.Philox(child_seed))
    rows_per_chunk = max(1, _CHUNK_VALUES // n)

    accepted_total = 0.0
    accepted_count = 0
    per_agent = np.zeros(n, dtype=np.float64)
    remaining = cfg.steps
    while remaining > 0:
        rows = min(rows_per_chunk, remaining)
        inc = rng.normal(cfg.env.mu, cfg.env.sigma, size=(rows, n))
        passed = (inc > 0.0).sum(axis=1) >= m
        sel = inc[passed]
        accepted_total += sel.sum()
        per_agent += sel.sum(axis=0)
        accepted_count += int(passed.sum())
        remaining -= rows

    finals = cfg.initial_capital + per_agent
    return (
        accepted_total / (cfg.steps * n),
        accepted_count,
        float(finals.mean()),
        int((finals < cfg.ruin_level).sum()),
        _gini(finals),
    )


def run_simulation(config: SimulationConfig, workers: int = 1) -> SimulationSummary:
    """Run trials x steps proposals and aggregate.

    Trials execute concurrently when workers > 1; each owns its RNG stream
    and results are reduced in trial order, so the summary is identical for
    any worker count.
    """
    children = np.random.SeedSequence(config.seed).spawn(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            per_trial = list(ex.map(lambda c: _run_trial(config, c), children))
    else:
        per_trial = [_run_trial(config, c) for c in children]

    means = np.array([t[0] for t in per_trial])
    accepted = sum(t[1] for t in per_trial)
    t = config.trials
    std_error = float(means.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0
    return SimulationSummary(
        mean_step_increment=float(means.mean()),
        std_error=std_error,
        acceptance_rate=accepted / (t * config.steps),
        mean_final_capital=float(np.mean([x[2] for x in per_trial])),
        ruined_count_mean=float(np.mean([x[3] for x in per_trial])),
        gini_final=float(np.mean([x[4] for x in per_trial])),
    )


def estimate_increment_curve(
    env_grid: Sequence[Environment],
    rule: VotingRule,
    total_proposals: int,
    seed: int,
    trials: int = 100,
    workers: int = 1,
) -> list[tuple[float, IncrementResult]]:
    """Monte Carlo estimate of the expected increment at each grid environment.

    Each point reuses run_simulation with steps * trials ~= total_proposals
    (floor division) and its own substream derived from seed, so repeated
    calls with one seed reproduce the whole sequence exactly.
    """
    if len(env_grid) == 0:
        raise ValueError("env_grid must be nonempty")
    if total_proposals < 1:
        raise ValueError("total_proposals must be >= 1")
    trials = max(1, min(trials, total_proposals))
    steps = max(1, total_proposals // trials)
    point_seeds = np.random.SeedSequence(seed).generate_state(len(env_grid), dtype=np.uint64)
    out = []
    for env, s in zip(env_grid, point_seeds):
        cfg = SimulationConfig(env=env, rule=rule, steps=steps, trials=trials, seed=int(s))
        summary = run_simulation(cfg, workers=workers)
        result = IncrementResult(
            value=summary.mean_step_increment, method=MONTE_CARLO, std_error=summary.std_error
        )
        out.append((env.rho, result))
    return out
