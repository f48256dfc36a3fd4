"""Closed-form engine for expected one-step capital increments and optimal
acceptance thresholds.

Everything here is a deterministic function of (mu, sigma, n, alpha). The
expected increment of a voter is available two ways: an exact binomial sum
over yes-vote counts, and its normal approximation. On top of those sit the
continuous estimate of the increment-maximizing threshold, its quantized
"ladder" representative, a brute-force discrete optimizer, and the
sensitivity of the optimal threshold to the environment. The Monte Carlo
counterpart of all of this lives in the simulate module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .core import Environment, VotingRule

__all__ = [
    "EXACT_SUM",
    "NORMAL_APPROX",
    "MONTE_CARLO",
    "DEGENERATE_RHO",
    "IncrementResult",
    "ApproxTerms",
    "ThresholdEstimate",
    "expected_increment_exact",
    "expected_increment_approx",
    "approx_terms",
    "approx_validity",
    "acceptance_probability",
    "neutral_mean_increment",
    "rescaled_curve_value",
    "optimal_threshold_estimate",
    "optimal_threshold_ladder",
    "optimal_threshold_bruteforce",
    "max_expected_increment",
    "threshold_sensitivity",
    "foc_residual",
]

EXACT_SUM = "exact_sum"
NORMAL_APPROX = "normal_approx"
MONTE_CARLO = "monte_carlo"

VALIDITY_STRONG = "strong"
VALIDITY_ACCEPTABLE = "acceptable"
VALIDITY_WEAK = "weak"

#: Beyond this |rho| the vote outcome is deterministic to double precision
#: and f/q style terms are numerical noise, so the engine short-circuits to
#: the limit value (mu when everything passes, 0 when nothing does).
DEGENERATE_RHO = 8.0

_MAX_EXACT_N = 10**6
_MAX_BRUTEFORCE_N = 10**4


@dataclass(frozen=True)
class IncrementResult:
    """Expected one-step capital increment of a voter, with its provenance.

    std_error is present exactly when the value is a Monte Carlo estimate.
    """

    value: float
    method: str
    std_error: Optional[float] = None

    def __post_init__(self):
        if self.method not in (EXACT_SUM, NORMAL_APPROX, MONTE_CARLO):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.std_error is not None) != (self.method == MONTE_CARLO):
            raise ValueError("std_error must be present iff method is monte_carlo")
        if self.std_error is not None and not self.std_error >= 0.0:
            raise ValueError(f"std_error must be >= 0, got {self.std_error}")


@dataclass(frozen=True)
class ApproxTerms:
    """Intermediate terms of the normal approximation.

    tau: distance, in vote-count standard deviations, from the acceptance
    cutoff to the mean yes count. nu: capital-units scale sigma*f/sqrt(qpn).
    """

    tau: float
    nu: float


@dataclass(frozen=True)
class ThresholdEstimate:
    """Three views of the optimal acceptance threshold at one (rho, n).

    alpha_hat is the continuous estimate, alpha_ladder its equivalence-class
    mean (the implementable rule), alpha_bruteforce the argmax over the n+2
    essentially different thresholds {-1/n, 0, 1/n, ..., 1}. The optimal
    class is the half-interval [alpha_ladder - 1/(2n), alpha_ladder + 1/(2n)).
    """

    alpha_hat: float
    alpha_ladder: float
    alpha_bruteforce: float
    class_halfwidth: float


def _degenerate_limit(env: Environment, min_yes: int, n: int) -> float:
    """Expected increment when the vote is deterministic: in a one-sided
    environment every voter says yes (rho > 0) or no (rho < 0)."""
    if env.rho > 0.0:
        return env.mu if min_yes <= n else 0.0
    return env.mu if min_yes == 0 else 0.0


def _increment_exact_value(env: Environment, n: int, min_yes: int) -> float:
    """Exact expected increment as a function of the acceptance cutoff.

    value = sigma * sum_{x=min_yes}^{n} (rho + (f/q) * (x/(p n) - 1)) * b(x|n)

    where b(x|n) is the Binomial(n, p) pmf of the yes count. Terms are built
    in log-space and combined with compensated summation so n up to 1e6 and
    extreme p stay accurate.
    """
    if n > _MAX_EXACT_N:
        raise ValueError(f"n={n} exceeds the supported maximum {_MAX_EXACT_N}")
    if min_yes >= n + 1:
        return 0.0
    rho = env.rho
    if abs(rho) > DEGENERATE_RHO:
        return _degenerate_limit(env, min_yes, n)
    mom = env.moments()
    xs = np.arange(min_yes, n + 1, dtype=np.float64)
    pmf = np.exp(core.binomial_log_pmf(xs, n, mom.p))
    coef = rho + (mom.f / mom.q) * (xs / (mom.p * n) - 1.0)
    return math.fsum((env.sigma * coef * pmf).tolist())


def expected_increment_exact(env: Environment, rule: VotingRule) -> IncrementResult:
    """Exact expected one-step capital increment of a voter.

    Empty acceptance range (alpha = 1) gives exactly 0; |rho| beyond
    DEGENERATE_RHO short-circuits to the deterministic-vote limit.
    """
    value = _increment_exact_value(env, rule.n, core.min_yes_votes(rule))
    return IncrementResult(value=value, method=EXACT_SUM)


def approx_terms(env: Environment, rule: VotingRule) -> ApproxTerms:
    """tau and nu of the normal approximation for the given environment and rule."""
    mom = env.moments()
    n = rule.n
    cutoff = core.min_yes_votes(rule) - 1  # floor(alpha * n)
    scale = math.sqrt(mom.q * mom.p * n)
    tau = (mom.p * n - cutoff - 0.5) / scale
    nu = env.sigma * mom.f / scale
    return ApproxTerms(tau=tau, nu=nu)


def expected_increment_approx(env: Environment, rule: VotingRule) -> IncrementResult:
    """Normal-approximation expected increment: mu*Phi(tau) + nu*phi(tau).

    Same degenerate short-circuit as the exact sum. Consult approx_validity
    for whether the approximation is trustworthy at these parameters.
    """
    if abs(env.rho) > DEGENERATE_RHO:
        value = _degenerate_limit(env, core.min_yes_votes(rule), rule.n)
        return IncrementResult(value=value, method=NORMAL_APPROX)
    t = approx_terms(env, rule)
    value = env.mu * float(core.std_normal_cdf(t.tau)) + t.nu * float(core.std_normal_pdf(t.tau))
    return IncrementResult(value=value, method=NORMAL_APPROX)


def approx_validity(env: Environment, rule: VotingRule) -> str:
    """Accuracy tier of the normal approximation: strong, acceptable or weak.

    strong needs qpn >= 9 with p in (0.1, 0.9); acceptable needs qpn > 5 in
    that central band, or qpn > 25 when p is extreme; anything else is weak.
    """
    if abs(env.rho) > DEGENERATE_RHO:
        return VALIDITY_WEAK
    mom = env.moments()
    qpn = mom.q * mom.p * rule.n
    central = 0.1 < mom.p < 0.9
    if central and qpn >= 9.0:
        return VALIDITY_STRONG
    if (central and qpn > 5.0) or qpn > 25.0:
        return VALIDITY_ACCEPTABLE
    return VALIDITY_WEAK


def acceptance_probability(env: Environment, rule: VotingRule) -> float:
    """P[proposal passes] = sum of the Binomial(n, p) pmf over passing yes counts."""
    n = rule.n
    m = core.min_yes_votes(rule)
    if m == 0:
        return 1.0
    if m >= n + 1:
        return 0.0
    rho = env.rho
    if rho > DEGENERATE_RHO:
        return 1.0
    if rho < -DEGENERATE_RHO:
        return 0.0
    mom = env.moments()
    xs = np.arange(m, n + 1, dtype=np.float64)
    return min(1.0, math.fsum(np.exp(core.binomial_log_pmf(xs, n, mom.p)).tolist()))


def neutral_mean_increment(sigma: float, n: int) -> float:
    """Expected increment sigma/(pi*sqrt(n)) for a neutral environment,
    simple majority and an odd number of voters."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be a positive odd integer, got {n}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return sigma / (math.pi * math.sqrt(n))


def rescaled_curve_value(base_n: int, target_n: int, rho: float, sigma: float, alpha: float) -> float:
    """Predict the increment curve at target_n from the curve at base_n.

    Uses the square-root rescaling sqrt(base/target) * curve_base(rho *
    sqrt(target/base)): growing the society k^2-fold shrinks the curve
    k-fold along both axes. Accurate for societies larger than ~20 voters.
    """
    k = math.sqrt(target_n / base_n)
    env = Environment(mu=rho * k * sigma, sigma=sigma)
    return expected_increment_exact(env, VotingRule(n=base_n, alpha=alpha)).value / k


def optimal_threshold_estimate(rho: float) -> float:
    """Continuous estimate of the increment-maximizing acceptance threshold.

    alpha_hat = Phi(rho) * (1 - rho * Phi(-rho) / phi(rho)); a function of
    rho alone, independent of the number of voters, strictly decreasing.
    """
    mom = Environment.from_rho(rho).moments()
    return mom.p * (1.0 - rho * mom.q / mom.f)


def optimal_threshold_ladder(rho: float, n: int) -> float:
    """Mean of the equivalence class containing the estimated optimal
    threshold: (floor(alpha_hat * n) + 0.5) / n, a step function of rho."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (math.floor(optimal_threshold_estimate(rho) * n) + 0.5) / n


def _argmax_threshold(env: Environment, n: int) -> tuple[int, float]:
    """Scan all n+2 acceptance cutoffs; return (best min_yes, best value).

    Ties go to the smaller cutoff, i.e. the smaller threshold.
    """
    best_m, best_v = 0, -math.inf
    for m in range(0, n + 2):
        v = _increment_exact_value(env, n, m)
        if v > best_v:
            best_m, best_v = m, v
    return best_m, best_v


def optimal_threshold_bruteforce(env: Environment, n: int) -> ThresholdEstimate:
    """Exhaustive optimum over the n+2 essentially different thresholds
    {-1/n, 0, 1/n, ..., 1}, evaluated with the exact sum, alongside the
    continuous estimate and its ladder value."""
    if n > _MAX_BRUTEFORCE_N:
        raise ValueError(f"n={n} exceeds the brute-force maximum {_MAX_BRUTEFORCE_N}")
    best_m, _ = _argmax_threshold(env, n)
    rho = env.rho
    a_hat = optimal_threshold_estimate(rho)
    return ThresholdEstimate(
        alpha_hat=a_hat,
        alpha_ladder=optimal_threshold_ladder(rho, n),
        alpha_bruteforce=(best_m - 1) / n,
        class_halfwidth=0.5 / n,
    )


def max_expected_increment(env: Environment, n: int) -> float:
    """Expected increment under the optimal threshold: mu*Phi(mu/nu) + nu*phi(mu/nu)
    with nu = sigma*f/sqrt(qpn). Positive for every environment, though it
    underflows to 0 in doubles once losses are overwhelming (rho << -3)."""
    mom = env.moments()
    nu = env.sigma * mom.f / math.sqrt(mom.q * mom.p * n)
    t = env.mu / nu
    return env.mu * float(core.std_normal_cdf(t)) + nu * float(core.std_normal_pdf(t))


def threshold_sensitivity(rho: float) -> float:
    """Derivative of the optimal-threshold estimate with respect to rho:
    ((f + p*rho) * (f - q*rho) - q*p) / f. Even in rho and everywhere negative;
    at rho = 0 it equals (sqrt(2/pi) - sqrt(pi/2)) / 2."""
    mom = Environment.from_rho(rho).moments()
    return ((mom.f + mom.p * rho) * (mom.f - mom.q * rho) - mom.q * mom.p) / mom.f


def foc_residual(alpha: float, rho: float) -> float:
    """Stationarity residual rho + (alpha - p) * f / (q p) of the smoothed
    increment in alpha; identically zero at alpha = optimal_threshold_estimate(rho)."""
    mom = Environment.from_rho(rho).moments()
    return rho + (alpha - mom.p) * mom.f / (mom.q * mom.p)
