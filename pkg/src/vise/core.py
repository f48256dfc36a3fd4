"""Scalar probability primitives and domain types for alpha-majority voting.

Both the closed-form engine and the Monte Carlo simulator import the
environment moments and the acceptance rule from here, so the two sides can
never disagree on what "accepted" means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DegenerateEnvironmentError",
    "Environment",
    "EnvironmentMoments",
    "VotingRule",
    "std_normal_pdf",
    "std_normal_cdf",
    "binomial_log_pmf",
    "binomial_pmf",
    "min_yes_votes",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class DegenerateEnvironmentError(ValueError):
    """The environment is so one-sided that p, q or f vanishes in doubles.

    Callers should treat the outcome as deterministic: every proposal passes
    (expected increment mu) when p -> 1, none do (increment 0) when p -> 0.
    The ``accept_all`` attribute tells the two regimes apart.
    """

    def __init__(self, rho: float):
        self.rho = rho
        self.accept_all = rho > 0
        limit = "all proposals accepted, value mu" if self.accept_all else "all proposals rejected, value 0"
        super().__init__(f"rho={rho!r} leaves no probability mass on one side; treat as: {limit}")


def std_normal_pdf(x):
    """Standard normal density, elementwise on scalars or arrays."""
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def std_normal_cdf(x):
    """Standard normal distribution function Phi, elementwise.

    Backed by scipy's ndtr (erfc based), absolute error well below 1e-10.
    """
    return special.ndtr(x)


def binomial_log_pmf(x, n: int, p: float):
    """log P[Bin(n, p) = x] for 0 < p < 1, elementwise in x.

    Log-space keeps n up to 1e6 free of overflow; callers handle p in {0, 1}.
    """
    xs = np.asarray(x, dtype=np.float64)
    return (
        special.gammaln(n + 1.0)
        - special.gammaln(xs + 1.0)
        - special.gammaln(n - xs + 1.0)
        + xs * math.log(p)
        + (n - xs) * math.log1p(-p)
    )


def binomial_pmf(x, n: int, p: float):
    """P[Bin(n, p) = x]; domain error outside 0 <= x <= n, 0 <= p <= 1."""
    xs = np.asarray(x)
    if np.any(xs < 0) or np.any(xs > n):
        raise ValueError(f"x must lie in [0, {n}]")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        out = np.where(xs == 0, 1.0, 0.0)
    elif p == 1.0:
        out = np.where(xs == n, 1.0, 0.0)
    else:
        out = np.exp(binomial_log_pmf(xs, n, p))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnvironmentMoments:
    """One-sided moments of a proposal increment: p = P[gain], q = P[loss],
    f = standard normal density at rho (density of a zero increment, times sigma)."""

    p: float
    q: float
    f: float


@dataclass(frozen=True)
class Environment:
    """Proposal-generating distribution N(mu, sigma), sigma > 0."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")

    @classmethod
    def from_rho(cls, rho: float, sigma: float = 1.0) -> "Environment":
        return cls(mu=rho * sigma, sigma=sigma)

    @property
    def rho(self) -> float:
        """Normalized mean mu/sigma (inverse coefficient of variation)."""
        return self.mu / self.sigma

    def moments(self) -> EnvironmentMoments:
        rho = self.rho
        p = float(std_normal_cdf(rho))
        q = float(std_normal_cdf(-rho))
        f = float(std_normal_pdf(rho))
        if p <= 0.0 or q <= 0.0 or f <= 0.0:
            raise DegenerateEnvironmentError(rho)
        return EnvironmentMoments(p=p, q=q, f=f)


@dataclass(frozen=True)
class VotingRule:
    """n voters with strict relative acceptance threshold alpha.

    A proposal passes iff yes_votes / n > alpha. alpha ranges from -1/n
    (accept everything) to 1 (reject everything).
    """

    n: int
    alpha: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (-1.0 / self.n <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [-1/{self.n}, 1], got {self.alpha}")


def min_yes_votes(rule: VotingRule) -> int:
    """Smallest yes count that passes: floor(alpha * n) + 1, in {0, ..., n+1}.

    floor is toward -inf so alpha = -1/n gives 0 (accept-all) and alpha = 1
    gives n+1 (reject-all). Thresholds with equal floor(alpha * n) act
    identically; these are the equivalence classes of thresholds.
    """
    m = math.floor(rule.alpha * rule.n) + 1
    return min(max(m, 0), rule.n + 1)
