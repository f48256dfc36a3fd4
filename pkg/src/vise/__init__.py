"""Voting in a stochastic environment: a society of self-interested voters
repeatedly accepts or rejects random proposals by alpha-majority.

The package provides exact and approximate expected capital increments, the
optimal acceptance threshold (continuous estimate, quantized ladder, and
brute-force discrete optimum), threshold sensitivity, a seeded Monte Carlo
simulator that independently verifies every closed form, and a CLI that
emits the standard experiment curves as CSV tables and figures.
"""

from .analytic import (
    EXACT_SUM,
    MONTE_CARLO,
    NORMAL_APPROX,
    ApproxTerms,
    IncrementResult,
    ThresholdEstimate,
    acceptance_probability,
    approx_terms,
    approx_validity,
    expected_increment_approx,
    expected_increment_exact,
    foc_residual,
    max_expected_increment,
    neutral_mean_increment,
    optimal_threshold_bruteforce,
    optimal_threshold_estimate,
    optimal_threshold_ladder,
    rescaled_curve_value,
    threshold_sensitivity,
)
from .core import (
    DegenerateEnvironmentError,
    Environment,
    EnvironmentMoments,
    VotingRule,
    binomial_pmf,
    min_yes_votes,
    std_normal_cdf,
    std_normal_pdf,
)
from .experiments import (
    CurvePoint,
    LadderPoint,
    PitReport,
    SensitivityPoint,
    SplinePoint,
    VerificationReport,
    ladder_table,
    optimal_spline,
    pit_report,
    sensitivity_table,
    sweep_increment,
    verify,
)
from .simulate import (
    Proposal,
    SimulationConfig,
    SimulationSummary,
    SocietyState,
    apply_step,
    estimate_increment_curve,
    generate_proposal,
    run_simulation,
    tally_votes,
)

__version__ = "0.1.0"
