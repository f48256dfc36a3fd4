"""Sweep harness: curve tables, pit-of-losses characterization, the optimal
threshold spline and ladder, sensitivity curves, and the self-verification
suite that pits every closed form against the Monte Carlo oracle.

All outputs are plain rows of floats, deterministic given their arguments
(and seed, where randomness is involved); the CLI turns them into CSV and
optional figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import analytic, core, simulate
from .analytic import EXACT_SUM, MONTE_CARLO, NORMAL_APPROX
from .core import Environment, VotingRule

__all__ = [
    "CurvePoint",
    "PitReport",
    "SplinePoint",
    "LadderPoint",
    "SensitivityPoint",
    "VerificationReport",
    "sweep_increment",
    "pit_report",
    "optimal_spline",
    "ladder_table",
    "sensitivity_table",
    "verify",
]

_METHODS = (EXACT_SUM, NORMAL_APPROX, MONTE_CARLO)

#: Default search window for the pit of losses; to its left proposals are
#: essentially never accepted, to its right the curve is positive.
PIT_WINDOW = (-3.0, 0.0)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CurvePoint:
    """One point of an expected-increment curve."""

    rho: float
    value: float
    method: str
    std_error: Optional[float] = None


@dataclass(frozen=True)
class PitReport:
    """Location and size of the pit of losses (exact-sum based).

    right_zero is the zero crossing on the pit's right flank; min_rho /
    min_value the deepest point; left_epsilon_bound the largest rho left of
    the minimum where |increment| has decayed to epsilon * sigma.
    """

    right_zero: float
    min_rho: float
    min_value: float
    left_epsilon_bound: float
    epsilon: float


@dataclass(frozen=True)
class SplinePoint:
    """Best threshold class and its value at one rho."""

    rho: float
    best_alpha_class: float
    best_value: float


@dataclass(frozen=True)
class LadderPoint:
    """Continuous, ladder and brute-force threshold views at one rho."""

    rho: float
    alpha_hat: float
    alpha_ladder: float
    alpha_bruteforce: float
    classes_agree: bool


@dataclass(frozen=True)
class SensitivityPoint:
    """Optimal-threshold level and (minus) slope at one rho, with a normal
    density rescaled to match the slope at rho = 0 for tail comparison."""

    rho: float
    alpha_hat: float
    minus_derivative: float
    matched_normal_density: float


def _rho_grid(rho_range: tuple[float, float], points: int) -> np.ndarray:
    lo, hi = rho_range
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    if not lo < hi:
        raise ValueError(f"need rho_min < rho_max, got [{lo}, {hi}]")
    return np.linspace(lo, hi, points)


def _bisect_root(f: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    """Root of f on [lo, hi] with f(lo) < 0 <= f(hi), by bisection."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if not (flo < 0.0 < fhi):
        raise ValueError(f"root not bracketed: f({lo})={flo}, f({hi})={fhi}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _golden_min(f: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    """Minimizer of a unimodal f on [lo, hi] by golden-section search."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def sweep_increment(
    n: int,
    sigma: float,
    alpha: float,
    rho_range: tuple[float, float],
    points: int,
    methods: Sequence[str] = (EXACT_SUM,),
    proposals: int = 200_000,
    seed: int = 1,
    workers: int = 1,
) -> list[CurvePoint]:
    """Expected-increment curve over a uniform rho grid, one row per
    (rho, method); rows come out sorted by rho, methods in canonical order."""
    for m in methods:
        if m not in _METHODS:
            raise ValueError(f"unknown method {m!r}")
    grid = _rho_grid(rho_range, points)
    rule = VotingRule(n=n, alpha=alpha)
    envs = [Environment.from_rho(float(r), sigma) for r in grid]

    mc_by_index: dict[int, analytic.IncrementResult] = {}
    if MONTE_CARLO in methods:
        curve = simulate.estimate_increment_curve(envs, rule, proposals, seed, workers=workers)
        mc_by_index = {i: res for i, (_, res) in enumerate(curve)}

    rows: list[CurvePoint] = []
    for i, env in enumerate(envs):
        rho = float(grid[i])  # grid coordinate, not the mu/sigma round trip
        if EXACT_SUM in methods:
            rows.append(CurvePoint(rho, analytic.expected_increment_exact(env, rule).value, EXACT_SUM))
        if NORMAL_APPROX in methods:
            rows.append(CurvePoint(rho, analytic.expected_increment_approx(env, rule).value, NORMAL_APPROX))
        if MONTE_CARLO in methods:
            res = mc_by_index[i]
            rows.append(CurvePoint(rho, res.value, MONTE_CARLO, res.std_error))
    return rows


def pit_report(
    n: int,
    sigma: float,
    alpha: float,
    epsilon: float = 1e-3,
    window: tuple[float, float] = PIT_WINDOW,
) -> Optional[PitReport]:
    """Characterize the pit of losses for one rule, or None when there is no
    pit (the curve never goes negative in the window, or never recovers to
    positive on the right, as with the accept-all threshold).

    The zero crossing and the minimum are located on the exact sum by
    bisection and golden-section search, well inside 1e-4 in rho.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    rule = VotingRule(n=n, alpha=alpha)
    m = core.min_yes_votes(rule)

    def g(rho: float) -> float:
        return analytic._increment_exact_value(Environment.from_rho(rho, sigma), n, m)

    lo, hi = window
    grid = np.linspace(lo, hi, 601)
    values = np.array([g(float(r)) for r in grid])
    i_min = int(np.argmin(values))
    if values[i_min] >= 0.0:
        return None

    a = float(grid[max(i_min - 1, 0)])
    b = float(grid[min(i_min + 1, len(grid) - 1)])
    min_rho = _golden_min(g, a, b, xtol=1e-6)
    min_value = g(min_rho)

    positive_right = np.nonzero((grid > grid[i_min]) & (values > 0.0))[0]
    if len(positive_right) == 0:
        return None
    j = int(positive_right[0])
    right_zero = _bisect_root(g, float(grid[j - 1]), float(grid[j]), xtol=1e-12)

    threshold = epsilon * sigma
    if abs(min_value) <= threshold:
        left_bound = min_rho
    elif abs(g(lo)) > threshold:
        left_bound = lo  # the whole window is deeper than epsilon*sigma
    else:
        left_bound = _bisect_root(lambda r: abs(g(r)) - threshold, lo, min_rho, xtol=1e-6)

    return PitReport(
        right_zero=right_zero,
        min_rho=min_rho,
        min_value=min_value,
        left_epsilon_bound=left_bound,
        epsilon=epsilon,
    )


def optimal_spline(
    n: int, sigma: float, rho_range: tuple[float, float], points: int
) -> list[SplinePoint]:
    """At each rho, the exact-sum maximum over the n+2 essentially different
    thresholds; best_alpha_class is the winning class mean, ties going to
    the smaller threshold."""
    rows = []
    for r in _rho_grid(rho_range, points):
        env = Environment.from_rho(float(r), sigma)
        best_m, best_v = analytic._argmax_threshold(env, n)
        rows.append(SplinePoint(rho=float(r), best_alpha_class=(best_m - 0.5) / n, best_value=best_v))
    return rows


def ladder_table(
    n: int, rho_range: tuple[float, float], points: int
) -> tuple[list[LadderPoint], float]:
    """Continuous estimate, ladder value and brute-force optimum per rho,
    plus the fraction of points where ladder and brute-force classes agree.

    Classes depend on rho only, so the brute force runs at sigma = 1.
    """
    rows = []
    agreements = 0
    for r in _rho_grid(rho_range, points):
        rho = float(r)
        est = analytic.optimal_threshold_bruteforce(Environment.from_rho(rho), n)
        ladder_class = math.floor(est.alpha_hat * n)
        brute_class = round(est.alpha_bruteforce * n)  # exact: bruteforce is k/n
        agree = ladder_class == brute_class
        agreements += agree
        rows.append(
            LadderPoint(
                rho=rho,
                alpha_hat=est.alpha_hat,
                alpha_ladder=est.alpha_ladder,
                alpha_bruteforce=est.alpha_bruteforce,
                classes_agree=agree,
            )
        )
    return rows, agreements / len(rows)


def sensitivity_table(rho_range: tuple[float, float], points: int) -> list[SensitivityPoint]:
    """Optimal-threshold estimate and minus its derivative over a rho grid.

    matched_normal_density is phi(rho) rescaled so its value at rho = 0
    equals the derivative magnitude there; the derivative's heavier tails
    show up as minus_derivative exceeding this reference away from 0.
    """
    scale = -analytic.threshold_sensitivity(0.0) / float(core.std_normal_pdf(0.0))
    rows = []
    for r in _rho_grid(rho_range, points):
        rho = float(r)
        rows.append(
            SensitivityPoint(
                rho=rho,
                alpha_hat=analytic.optimal_threshold_estimate(rho),
                minus_derivative=-analytic.threshold_sensitivity(rho),
                matched_normal_density=scale * float(core.std_normal_pdf(rho)),
            )
        )
    return rows


@dataclass
class VerificationReport:
    """Outcome of the verification suite: ordered pass/fail per check plus
    free-form numeric details, rendered as flat key=value lines."""

    checks: dict[str, bool]
    details: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def lines(self) -> list[str]:
        out = []
        for name, ok in self.checks.items():
            out.append(f"{name}={'pass' if ok else 'fail'}")
            prefix = name + "."
            for key, value in self.details.items():
                if key.startswith(prefix):
                    out.append(f"{key}={format(value, '.6g')}")
        out.append(f"overall={'pass' if self.passed else 'fail'}")
        return out


def verify(seed: int = 1, budget: int = 1_000_000, se_limit: float = 3.0, workers: int = 1) -> VerificationReport:
    """Run the full invariant suite: special-function identities, the
    neutral-environment law, exact-vs-approximation agreement, the scaling
    law, threshold anchors and stationarity, ladder-vs-bruteforce tracking,
    spline positivity, pit geometry, and the Monte Carlo oracle.

    budget is the number of proposals per Monte Carlo cell (>= 1e5). A cell
    passes softly at se_limit standard errors and hard at se_limit + 1; up
    to two soft exceedances among the nine cells are tolerated.
    """
    if budget < 100_000:
        raise ValueError(f"budget must be >= 100000 proposals per point, got {budget}")
    checks: dict[str, bool] = {}
    details: dict[str, float] = {}

    def record(name: str, ok: bool, **info: float):
        checks[name] = bool(ok)
        for k, v in info.items():
            details[f"{name}.{k}"] = float(v)

    # Special-function identities.
    xs = np.linspace(-8.0, 8.0, 1001)
    err = float(np.max(np.abs(core.std_normal_cdf(xs) + core.std_normal_cdf(-xs) - 1.0)))
    record("cdf_symmetry", err <= 1e-12, max_abs_err=err)

    xs = np.linspace(-5.0, 5.0, 201)
    h = 1e-5
    slope = (core.std_normal_cdf(xs + h) - core.std_normal_cdf(xs - h)) / (2.0 * h)
    err = float(np.max(np.abs(slope - core.std_normal_pdf(xs))))
    record("pdf_cdf_slope", err <= 1e-6, max_abs_err=err)

    err = 0.0
    for n in (1, 7, 21, 100):
        for p in (0.1, 0.5, 0.9):
            total = math.fsum(core.binomial_pmf(np.arange(n + 1), n, p).tolist())
            err = max(err, abs(total - 1.0))
    record("binomial_normalization", err <= 1e-9, max_abs_err=err)

    # Acceptance rule: min yes count nondecreasing in alpha, constant on
    # threshold equivalence classes.
    ok = True
    for n in (5, 20, 21, 100):
        alphas = np.linspace(0.0, 1.0, 41)
        cuts = [core.min_yes_votes(VotingRule(n, float(a))) for a in alphas]
        ok = ok and all(a <= b for a, b in zip(cuts, cuts[1:]))
        for k in range(0, n):
            inside = core.min_yes_votes(VotingRule(n, (k + 0.25) / n))
            ok = ok and inside == core.min_yes_votes(VotingRule(n, (k + 0.75) / n))
    record("min_yes_classes", ok)

    # Neutral environment: approximation hits sigma/(pi sqrt(n)) exactly,
    # the exact sum within 5% relative for n >= 21.
    err_eq, err_rel = 0.0, 0.0
    for n in range(3, 102, 2):
        env = Environment(mu=0.0, sigma=1.0)
        rule = VotingRule(n=n, alpha=0.5)
        law = analytic.neutral_mean_increment(1.0, n)
        err_eq = max(err_eq, abs(analytic.expected_increment_approx(env, rule).value - law))
        if n >= 21:
            exact = analytic.expected_increment_exact(env, rule).value
            err_rel = max(err_rel, abs(exact - law) / law)
    record("neutral_law", err_eq <= 1e-12 and err_rel <= 0.05, max_abs_err=err_eq, max_rel_err=err_rel)

    # Exact vs normal approximation wherever the approximation is rated.
    sigma = 10.0
    worst = 0.0
    ok = True
    for n in (21, 31, 51):
        bound = 0.05 * sigma / math.sqrt(n)
        for alpha in (0.4, 0.5, 0.6):
            rule = VotingRule(n=n, alpha=alpha)
            for r in np.linspace(-1.5, 1.5, 50):
                env = Environment.from_rho(float(r), sigma)
                if analytic.approx_validity(env, rule) == analytic.VALIDITY_WEAK:
                    continue
                diff = abs(
                    analytic.expected_increment_exact(env, rule).value
                    - analytic.expected_increment_approx(env, rule).value
                )
                worst = max(worst, diff / bound)
                ok = ok and diff <= bound
    record("exact_vs_approx", ok, worst_fraction_of_bound=worst)

    # Square-root rescaling between society sizes.
    ok = True
    worst = 0.0
    for base, target in ((49, 196), (36, 144)):
        grid = np.linspace(-1.5, 1.5, 50)
        rule = VotingRule(n=target, alpha=0.5)
        direct = np.array(
            [analytic.expected_increment_exact(Environment.from_rho(float(r)), rule).value for r in grid]
        )
        rescaled = np.array(
            [analytic.rescaled_curve_value(base, target, float(r), 1.0, 0.5) for r in grid]
        )
        sup = float(np.max(np.abs(direct - rescaled)))
        frac = sup / float(np.max(np.abs(direct)))
        worst = max(worst, frac)
        ok = ok and frac <= 0.05
    record("scaling_law", ok, worst_sup_fraction=worst)

    # Optimal-threshold anchors and stationarity.
    a0 = analytic.optimal_threshold_estimate(0.0)
    a_half = analytic.optimal_threshold_estimate(-0.5)
    a_one = analytic.optimal_threshold_estimate(-1.0)
    record(
        "threshold_anchors",
        a0 == 0.5 and abs(a_half - 0.61) <= 0.005 and abs(a_one - 0.71) <= 0.005,
        at_zero=a0,
        at_minus_half=a_half,
        at_minus_one=a_one,
    )

    rhos = np.linspace(-3.0, 3.0, 100)
    res = max(abs(analytic.foc_residual(analytic.optimal_threshold_estimate(float(r)), float(r))) for r in rhos)
    record("foc_identity", res <= 1e-12, max_abs_residual=res)

    anchor = abs(analytic.foc_residual(0.61, -0.5))
    record("foc_anchor", anchor <= 5e-3, abs_residual=anchor)

    sens0 = analytic.threshold_sensitivity(0.0)
    closed = (math.sqrt(2.0 / math.pi) - math.sqrt(math.pi / 2.0)) / 2.0
    record("sensitivity_constant", abs(sens0 - closed) <= 1e-10, value=sens0, closed_form=closed)

    rhos = np.linspace(-6.0, 6.0, 121)
    vals = np.array([analytic.threshold_sensitivity(float(r)) for r in rhos])
    even_err = float(np.max(np.abs(vals - vals[::-1])))
    all_negative = bool(np.all(vals < 0.0))
    fd_err = 0.0
    h = 1e-4
    for r in np.linspace(-3.0, 3.0, 61):
        fd = (
            analytic.optimal_threshold_estimate(float(r) + h)
            - analytic.optimal_threshold_estimate(float(r) - h)
        ) / (2.0 * h)
        fd_err = max(fd_err, abs(fd - analytic.threshold_sensitivity(float(r))))
    record(
        "sensitivity_shape",
        even_err <= 1e-12 and all_negative and fd_err <= 1e-6,
        even_err=even_err,
        fd_err=fd_err,
    )

    # Ladder vs brute force, spline positivity.
    rows, rate = ladder_table(21, (-0.5, 0.5), 100)
    max_gap = max(
        abs(math.floor(p.alpha_hat * 21) - round(p.alpha_bruteforce * 21)) for p in rows
    )
    record("ladder_agreement", rate >= 0.8 and max_gap <= 1, rate=rate, max_class_gap=max_gap)

    spline = optimal_spline(21, 10.0, (-3.0, 3.0), 61)
    record("spline_positive", all(p.best_value > 0.0 for p in spline), min_value=min(p.best_value for p in spline))

    # Pit geometry.
    pit = pit_report(21, 1.0, 0.5)
    ok = pit is not None and abs(pit.right_zero + 0.266) <= 0.005
    record("pit_boundary", ok, right_zero=pit.right_zero if pit else math.nan)

    depths = {}
    for n in list(range(3, 32, 2)) + [19, 20, 21]:
        report = pit_report(n, 1.0, 0.5)
        depths[n] = abs(report.min_value) if report else 0.0
    odd_peak = max((n for n in depths if n % 2 == 1 and n <= 31), key=lambda n: depths[n])
    record("pit_depth_peak", odd_peak == 7, argmax_n=odd_peak, depth_at_7=depths[7])
    record(
        "pit_even_odd",
        depths[20] < min(depths[19], depths[21]),
        depth_20=depths[20],
        depth_19=depths[19],
        depth_21=depths[21],
    )

    # Monte Carlo oracle: nine cells against the exact sum, plus the
    # acceptance rate against the binomial tail.
    n, sigma = 21, 10.0
    cell_seeds = np.random.SeedSequence(seed).generate_state(9, dtype=np.uint64)
    trials = 100
    steps = max(1, budget // trials)
    total = trials * steps
    soft_exceed = 0
    hard_ok = True
    rate_ok = True
    worst_sigmas = 0.0
    worst_rate = 0.0
    idx = 0
    for rho in (-0.5, 0.0, 0.5):
        for alpha in (0.4, 0.5, 0.6):
            env = Environment.from_rho(rho, sigma)
            rule = VotingRule(n=n, alpha=alpha)
            cfg = simulate.SimulationConfig(
                env=env, rule=rule, steps=steps, trials=trials, seed=int(cell_seeds[idx])
            )
            summary = simulate.run_simulation(cfg, workers=workers)
            exact = analytic.expected_increment_exact(env, rule).value
            sigmas = abs(summary.mean_step_increment - exact) / summary.std_error
            worst_sigmas = max(worst_sigmas, sigmas)
            if sigmas > se_limit:
                soft_exceed += 1
            if sigmas > se_limit + 1.0:
                hard_ok = False
            p_acc = analytic.acceptance_probability(env, rule)
            rate_se = math.sqrt(max(p_acc * (1.0 - p_acc), 1e-12) / total)
            rate_sigmas = abs(summary.acceptance_rate - p_acc) / (3.0 * rate_se)
            worst_rate = max(worst_rate, rate_sigmas)
            rate_ok = rate_ok and rate_sigmas <= 1.0
            idx += 1
    record(
        "mc_oracle",
        soft_exceed <= 2 and hard_ok,
        worst_sigmas=worst_sigmas,
        soft_exceedances=soft_exceed,
    )
    record("mc_acceptance_rate", rate_ok, worst_fraction_of_3se=worst_rate)

    # Determinism across worker counts.
    cfg = simulate.SimulationConfig(
        env=Environment(mu=-5.0, sigma=10.0),
        rule=VotingRule(n=21, alpha=0.5),
        steps=2000,
        trials=10,
        seed=seed,
    )
    one = simulate.run_simulation(cfg, workers=1)
    two = simulate.run_simulation(cfg, workers=2)
    record("simulate_determinism", one == two)

    return VerificationReport(checks=checks, details=details)
