"""Acceptance gate: every shipping criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion.
"""

import math

import numpy as np

from vise.analytic import (
    expected_increment_approx,
    expected_increment_exact,
    foc_residual,
    optimal_threshold_estimate,
    rescaled_curve_value,
    threshold_sensitivity,
)
from vise.cli import main
from vise.core import Environment, VotingRule
from vise.experiments import ladder_table, optimal_spline, pit_report
from vise.simulate import SimulationConfig, run_simulation


def check(num: int, name: str, ok: bool, detail: str = ""):
    line = f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_c01_threshold_anchors():
    a0 = optimal_threshold_estimate(0.0)
    a_half = optimal_threshold_estimate(-0.5)
    a_one = optimal_threshold_estimate(-1.0)
    ok = a0 == 0.5 and abs(a_half - 0.61) <= 0.005 and abs(a_one - 0.71) <= 0.005
    check(1, "threshold anchors", ok, f"0->{a0}, -0.5->{a_half:.4f}, -1->{a_one:.4f}")


def test_c02_sensitivity_constant():
    closed = (math.sqrt(2.0 / math.pi) - math.sqrt(math.pi / 2.0)) / 2.0
    s0 = threshold_sensitivity(0.0)
    h = 1e-4
    fd = (optimal_threshold_estimate(h) - optimal_threshold_estimate(-h)) / (2 * h)
    ok = abs(s0 - closed) <= 1e-10 and abs(s0 - (-0.2277)) <= 1e-4 and abs(fd - s0) <= 1e-6
    check(2, "sensitivity constant", ok, f"value {s0:.8f}, fd gap {abs(fd - s0):.2e}")


def test_c03_pit_right_boundary():
    report = pit_report(21, 1.0, 0.5)
    ok = report is not None and abs(report.right_zero - (-0.266)) <= 0.005
    check(3, "pit right boundary", ok, f"right_zero {report.right_zero:.5f}")


def test_c04_pit_depth_extremum():
    depths = {n: abs(pit_report(n, 1.0, 0.5).min_value) for n in range(3, 32, 2)}
    peak = max(depths, key=depths.get)
    check(4, "pit depth extremum", peak == 7, f"argmax n = {peak}")


def test_c05_even_odd_pit_asymmetry():
    d = {n: abs(pit_report(n, 1.0, 0.5).min_value) for n in (19, 20, 21)}
    ok = d[20] < min(d[19], d[21])
    check(5, "even/odd pit asymmetry", ok, f"{d[20]:.6f} < min({d[19]:.6f}, {d[21]:.6f})")


def test_c06_neutral_environment_law():
    worst_eq, worst_rel = 0.0, 0.0
    for sigma in (1.0, 10.0):
        for n in range(3, 102, 2):
            env = Environment(mu=0.0, sigma=sigma)
            rule = VotingRule(n=n, alpha=0.5)
            law = sigma / (math.pi * math.sqrt(n))
            worst_eq = max(worst_eq, abs(expected_increment_approx(env, rule).value - law))
            if n >= 21:
                exact = expected_increment_exact(env, rule).value
                worst_rel = max(worst_rel, abs(exact - law) / law)
    ok = worst_eq <= 1e-12 and worst_rel <= 0.05
    check(6, "neutral environment law", ok, f"approx gap {worst_eq:.2e}, exact rel {worst_rel:.4f}")


def test_c07_scaling_law():
    worst = 0.0
    for base, target in ((49, 196), (36, 144)):
        grid = np.linspace(-1.5, 1.5, 50)
        rule = VotingRule(n=target, alpha=0.5)
        direct = np.array(
            [expected_increment_exact(Environment.from_rho(float(r)), rule).value for r in grid]
        )
        rescaled = np.array(
            [rescaled_curve_value(base, target, float(r), 1.0, 0.5) for r in grid]
        )
        frac = float(np.max(np.abs(direct - rescaled))) / float(np.max(np.abs(direct)))
        worst = max(worst, frac)
    check(7, "scaling law", worst <= 0.05, f"worst sup ratio {worst:.5f}")


def test_c08_monte_carlo_oracle():
    n, sigma = 21, 10.0
    trials, steps = 100, 10_000  # 1e6 proposals per cell
    seeds = np.random.SeedSequence(123_456_789).generate_state(9, dtype=np.uint64)
    soft_exceed, hard_ok = 0, True
    worst = 0.0
    idx = 0
    for rho in (-0.5, 0.0, 0.5):
        for alpha in (0.4, 0.5, 0.6):
            env = Environment.from_rho(rho, sigma)
            rule = VotingRule(n=n, alpha=alpha)
            cfg = SimulationConfig(env=env, rule=rule, steps=steps, trials=trials,
                                   seed=int(seeds[idx]))
            summary = run_simulation(cfg, workers=4)
            exact = expected_increment_exact(env, rule).value
            sigmas = abs(summary.mean_step_increment - exact) / summary.std_error
            worst = max(worst, sigmas)
            soft_exceed += sigmas > 3.0
            hard_ok = hard_ok and sigmas <= 4.0
            idx += 1
    ok = soft_exceed <= 2 and hard_ok
    check(8, "Monte Carlo oracle", ok, f"worst {worst:.2f} SE, {soft_exceed} cells above 3 SE")


def test_c09_foc_identity():
    worst = max(
        abs(foc_residual(optimal_threshold_estimate(float(r)), float(r)))
        for r in np.linspace(-3.0, 3.0, 100)
    )
    check(9, "first-order-condition identity", worst <= 1e-12, f"max residual {worst:.2e}")


def test_c10_spline_positivity():
    rows = optimal_spline(21, 10.0, (-3.0, 3.0), 61)
    low = min(p.best_value for p in rows)
    check(10, "spline positivity", low > 0.0, f"min best_value {low:.3e}")


def test_c11_ladder_vs_bruteforce():
    rows, rate = ladder_table(21, (-0.5, 0.5), 100)
    gaps = [abs(math.floor(p.alpha_hat * 21) - round(p.alpha_bruteforce * 21)) for p in rows]
    ok = rate >= 0.8 and max(gaps) <= 1
    check(11, "ladder vs brute force", ok, f"agreement {rate:.2f}, max gap {max(gaps)} step")


def test_c12_simulate_determinism(tmp_path):
    base = ["simulate", "--n", "21", "--sigma", "10", "--rho", "-0.5", "--alpha", "0.5",
            "--steps", "2000", "--trials", "25", "--seed", "424242"]
    blobs = []
    for i, workers in enumerate(("1", "1", "4")):
        out = tmp_path / f"run{i}.csv"
        assert main(base + ["--workers", workers, "--out", str(out)]) == 0
        with open(out, "rb") as fh:
            blobs.append(fh.read())
    ok = blobs[0] == blobs[1] == blobs[2]
    check(12, "simulate determinism", ok, f"{len(blobs[0])} bytes, identical across reruns/workers")
