"""Figure rendering for the experiment tables.

Each function takes the rows produced by the experiments module and saves a
PNG next to the CSV. Rendering is cosmetic: nothing here feeds back into the
numbers, and the CSVs stay the canonical output.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analytic import EXACT_SUM, MONTE_CARLO, NORMAL_APPROX
from .experiments import CurvePoint, LadderPoint, PitReport, SensitivityPoint, SplinePoint

_METHOD_STYLE = {
    EXACT_SUM: dict(color="tab:blue", label="exact sum"),
    NORMAL_APPROX: dict(color="tab:orange", linestyle="--", label="normal approx"),
    MONTE_CARLO: dict(color="tab:green", label="Monte Carlo"),
}


def _new_axes(xlabel: str, ylabel: str, title: str):
    fig, ax = plt.subplots(figsize=(7.0, 4.4), constrained_layout=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: str):
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(rows: Sequence[CurvePoint], n: int, sigma: float, alpha: float, path: str):
    fig, ax = _new_axes("rho = mu/sigma", "expected increment per step",
                        f"Mean one-step capital increment (n={n}, sigma={sigma:g}, alpha={alpha:g})")
    ax.axhline(0.0, color="gray", lw=0.8)
    for method in (EXACT_SUM, NORMAL_APPROX, MONTE_CARLO):
        pts = [p for p in rows if p.method == method]
        if not pts:
            continue
        xs = [p.rho for p in pts]
        ys = [p.value for p in pts]
        style = _METHOD_STYLE[method]
        if method == MONTE_CARLO:
            ax.errorbar(xs, ys, yerr=[3 * (p.std_error or 0.0) for p in pts],
                        fmt=".", ms=4, capsize=2, **style)
        else:
            ax.plot(xs, ys, **style)
    ax.legend()
    _save(fig, path)


def save_pit_figure(report: Optional[PitReport], curve: Sequence[CurvePoint],
                    n: int, sigma: float, alpha: float, path: str):
    fig, ax = _new_axes("rho = mu/sigma", "expected increment per step",
                        f"Pit of losses (n={n}, sigma={sigma:g}, alpha={alpha:g})")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.plot([p.rho for p in curve], [p.value for p in curve], color="tab:blue")
    if report is not None:
        ax.axvline(report.right_zero, color="tab:red", lw=0.8, linestyle=":",
                   label=f"right zero {report.right_zero:.4f}")
        ax.axvline(report.left_epsilon_bound, color="tab:purple", lw=0.8, linestyle=":",
                   label=f"eps bound {report.left_epsilon_bound:.4f}")
        ax.plot([report.min_rho], [report.min_value], "v", color="tab:red",
                label=f"depth {report.min_value:.4g} at {report.min_rho:.4f}")
        ax.legend()
    else:
        ax.set_title(ax.get_title() + " - no pit")
    _save(fig, path)


def save_spline_figure(rows: Sequence[SplinePoint], n: int, sigma: float, path: str):
    fig, ax = _new_axes("rho = mu/sigma", "best expected increment",
                        f"Increment under the optimal threshold (n={n}, sigma={sigma:g})")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.plot([p.rho for p in rows], [p.best_value for p in rows], color="tab:blue", label="max over thresholds")
    ax2 = ax.twinx()
    ax2.step([p.rho for p in rows], [p.best_alpha_class for p in rows], where="mid",
             color="tab:orange", alpha=0.7, label="best class")
    ax2.set_ylabel("optimal threshold class")
    h1, l1 = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(h1 + h2, l1 + l2, loc="upper left")
    _save(fig, path)


def save_ladder_figure(rows: Sequence[LadderPoint], n: int, path: str):
    fig, ax = _new_axes("rho = mu/sigma", "acceptance threshold",
                        f"Optimal threshold: estimate, ladder, brute force (n={n})")
    xs = [p.rho for p in rows]
    ax.plot(xs, [p.alpha_hat for p in rows], color="gray", label="continuous estimate")
    ax.step(xs, [p.alpha_ladder for p in rows], where="mid", color="tab:blue", label="ladder")
    ax.plot(xs, [p.alpha_bruteforce for p in rows], ".", ms=3, color="tab:red", label="brute force")
    ax.legend()
    _save(fig, path)


def save_sensitivity_figure(rows: Sequence[SensitivityPoint], path: str):
    fig, ax = _new_axes("rho = mu/sigma", "value",
                        "Optimal threshold and its rate of change")
    xs = [p.rho for p in rows]
    ax.plot(xs, [p.alpha_hat for p in rows], color="tab:blue", label="threshold estimate")
    ax.plot(xs, [p.minus_derivative for p in rows], color="tab:red", label="minus derivative")
    ax.plot(xs, [p.matched_normal_density for p in rows], ":", color="gray",
            label="normal density matched at 0")
    ax.legend()
    _save(fig, path)
