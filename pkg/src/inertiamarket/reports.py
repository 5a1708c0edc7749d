"""Result persistence: delimited reports, JSON summaries and figures.

Currency columns carry exactly two decimals, dual/price columns six;
column order and row order are fixed so identical runs produce identical
bytes. Figures are rendered to PNG next to the delimited output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .analysis import MethodComparison, SubstitutionCurve, ViSweepPoint
from .model import Scenario
from .pricing import PaymentReport
from .uc import UcSolution, rocof_requirements

_EUR = "{:.2f}"
_DUAL = "{:.6f}"


def _eur(x: float) -> str:
    v = _EUR.format(x)
    return "0.00" if v == "-0.00" else v


def _dual(x: float) -> str:
    v = _DUAL.format(x)
    return "0.000000" if v == "-0.000000" else v


def _unit_order(scenario: Scenario) -> list[str]:
    return [g.id for g in scenario.generators] + [v.id for v in scenario.vi_units]


def write_payment_report(
    report: PaymentReport, duals_mu: tuple[float, ...], scenario: Scenario, outdir: Path
) -> list[Path]:
    """Payments ledger plus the hourly price file."""
    outdir.mkdir(parents=True, exist_ok=True)
    order = {uid: i for i, uid in enumerate(_unit_order(scenario))}

    payments_path = outdir / f"payments_{report.method}.csv"
    with payments_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["hour", "unit", "eom_profit", "startup_cost", "inertia_payment", "total_profit"]
        )
        for (uid, t), cell in sorted(
            report.cells.items(), key=lambda kv: (kv[0][1], order.get(kv[0][0], 99))
        ):
            w.writerow(
                [
                    t,
                    uid,
                    _eur(cell.eom_profit),
                    _eur(cell.startup_cost),
                    _eur(cell.inertia_payment),
                    _eur(cell.total_profit),
                ]
            )

    prices_path = outdir / f"prices_{report.method}.csv"
    with prices_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "mu", "lambda_hat"])
        for t in range(1, len(report.prices) + 1):
            w.writerow([t, _dual(duals_mu[t - 1]), _dual(report.prices[t - 1])])

    return [payments_path, prices_path]


def write_schedule(
    solution: UcSolution, scenario: Scenario, outdir: Path
) -> list[Path]:
    """Commitment/dispatch table and the hourly inertia balance."""
    outdir.mkdir(parents=True, exist_ok=True)
    sched = outdir / "schedule.csv"
    with sched.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "unit", "committed", "startup", "dispatch_mw", "inertia_mws2"])
        for t in range(1, scenario.horizon + 1):
            for g in scenario.generators:
                key = (g.id, t)
                w.writerow(
                    [
                        t,
                        g.id,
                        solution.commitment.get(key, 0),
                        solution.startup.get(key, 0),
                        _eur(solution.dispatch.get(key, 0.0)),
                        _eur(solution.unit_inertia.get(key, 0.0)),
                    ]
                )
            for v in scenario.vi_units:
                key = (v.id, t)
                w.writerow(
                    [
                        t,
                        v.id,
                        1,
                        0,
                        _eur(solution.vi_power.get(key, 0.0)),
                        _eur(solution.unit_inertia.get(key, 0.0)),
                    ]
                )

    inertia = outdir / "inertia.csv"
    reqs = rocof_requirements(scenario)
    with inertia.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "system_inertia_s", "required_s", "slack_s"])
        for t in range(1, scenario.horizon + 1):
            w.writerow(
                [
                    t,
                    _dual(solution.system_inertia[t - 1]),
                    _dual(reqs[t - 1]),
                    _dual(solution.slack[t - 1]),
                ]
            )
    return [sched, inertia]


def write_two_column(
    rows: list[tuple[float, float]], header: tuple[str, str], path: Path
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for a, b in rows:
            w.writerow([_dual(a), _eur(b)])
    return path


def write_summary(summary: dict, outdir: Path) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def round_eur(x: float) -> float:
    return round(x + 0.0, 2)


def summarize_report(report: PaymentReport) -> dict:
    return {
        "method": report.method,
        "total_inertia_payments": round_eur(report.total_inertia_payments),
        "unit_profits": {
            uid: round_eur(cell.total_profit)
            for uid, cell in sorted(report.unit_totals.items())
        },
        "negative_profit_units": report.negative_profit_units,
        "positive_profit_units": report.positive_profit_units,
        "n_sg_units": report.n_sg_units,
        "prices": [round(p, 6) for p in report.prices],
    }


def summarize_solution(solution: UcSolution) -> dict:
    return {
        "objective": round_eur(solution.objective),
        "startup_cost_total": round_eur(solution.startup_cost_total),
        "energy_cost_total": round_eur(solution.energy_cost_total),
        "vi_cost_total": round_eur(solution.vi_cost_total),
        "slack_cost_total": round_eur(solution.slack_cost_total),
    }


# -- figures ------------------------------------------------------------


def render_prices_figure(
    report: PaymentReport, mu: tuple[float, ...], path: Path
) -> Path:
    hours = range(1, len(report.prices) + 1)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.step(hours, mu, where="mid")
    ax1.set_ylabel("energy price [EUR/MWh]")
    ax1.grid(alpha=0.3)
    ax2.step(hours, report.prices, where="mid", color="tab:red")
    ax2.set_ylabel("inertia price [EUR/MW s$^2$]")
    ax2.set_xlabel("hour")
    ax2.grid(alpha=0.3)
    fig.suptitle(f"Hourly prices ({report.method})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_inertia_figure(
    solution: UcSolution, scenario: Scenario, path: Path
) -> Path:
    hours = list(range(1, scenario.horizon + 1))
    reqs = rocof_requirements(scenario)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(hours, solution.system_inertia, where="mid", label="scheduled")
    if any(s > 0 for s in solution.slack):
        total = [m + s for m, s in zip(solution.system_inertia, solution.slack)]
        ax.step(hours, total, where="mid", label="scheduled + slack", linestyle=":")
    ax.step(hours, reqs, where="mid", label="required", linestyle="--", color="tab:red")
    ax.set_xlabel("hour")
    ax.set_ylabel("aggregate inertia [s]")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_curve_figure(curve: SubstitutionCurve, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(
        [p.cost for p in curve.points],
        [p.m_plus for p in curve.points],
        where="post",
    )
    ax.set_xlabel("slack inertia price [EUR/MW s$^2$]")
    ax.set_ylabel("slack inertia purchased [MW s$^2$]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_vi_sweep_figure(points: list[ViSweepPoint], method: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([p.bid for p in points], [p.total_payments for p in points], marker="o")
    flagged = [p for p in points if p.negative_duals]
    if flagged:
        ax.plot(
            [p.bid for p in flagged],
            [p.total_payments for p in flagged],
            "rx",
            label="negative duals",
        )
        ax.legend()
    ax.set_xlabel("uniform VI bid [EUR/MW s$^2$]")
    ax.set_ylabel(f"total inertia payments [EUR] ({method})")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_method_comparison_figure(comparison: MethodComparison, path: Path) -> Path:
    methods = [r.method for r in comparison.rows]
    totals = [r.total_payments for r in comparison.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(methods, totals, color=["tab:blue", "tab:orange", "tab:green"])
    ax.set_ylabel("total inertia payments [EUR]")
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_comparison(
    comparison: MethodComparison, scenario: Scenario, outdir: Path
) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    table = outdir / "comparison.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "method",
                "uc_objective",
                "total_inertia_payments",
                "negative_profit_units",
                "positive_profit_units",
                "n_sg_units",
            ]
        )
        for r in comparison.rows:
            w.writerow(
                [
                    r.method,
                    _eur(r.uc_objective),
                    _eur(r.total_payments),
                    r.negative_profit_units,
                    r.positive_profit_units,
                    r.n_sg_units,
                ]
            )
    paths.append(table)

    order = {uid: i for i, uid in enumerate(_unit_order(scenario))}
    for method, dispatch in comparison.dispatch.items():
        p = outdir / f"dispatch_{method}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["hour", "unit", "dispatch_mw"])
            for (uid, t), mw in sorted(
                dispatch.items(), key=lambda kv: (kv[0][1], order.get(kv[0][0], 99))
            ):
                w.writerow([t, uid, _eur(mw)])
        paths.append(p)
    return paths
