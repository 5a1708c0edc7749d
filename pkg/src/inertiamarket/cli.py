"""Command-line surface tying scenarios, solves, pricing and reports together.

Exit codes: 0 success, 1 infeasible problem, 2 input error, 3 internal
error. The output directory defaults to ``./out`` and can be overridden
with ``--out`` or the ``INERTIAMARKET_OUTDIR`` environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from . import analysis, freq, pricing, reports, uc
from .model import Scenario, ScenarioError
from .optimizer import get_solver
from .scenario_io import ScenarioParseError, load_scenario


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="inertiamarket",
        description="Energy and inertia co-optimization with RoCoF-constrained "
        "unit commitment and three inertia payment schemes.",
    )
    p.add_argument(
        "--out",
        default=None,
        help="output directory (default: $INERTIAMARKET_OUTDIR or ./out)",
    )
    p.add_argument(
        "--backend",
        default="builtin",
        choices=("builtin", "scipy"),
        help="solver backend (scipy requires the 'delegated' extra)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_scenario_args(sp, vi_flag=True):
        sp.add_argument("scenario", help="scenario JSON path or bundled name")
        sp.add_argument(
            "--rocof-limit", type=float, default=None, help="override, Hz/s"
        )
        if vi_flag:
            sp.add_argument(
                "--vi",
                action="store_true",
                help="let virtual inertia units participate",
            )

    sp = sub.add_parser("solve", help="run one frequency-constrained commitment")
    add_scenario_args(sp)
    sp.add_argument(
        "--no-freq",
        action="store_true",
        help="drop the RoCoF requirement (energy-only commitment)",
    )
    sp.add_argument(
        "--slack-cost",
        type=float,
        default=None,
        help="buy slack inertia at this price [EUR/MW s^2]",
    )

    sp = sub.add_parser("price", help="two-step commitment plus one payment scheme")
    add_scenario_args(sp)
    sp.add_argument(
        "--method", required=True, choices=analysis.METHODS, help="payment scheme"
    )
    sp.add_argument(
        "--negative-dual",
        default="passthrough",
        choices=pricing.NEGATIVE_DUAL_POLICIES,
        help="how the utility scheme treats negative inertia prices",
    )

    sp = sub.add_parser("sweep-slack", help="trace the slack-inertia demand curve")
    add_scenario_args(sp, vi_flag=False)
    sp.add_argument(
        "--grid", default="auto", help="comma-separated prices, or 'auto'"
    )

    sp = sub.add_parser("sweep-vi", help="sweep uniform VI bids and total payments")
    add_scenario_args(sp, vi_flag=False)
    sp.add_argument("--grid", required=True, help="comma-separated bid levels")
    sp.add_argument("--method", required=True, choices=analysis.METHODS)

    sp = sub.add_parser("compare", help="all three payment schemes on one run")
    add_scenario_args(sp)

    sp = sub.add_parser("freq-metrics", help="closed-form frequency metrics")
    for flag, help_text in (
        ("--dp", "disturbance, p.u."),
        ("--m", "aggregate inertia, s"),
        ("--d", "damping, p.u."),
        ("--rg", "droop gain, p.u."),
        ("--fg", "turbine power fraction, p.u."),
        ("--t", "turbine time constant, s"),
        ("--zeta", "damping ratio"),
        ("--omega-n", "natural frequency, rad/s"),
        ("--tm", "nadir time, s"),
    ):
        sp.add_argument(flag, type=float, required=True, help=help_text)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except uc.UcInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except (ScenarioParseError, ScenarioError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - last-resort diagnostics
        traceback.print_exc()
        return 3


def _outdir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("INERTIAMARKET_OUTDIR", "out"))


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if getattr(args, "rocof_limit", None) is not None:
        scenario = replace(
            scenario, grid=replace(scenario.grid, rocof_limit=args.rocof_limit)
        )
    if scenario.profiles_placeholder:
        print(
            f"warning: scenario {scenario.name!r} carries placeholder load/wind "
            "profiles; results are structural, not reproductions",
            file=sys.stderr,
        )
    return scenario


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ScenarioParseError(f"bad grid {text!r}: expected comma-separated numbers")
    if not grid:
        raise ScenarioParseError("grid is empty")
    if sorted(grid) != grid:
        raise ScenarioParseError("grid must be sorted ascending")
    return grid


def _dispatch(args) -> int:
    if args.command == "freq-metrics":
        return _freq_metrics(args)

    solver = get_solver(args.backend)
    outdir = _outdir(args)
    scenario = _load(args)

    if args.command == "solve":
        variant = uc.UcVariant(
            frequency_constrained=not args.no_freq,
            vi_enabled=args.vi,
            slack_inertia=args.slack_cost,
        )
        solution = uc.solve_variant(scenario, variant, solver)
        written = reports.write_schedule(solution, scenario, outdir)
        written.append(
            reports.write_summary(
                {"scenario": scenario.name, "solution": reports.summarize_solution(solution)},
                outdir,
            )
        )
        written.append(
            reports.render_inertia_figure(solution, scenario, outdir / "inertia_schedule.png")
        )
        _list(written)
        return 0

    if args.command == "price":
        variant = uc.UcVariant(frequency_constrained=True, vi_enabled=args.vi)
        two_step = uc.two_step_pipeline(scenario, variant, solver)
        report = analysis.price_method(
            scenario,
            two_step,
            args.method,
            solver=solver,
            negative_dual_policy=args.negative_dual,
        )
        written = reports.write_payment_report(
            report, two_step.restricted_duals.mu, scenario, outdir
        )
        summary = {
            "scenario": scenario.name,
            "step1": reports.summarize_solution(two_step.step1),
            "step2": reports.summarize_solution(two_step.step2),
            "extra_units": sorted(two_step.extra_unit_ids()),
            "report": reports.summarize_report(report),
        }
        summary["total_inertia_payments"] = summary["report"]["total_inertia_payments"]
        written.append(reports.write_summary(summary, outdir))
        written.append(
            reports.render_prices_figure(
                report, two_step.restricted_duals.mu, outdir / f"prices_{args.method}.png"
            )
        )
        _list(written)
        return 0

    if args.command == "sweep-slack":
        auto = args.grid == "auto"
        grid = None if auto else _parse_grid(args.grid)
        curve = analysis.substitution_sweep(scenario, grid, solver, refine=auto)
        rows = [(p.cost, p.m_plus) for p in curve.points]
        written = [
            reports.write_two_column(
                rows, ("slack_cost", "m_plus_mws2"), outdir / "sweep_slack.csv"
            ),
            reports.write_summary(
                {
                    "scenario": scenario.name,
                    "points": [
                        {
                            "cost": round(p.cost, 6),
                            "m_plus": round(p.m_plus, 6),
                            "total_cost": reports.round_eur(p.total_cost),
                        }
                        for p in curve.points
                    ],
                },
                outdir,
            ),
            reports.render_curve_figure(curve, outdir / "substitution_curve.png"),
        ]
        _list(written)
        return 0

    if args.command == "sweep-vi":
        grid = _parse_grid(args.grid)
        points = analysis.vi_cost_sweep(scenario, grid, args.method, solver)
        rows = [(p.bid, p.total_payments) for p in points]
        written = [
            reports.write_two_column(
                rows, ("vi_bid", "total_payments"), outdir / "sweep_vi.csv"
            ),
            reports.write_summary(
                {
                    "scenario": scenario.name,
                    "method": args.method,
                    "points": [
                        {
                            "bid": round(p.bid, 6),
                            "total_payments": reports.round_eur(p.total_payments),
                            "negative_duals": p.negative_duals,
                        }
                        for p in points
                    ],
                },
                outdir,
            ),
            reports.render_vi_sweep_figure(
                points, args.method, outdir / "vi_payments.png"
            ),
        ]
        _list(written)
        return 0

    if args.command == "compare":
        comparison = analysis.compare_methods(scenario, vi_enabled=args.vi, solver=solver)
        written = reports.write_comparison(comparison, scenario, outdir)
        for _, report in sorted(comparison.reports.items()):
            written.extend(
                reports.write_payment_report(report, comparison.mu, scenario, outdir)
            )
        summary = {
            "scenario": scenario.name,
            "methods": {
                r.method: {
                    "uc_objective": reports.round_eur(r.uc_objective),
                    "total_inertia_payments": reports.round_eur(r.total_payments),
                    "negative_profit_units": r.negative_profit_units,
                    "positive_profit_units": r.positive_profit_units,
                    "n_sg_units": r.n_sg_units,
                }
                for r in comparison.rows
            },
        }
        written.append(reports.write_summary(summary, outdir))
        written.append(
            reports.render_method_comparison_figure(
                comparison, outdir / "method_payments.png"
            )
        )
        _list(written)
        return 0

    raise RuntimeError(f"unhandled command {args.command!r}")


def _freq_metrics(args) -> int:
    params = freq.FrequencyResponseParams(
        M=args.m,
        D=args.d,
        R_g=args.rg,
        F_g=args.fg,
        T=args.t,
        zeta=args.zeta,
        omega_n=args.omega_n,
        t_m=args.tm,
    )
    try:
        rocof = freq.rocof_max(args.dp, args.m)
        ss = freq.steady_state_dev(args.dp, args.d, args.rg)
        nadir = freq.nadir(args.dp, params)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    f0 = 50.0
    print(f"{'metric':<22}{'p.u.':>14}{'Hz (f0=50)':>14}")
    print(f"{'max RoCoF [1/s]':<22}{rocof:>14.6f}{freq.to_hz(rocof, f0):>14.6f}")
    print(f"{'steady-state dev':<22}{ss:>14.6f}{freq.to_hz(ss, f0):>14.6f}")
    print(f"{'nadir':<22}{nadir:>14.6f}{freq.to_hz(nadir, f0):>14.6f}")
    return 0


def _list(paths: list[Path]) -> None:
    for p in paths:
        print(f"wrote {p}")


if __name__ == "__main__":
    sys.exit(main())
