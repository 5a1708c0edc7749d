"""Scenario-level studies: slack-inertia demand curve, VI bid sweeps, and
the side-by-side comparison of the three payment schemes.

Every sweep point is an independent solve; points are reported in grid
order. These functions return plain data, plot rendering lives with the
report writer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .model import Scenario
from .optimizer import Solver, default_solver
from . import pricing, uc

_M_TOL = 1e-6


@dataclass(frozen=True)
class CurvePoint:
    cost: float  # EUR/(MW s^2) slack price
    m_plus: float  # MW s^2 purchased (horizon maximum)
    total_cost: float  # EUR


@dataclass(frozen=True)
class SubstitutionCurve:
    """Slack-inertia purchases as a function of the slack price."""

    points: tuple[CurvePoint, ...]

    def m_plus_values(self) -> list[float]:
        return [p.m_plus for p in self.points]


@dataclass(frozen=True)
class ViSweepPoint:
    bid: float
    total_payments: float
    negative_duals: bool


@dataclass(frozen=True)
class MethodRow:
    method: str
    uc_objective: float
    total_payments: float
    negative_profit_units: int
    positive_profit_units: int
    n_sg_units: int


@dataclass(frozen=True)
class MethodComparison:
    rows: tuple[MethodRow, ...]
    reports: dict[str, pricing.PaymentReport]
    dispatch: dict[str, dict[tuple[str, int], float]]  # per method, identical
    mu: tuple[float, ...]  # hourly energy prices shared by all methods

    def row(self, method: str) -> MethodRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)


METHODS = ("expost", "utility", "uplift")


def default_cost_grid(scenario: Scenario, points: int = 30) -> list[float]:
    """Zero plus log-spaced prices up to 1.2x the dearest per-unit rate.

    The cap estimates the slack price beyond which committing the whole
    fleet is cheaper than buying any slack. It can undershoot when only a
    sliver of a unit's rotor is marginal, so the auto sweep extends the
    grid until purchases actually stop.
    """
    cheapest_fuel = min(g.fuel_cost for g in scenario.generators)
    worst = max(
        (g.startup_cost + max(g.fuel_cost - cheapest_fuel, 0.0) * g.p_min)
        / g.rotor_inertia
        for g in scenario.generators
    )
    upper = 1.2 * worst if worst > 0 else 1.0
    lower = upper / 300.0
    n = max(points - 1, 2)
    ratio = (upper / lower) ** (1.0 / (n - 1))
    grid = [0.0] + [lower * ratio**i for i in range(n)]
    return grid


def substitution_sweep(
    scenario: Scenario,
    cost_grid: list[float] | None = None,
    solver: Solver | None = None,
    refine: bool = True,
    max_points: int = 48,
) -> SubstitutionCurve:
    """Trace the slack-inertia demand curve over a price grid.

    Each point is a fresh mixed-integer solve of the slack variant; the
    purchased quantity is the horizon maximum of the hourly slack, scaled
    to MW s^2. Adjacent points with different purchases are bisected until
    the step edges are resolved or ``max_points`` is reached.
    """
    solver = solver or default_solver()
    auto = cost_grid is None
    if auto:
        cost_grid = default_cost_grid(scenario)
    if not cost_grid:
        raise ValueError("cost grid must not be empty")
    if sorted(cost_grid) != list(cost_grid):
        raise ValueError("cost grid must be sorted ascending")

    cap = uc.formulation_capacity(scenario, vi_enabled=False)

    def solve_point(cost: float) -> CurvePoint:
        variant = uc.UcVariant(frequency_constrained=True, slack_inertia=cost)
        sol = uc.solve_variant(scenario, variant, solver)
        m_plus = max(sol.slack) * cap if sol.slack else 0.0
        return CurvePoint(cost=cost, m_plus=m_plus, total_cost=sol.objective)

    points = [solve_point(c) for c in cost_grid]

    if auto:
        # The estimated cap can undershoot when only a sliver of a unit's
        # rotor is marginal; double the price until purchases stop so the
        # curve reaches zero.
        while (
            points[-1].m_plus > _M_TOL
            and points[-1].cost > 0
            and len(points) < max_points
        ):
            points.append(solve_point(points[-1].cost * 2.0))
        cost_grid = [p.cost for p in points]

    if refine:
        span = max(cost_grid) - min(cost_grid)
        min_gap = span / 1000.0 if span > 0 else 0.0
        while len(points) < max_points:
            split_at = None
            for i in range(len(points) - 1):
                a, b = points[i], points[i + 1]
                if abs(a.m_plus - b.m_plus) > _M_TOL and b.cost - a.cost > min_gap:
                    split_at = i
                    break
            if split_at is None or min_gap == 0.0:
                break
            mid = 0.5 * (points[split_at].cost + points[split_at + 1].cost)
            points.insert(split_at + 1, solve_point(mid))

    return SubstitutionCurve(points=tuple(points))


def vi_cost_sweep(
    scenario: Scenario,
    bid_grid: list[float],
    method: str,
    solver: Solver | None = None,
) -> list[ViSweepPoint]:
    """Total inertia payments as every VI unit's bid sweeps over a grid."""
    if method not in METHODS:
        raise ValueError(f"unknown pricing method {method!r}")
    if not scenario.vi_units:
        raise ValueError("scenario has no VI units to sweep")
    solver = solver or default_solver()

    out = []
    for bid in bid_grid:
        swept = scenario.with_vi_bids(bid)
        two_step = uc.two_step_pipeline(
            swept, uc.UcVariant(frequency_constrained=True, vi_enabled=True), solver
        )
        report = price_method(swept, two_step, method, solver=solver)
        negative = any(p < -1e-9 for p in report.prices)
        out.append(
            ViSweepPoint(
                bid=bid,
                total_payments=report.total_inertia_payments,
                negative_duals=negative,
            )
        )
    return out


def price_method(
    scenario: Scenario,
    two_step: uc.TwoStepResult,
    method: str,
    solver: Solver | None = None,
    u_value: float | None = None,
    negative_dual_policy: str = "passthrough",
    startup_every_hour: bool = False,
    include_max_gen_term: bool = False,
) -> pricing.PaymentReport:
    """Run one pricing scheme end to end on a shared two-step result."""
    duals = two_step.restricted_duals
    step2 = two_step.step2
    if method == "expost":
        prices = pricing.ex_post_price(
            duals, step2, two_step.extra_units, scenario, startup_every_hour
        )
        payments = pricing.inertia_payments(prices, step2, scenario)
    elif method == "utility":
        with warnings.catch_warnings():
            if negative_dual_policy == "passthrough":
                warnings.simplefilter("always")
            up = pricing.utility_method_prices(
                scenario, two_step, u_value, negative_dual_policy, solver
            )
        prices = up.prices
        payments = pricing.inertia_payments(
            prices, step2, scenario, quantities=up.procured
        )
    elif method == "uplift":
        prices = duals.lambda_h
        payments = pricing.uplift_payments(
            step2, duals, scenario, include_max_gen_term
        )
    else:
        raise ValueError(f"unknown pricing method {method!r}")
    return pricing.profit_report(step2, duals, payments, scenario, prices, method)


def compare_methods(
    scenario: Scenario,
    vi_enabled: bool = False,
    solver: Solver | None = None,
    two_step: uc.TwoStepResult | None = None,
) -> MethodComparison:
    """One commitment, all three payment schemes side by side.

    The pipeline runs once; every scheme prices the same restricted
    solution, so commitment and dispatch are identical across methods by
    construction (the per-method dispatch tables are emitted anyway so
    reports can prove it).
    """
    solver = solver or default_solver()
    if two_step is None:
        two_step = uc.two_step_pipeline(
            scenario,
            uc.UcVariant(frequency_constrained=True, vi_enabled=vi_enabled),
            solver,
        )

    rows = []
    reports: dict[str, pricing.PaymentReport] = {}
    dispatch: dict[str, dict[tuple[str, int], float]] = {}
    for method in METHODS:
        report = price_method(scenario, two_step, method, solver=solver)
        reports[method] = report
        dispatch[method] = dict(two_step.step2.dispatch)
        rows.append(
            MethodRow(
                method=method,
                uc_objective=two_step.step2.objective,
                total_payments=report.total_inertia_payments,
                negative_profit_units=report.negative_profit_units,
                positive_profit_units=report.positive_profit_units,
                n_sg_units=report.n_sg_units,
            )
        )
    return MethodComparison(
        rows=tuple(rows),
        reports=reports,
        dispatch=dispatch,
        mu=two_step.restricted_duals.mu,
    )
