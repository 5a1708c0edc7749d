"""Inertia pricing schemes and the payment/profit ledger.

Three schemes price the inertia procured by the frequency-constrained
commitment, all fed by the same restricted-LP duals:

* ex-post: the hourly price is the cost of the most expensive provider,
  combining the RoCoF dual (virtual inertia) with the per-MW-s^2 losses of
  generators committed solely for inertia;
* utility: the operator's willingness to pay, derived from the cost gap
  between the frequency-constrained and energy-only runs, is injected as
  a credit into a shortfall-procurement LP whose duals set the price;
* uplift: make-whole side payments covering start-up costs and
  minimum-generation losses, with VI units cleared at the RoCoF dual.

Prices are EUR per MW s^2 of provided inertia; payments scale provider
quantities by the capacity share of their pool when both synchronous and
converter-based pools participate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .model import Scenario
from .optimizer import LinearModel, Solver, default_solver

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, hints only
    from .uc import TwoStepResult, UcSolution

_TOL = 1e-9
_PROFIT_EPS = 5e-3  # half a cent: threshold for profit sign counts

NEGATIVE_DUAL_POLICIES = ("passthrough", "clamp", "fix-utility")


@dataclass(frozen=True)
class DualSet:
    """Market-relevant duals of the restricted LP.

    ``mu`` is the hourly energy price (EUR/MWh), ``lambda_h`` the RoCoF
    constraint dual converted to EUR per MW s^2, and the ``nu`` maps carry
    the generation-bound duals (both reported non-negative; a bound that is
    slack has a zero dual by complementary slackness).
    """

    mu: tuple[float, ...]
    lambda_h: tuple[float, ...]
    nu_upper: dict[tuple[str, int], float]
    nu_lower: dict[tuple[str, int], float]


@dataclass(frozen=True)
class PaymentCell:
    eom_profit: float
    startup_cost: float
    inertia_payment: float

    @property
    def total_profit(self) -> float:
        return self.eom_profit - self.startup_cost + self.inertia_payment


@dataclass(frozen=True)
class PaymentReport:
    """Per unit-hour profit breakdown plus hourly prices and totals."""

    method: str
    cells: dict[tuple[str, int], PaymentCell]
    prices: tuple[float, ...]
    unit_totals: dict[str, PaymentCell]
    total_inertia_payments: float
    negative_profit_units: int
    positive_profit_units: int
    n_sg_units: int

    def unit_total_profit(self, unit_id: str) -> float:
        cell = self.unit_totals.get(unit_id)
        return cell.total_profit if cell else 0.0


def sg_marginal_inertia_cost(
    duals: DualSet,
    solution: "UcSolution",
    extra_units: frozenset[tuple[str, int]],
    scenario: Scenario,
    hour: int,
    startup_every_hour: bool = False,
) -> float:
    """Per-MW-s^2 cost of the dearest generator online purely for inertia.

    Combines the hour's energy-market loss with the start-up cost charged
    at the start-up hour (``startup_every_hour`` charges it at every
    committed hour instead), divided by the unit's rotor inertia. Zero when
    no such generator is committed this hour.
    """
    worst = 0.0
    for g in scenario.generators:
        key = (g.id, hour)
        if key not in extra_units or not solution.commitment.get(key):
            continue
        if g.rotor_inertia <= _TOL:
            raise ValueError(f"unit {g.id} is committed with zero rotor inertia")
        loss = max(g.fuel_cost - duals.mu[hour - 1], 0.0) * solution.dispatch[key]
        charge = solution.commitment[key] if startup_every_hour else solution.startup[key]
        worst = max(worst, (loss + g.startup_cost * charge) / g.rotor_inertia)
    return worst


def ex_post_price(
    duals: DualSet,
    solution: "UcSolution",
    extra_units: frozenset[tuple[str, int]],
    scenario: Scenario,
    startup_every_hour: bool = False,
) -> tuple[float, ...]:
    """Hourly inertia price: max of the RoCoF dual and the SG marginal cost."""
    return tuple(
        max(
            duals.lambda_h[t - 1],
            sg_marginal_inertia_cost(
                duals, solution, extra_units, scenario, t, startup_every_hour
            ),
        )
        for t in range(1, scenario.horizon + 1)
    )


def _pool_scales(scenario: Scenario, vi_participating: bool) -> tuple[float, float]:
    if not vi_participating or not scenario.vi_units:
        return 1.0, 1.0
    total = scenario.sg_capacity + scenario.vi_capacity
    return scenario.sg_capacity / total, scenario.vi_capacity / total


def inertia_payments(
    prices: tuple[float, ...],
    solution: "UcSolution",
    scenario: Scenario,
    quantities: dict[tuple[str, int], float] | None = None,
) -> dict[tuple[str, int], float]:
    """Pay each provider the hourly price times its inertia quantity.

    ``quantities`` defaults to the full scheduled inertia of every unit
    (rotor inertia for committed generators, delivered synthetic inertia
    for VI units); the utility scheme passes the procured amounts instead.
    Quantities are scaled by the capacity share of the provider's pool when
    both pools participate; with no VI the generator scale is 1.
    """
    if quantities is None:
        quantities = dict(solution.unit_inertia)
    sg_scale, vi_scale = _pool_scales(
        scenario, solution.variant.vi_enabled and bool(scenario.vi_units)
    )
    sg_ids = {g.id for g in scenario.generators}
    out: dict[tuple[str, int], float] = {}
    for (uid, t), qty in quantities.items():
        if qty <= _TOL:
            continue
        scale = sg_scale if uid in sg_ids else vi_scale
        pay = prices[t - 1] * qty * scale
        if pay != 0.0:
            out[(uid, t)] = pay
    return out


def utility_of_inertia(
    cost_with_fc: float, cost_without_fc: float, h_dem: float
) -> float:
    """Willingness to pay per MW s^2: cost gap over the inertia demand."""
    if h_dem <= 0:
        raise ValueError("inertia demand must be > 0")
    if cost_with_fc < cost_without_fc - 1e-6:
        raise ValueError("frequency-constrained cost cannot be below the base cost")
    return (cost_with_fc - cost_without_fc) / h_dem


@dataclass(frozen=True)
class UtilityPricing:
    """Utility-scheme output: prices, procurement and diagnostics."""

    prices: tuple[float, ...]  # policy-adjusted, EUR/(MW s^2)
    raw_prices: tuple[float, ...]
    procured: dict[tuple[str, int], float]  # MW s^2 bought from each provider
    u_value: float
    negative_hours: tuple[int, ...]


def utility_method_prices(
    scenario: Scenario,
    two_step: "TwoStepResult",
    u_value: float | None = None,
    negative_dual_policy: str = "passthrough",
    solver: Solver | None = None,
) -> UtilityPricing:
    """Price inertia at the operator's utility via a procurement re-solve.

    The energy-only schedule supplies its inertia for free; the gap to the
    hourly requirement must be bought from generators committed solely for
    inertia and from VI units. Crediting every bought MW s^2 at ``u_value``
    and holding the purchase to the exact gap makes the gap constraint's
    dual the inertia price: ``u_value`` when a generator is marginal,
    ``u_value - bid`` when a VI unit is. Payments for this scheme cover the
    procured quantities, not full rotor inertia.

    ``u_value`` defaults to the cost gap between the frequency-constrained
    run without VI and the energy-only run, divided by the summed hourly
    inertia gap. Negative prices (bids above the utility) are passed
    through with a warning, clamped to zero, or pinned to ``u_value``
    according to ``negative_dual_policy``.
    """
    from . import uc  # deferred: uc imports this module for DualSet

    if negative_dual_policy not in NEGATIVE_DUAL_POLICIES:
        raise ValueError(f"unknown negative-dual policy {negative_dual_policy!r}")
    solver = solver or default_solver()
    step1, step2 = two_step.step1, two_step.step2
    T = scenario.horizon

    if u_value is None:
        u_value = default_utility_value(scenario, two_step, solver)
    if u_value < 0:
        raise ValueError("utility value must be >= 0")

    vi_active = step2.variant.vi_enabled and bool(scenario.vi_units)
    reqs = uc.requirement_mws(scenario, vi_active)
    cap = uc.formulation_capacity(scenario, vi_active)

    # Inertia the energy market would have scheduled anyway: the step-1
    # aggregate. The gap beyond it is always coverable by the additionally
    # committed rotors plus VI, even when stage 2 reshuffles units.
    shortfall = [
        max(0.0, reqs[t - 1] - step1.system_inertia[t - 1] * cap)
        for t in range(1, T + 1)
    ]

    model = LinearModel("utility-procurement")
    hours = [t for t in range(1, T + 1) if shortfall[t - 1] > 1e-7]
    for t in hours:
        row: dict[str, float] = {}
        for g in scenario.generators:
            key = (g.id, t)
            if key in two_step.extra_units and step2.commitment.get(key):
                name = f"eta[{g.id},{t}]"
                model.add_variable(name, 0.0, g.rotor_inertia, cost=-u_value)
                row[name] = 1.0
        if vi_active:
            for v in scenario.vi_units:
                # Floor at zero even when the unit has a forced minimum
                # allocation: the row accounts for gap purchases only.
                name = f"hv[{v.id},{t}]"
                model.add_variable(
                    name, 0.0, v.max_inertia, cost=v.bid_cost - u_value
                )
                row[name] = 1.0
        model.add_constraint(row, "=", shortfall[t - 1], f"procure[{t}]")

    solved = solver.solve_lp(model)
    if not solved.is_optimal:
        raise RuntimeError(f"utility procurement LP is {solved.status}")

    raw = []
    procured: dict[tuple[str, int], float] = {}
    for t in range(1, T + 1):
        raw.append(-solved.duals[f"procure[{t}]"] if t in hours else 0.0)
    for name, val in solved.values.items():
        if val <= _TOL:
            continue
        kind, rest = name.split("[", 1)
        uid, t = rest.rstrip("]").rsplit(",", 1)
        procured[(uid, int(t))] = val

    negative = tuple(t for t in range(1, T + 1) if raw[t - 1] < -_TOL)
    prices = list(raw)
    if negative:
        if negative_dual_policy == "passthrough":
            warnings.warn(
                "negative inertia prices at hour(s) "
                + ", ".join(map(str, negative))
                + "; passing through",
                stacklevel=2,
            )
        elif negative_dual_policy == "clamp":
            prices = [max(0.0, p) for p in prices]
        else:  # fix-utility
            prices = [u_value if p < -_TOL else p for p in prices]

    return UtilityPricing(
        prices=tuple(prices),
        raw_prices=tuple(raw),
        procured=procured,
        u_value=u_value,
        negative_hours=negative,
    )


def default_utility_value(
    scenario: Scenario, two_step: "TwoStepResult", solver: Solver | None = None
) -> float:
    """Cost gap of meeting the requirement without VI over the summed gap."""
    from . import uc

    solver = solver or default_solver()
    step1, step2 = two_step.step1, two_step.step2
    if step2.variant.vi_enabled and scenario.vi_units:
        no_vi = uc.solve_variant(
            scenario,
            uc.UcVariant(frequency_constrained=True, vi_enabled=False),
            solver,
        )
        cost_with_fc = no_vi.objective
    else:
        cost_with_fc = step2.objective
    h_dem = uc.total_inertia_shortfall(scenario, step1)
    if h_dem <= 0:
        return 0.0
    return utility_of_inertia(cost_with_fc, step1.objective, h_dem)


def uplift_payments(
    solution: "UcSolution",
    duals: DualSet,
    scenario: Scenario,
    include_max_gen_term: bool = False,
) -> dict[tuple[str, int], float]:
    """Make-whole payments: start-up outlays plus minimum-generation losses.

    Generators receive ``C_su * y + nu_lower * p_min`` at every committed
    hour (``include_max_gen_term`` restores the ``- nu_upper * p_max``
    term). VI units are cleared at the RoCoF dual times their delivered
    inertia.
    """
    out: dict[tuple[str, int], float] = {}
    for g in scenario.generators:
        for t in range(1, scenario.horizon + 1):
            key = (g.id, t)
            if not solution.commitment.get(key):
                continue
            pay = g.startup_cost * solution.startup[key]
            pay += duals.nu_lower.get(key, 0.0) * g.p_min
            if include_max_gen_term:
                pay -= duals.nu_upper.get(key, 0.0) * g.p_max
            if pay != 0.0:
                out[key] = pay
    for v in scenario.vi_units:
        for t in range(1, scenario.horizon + 1):
            key = (v.id, t)
            hv = solution.unit_inertia.get(key, 0.0)
            if hv > _TOL:
                pay = duals.lambda_h[t - 1] * hv
                if pay != 0.0:
                    out[key] = pay
    return out


def profit_report(
    solution: "UcSolution",
    duals: DualSet,
    payments: dict[tuple[str, int], float],
    scenario: Scenario,
    prices: tuple[float, ...],
    method: str = "",
) -> PaymentReport:
    """Assemble the per unit-hour ledger and the profit sign counts.

    Generator rows: energy margin at the hourly price, start-up outlay, and
    the scheme's inertia payment. VI rows book the provision cost (bid times
    delivered inertia) as a negative energy column so each row still sums as
    ``eom - startup + payment``.
    """
    cells: dict[tuple[str, int], PaymentCell] = {}
    for g in scenario.generators:
        for t in range(1, scenario.horizon + 1):
            key = (g.id, t)
            if not solution.commitment.get(key):
                continue
            eom = (duals.mu[t - 1] - g.fuel_cost) * solution.dispatch[key]
            su = g.startup_cost * solution.startup[key]
            cells[key] = PaymentCell(eom, su, payments.get(key, 0.0))
    for v in scenario.vi_units:
        for t in range(1, scenario.horizon + 1):
            key = (v.id, t)
            hv = solution.unit_inertia.get(key, 0.0)
            pay = payments.get(key, 0.0)
            if hv > _TOL or pay != 0.0:
                cells[key] = PaymentCell(-v.bid_cost * hv, 0.0, pay)

    unit_totals: dict[str, PaymentCell] = {}
    for (uid, _), cell in cells.items():
        prev = unit_totals.get(uid, PaymentCell(0.0, 0.0, 0.0))
        unit_totals[uid] = PaymentCell(
            prev.eom_profit + cell.eom_profit,
            prev.startup_cost + cell.startup_cost,
            prev.inertia_payment + cell.inertia_payment,
        )

    sg_ids = [g.id for g in scenario.generators]
    committed_sgs = [uid for uid in sg_ids if uid in unit_totals]
    negative = sum(
        1 for uid in committed_sgs if unit_totals[uid].total_profit < -_PROFIT_EPS
    )
    positive = sum(
        1 for uid in committed_sgs if unit_totals[uid].total_profit > _PROFIT_EPS
    )

    return PaymentReport(
        method=method,
        cells=cells,
        prices=tuple(prices),
        unit_totals=unit_totals,
        total_inertia_payments=sum(payments.values()),
        negative_profit_units=negative,
        positive_profit_units=positive,
        n_sg_units=len(committed_sgs),
    )
