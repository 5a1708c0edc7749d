"""Unit-commitment variants and the two-step commitment pipeline.

``build`` turns a scenario into a mixed-integer model for any of the
supported variants: plain energy-only commitment, RoCoF-constrained
commitment with or without virtual inertia, the slack-inertia study
variant, the continuous-inertia relaxation used for pricing, and an
optional utility credit on scheduled inertia.

``two_step_pipeline`` runs the energy-only commitment first, the
frequency-constrained one second, and re-solves the second stage as a
restricted LP (binaries fixed at the stage-2 optimum, inertia shares
relaxed to continuous) to obtain the dual prices every payment scheme
consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .freq import min_inertia_for_rocof
from .model import Scenario, ScenarioError, validate
from .optimizer import LinearModel, Solution, Solver, default_solver, fix_binaries
from .pricing import DualSet


class UcInfeasibleError(RuntimeError):
    """Commitment problem has no feasible schedule.

    ``violating_hours`` lists 1-based hours whose inertia requirement
    exceeds what the full fleet can supply; empty when the infeasibility
    comes from the energy balance instead.
    """

    def __init__(self, message: str, violating_hours: list[int] | None = None):
        super().__init__(message)
        self.violating_hours = violating_hours or []


@dataclass(frozen=True)
class UcVariant:
    """Switches selecting which commitment formulation ``build`` emits.

    ``slack_inertia`` (a cost in EUR per MW s^2) buys fictitious inertia in
    the RoCoF constraint and excludes virtual inertia, which later replaces
    the slack. ``utility_term`` credits every scheduled MW s^2 of inertia
    in the objective at the given rate. ``continuous_k`` relaxes the
    all-or-nothing inertia share of committed generators to an upper bound
    so the RoCoF row can carry a dual in restricted LP re-solves.
    """

    frequency_constrained: bool = True
    vi_enabled: bool = False
    slack_inertia: float | None = None  # EUR/(MW s^2)
    continuous_k: bool = False
    utility_term: float | None = None  # EUR/(MW s^2)

    def check(self) -> None:
        if self.slack_inertia is not None and self.vi_enabled:
            raise ValueError(
                "slack inertia and virtual inertia are mutually exclusive"
            )
        if self.slack_inertia is not None and self.slack_inertia < 0:
            raise ValueError("slack inertia cost must be >= 0")
        if self.utility_term is not None and self.utility_term < 0:
            raise ValueError("utility term must be >= 0")


@dataclass(frozen=True)
class UcSolution:
    """Commitment, dispatch and inertia schedule of one solved variant."""

    variant: UcVariant
    pu_base: float
    objective: float
    commitment: dict[tuple[str, int], int]
    startup: dict[tuple[str, int], int]
    dispatch: dict[tuple[str, int], float]
    vi_power: dict[tuple[str, int], float]
    k_sg: dict[tuple[str, int], float]
    k_vi: dict[tuple[str, int], float]
    unit_inertia: dict[tuple[str, int], float]  # h for SGs and VI units, MW s^2
    system_inertia: tuple[float, ...]  # M_t, s on pu_base
    sg_inertia: tuple[float, ...]
    vi_inertia: tuple[float, ...]
    slack: tuple[float, ...]  # M+_t, s on pu_base
    startup_cost_total: float
    energy_cost_total: float
    vi_cost_total: float
    slack_cost_total: float

    def committed_hours(self, unit_id: str) -> list[int]:
        return sorted(t for (g, t), on in self.commitment.items() if g == unit_id and on)


@dataclass(frozen=True)
class TwoStepResult:
    """Outcome of the two-step commitment with restricted-LP duals."""

    step1: UcSolution
    step2: UcSolution
    extra_units: frozenset[tuple[str, int]]  # committed in step 2 but not step 1
    restricted_duals: DualSet
    restricted_objective: float

    def extra_unit_ids(self) -> list[str]:
        return sorted({g for g, _ in self.extra_units})


def build(scenario: Scenario, variant: UcVariant) -> LinearModel:
    """Emit the selected commitment formulation as a linear model."""
    violations = validate(scenario)
    if violations:
        raise ScenarioError(violations)
    variant.check()

    T = scenario.horizon
    gens = scenario.generators
    vis = scenario.vi_units if variant.vi_enabled else ()
    sg_cap = scenario.sg_capacity
    vi_cap = sum(v.p_max for v in vis)
    base = scenario.pu_base(variant.vi_enabled and bool(vis))
    cap_form = sg_cap + vi_cap if (variant.vi_enabled and vis) else sg_cap
    net = scenario.net_load()
    grid = scenario.grid
    rocof_coef = grid.rocof_limit / grid.f0

    m = LinearModel(f"uc:{scenario.name}")

    # Quantities fixed by a defining equality (k in equality mode, h, M
    # aggregates) are declared free: their nonnegativity is implied by the
    # definitions, and dropping the redundant bound spares the simplex a
    # lot of degenerate pivots. The continuous-k relaxation keeps the
    # explicit lower bound, which is load-bearing there.
    ninf = -math.inf
    k_lower = 0.0 if variant.continuous_k else ninf
    for g in gens:
        for t in range(1, T + 1):
            m.add_variable(f"u[{g.id},{t}]", 0.0, 1.0, integral=True, branch_priority=1)
            m.add_variable(
                f"y[{g.id},{t}]", 0.0, 1.0, integral=True, cost=g.startup_cost
            )
            m.add_variable(f"p[{g.id},{t}]", 0.0, math.inf, cost=g.fuel_cost)
            m.add_variable(f"k[{g.id},{t}]", k_lower, math.inf)
    # Slack and utility rates are per MW s^2; the aggregate inertia
    # variables are normalized on the formulation capacity.
    for t in range(1, T + 1):
        m.add_variable(f"M[{t}]", ninf, math.inf)
        if variant.utility_term is not None:
            m.add_cost(f"M[{t}]", -variant.utility_term * cap_form)
        if variant.slack_inertia is not None:
            m.add_variable(
                f"Mplus[{t}]", 0.0, math.inf, cost=variant.slack_inertia * cap_form
            )
    for v in vis:
        for t in range(1, T + 1):
            m.add_variable(f"pv[{v.id},{t}]", v.p_min, v.p_max)
            m.add_variable(f"kv[{v.id},{t}]", ninf, math.inf)
            m.add_variable(f"hv[{v.id},{t}]", ninf, math.inf, cost=v.bid_cost)
    if variant.vi_enabled and vis:
        for g in gens:
            for t in range(1, T + 1):
                m.add_variable(f"h[{g.id},{t}]", ninf, math.inf)
        for t in range(1, T + 1):
            m.add_variable(f"Msg[{t}]", ninf, math.inf)
            m.add_variable(f"Mvi[{t}]", ninf, math.inf)

    # Energy balance, single bus: committed output covers load net of wind.
    for t in range(1, T + 1):
        m.add_constraint(
            {f"p[{g.id},{t}]": 1.0 for g in gens}, "=", net[t - 1], f"balance[{t}]"
        )

    for g in gens:
        for t in range(1, T + 1):
            prev = f"u[{g.id},{t - 1}]" if t > 1 else None  # cold start before hour 1

            tau1 = min(t + g.min_up - 1, T)
            if tau1 > t:
                coeffs = {f"u[{g.id},{t}]": 1.0, f"u[{g.id},{tau1}]": -1.0}
                if prev:
                    coeffs[prev] = -1.0
                m.add_constraint(coeffs, "<=", 0.0, f"minup[{g.id},{t}]")

            tau0 = min(t + g.min_down - 1, T)
            if tau0 > t and prev:
                m.add_constraint(
                    {prev: 1.0, f"u[{g.id},{t}]": -1.0, f"u[{g.id},{tau0}]": 1.0},
                    "<=",
                    1.0,
                    f"mindown[{g.id},{t}]",
                )

            coeffs = {f"u[{g.id},{t}]": 1.0, f"y[{g.id},{t}]": -1.0}
            if prev:
                coeffs[prev] = -1.0
            m.add_constraint(coeffs, "<=", 0.0, f"startup[{g.id},{t}]")

            m.add_constraint(
                {f"p[{g.id},{t}]": 1.0, f"u[{g.id},{t}]": -g.p_min},
                ">=",
                0.0,
                f"pmin[{g.id},{t}]",
            )
            m.add_constraint(
                {f"p[{g.id},{t}]": 1.0, f"u[{g.id},{t}]": -g.p_max},
                "<=",
                0.0,
                f"pmax[{g.id},{t}]",
            )

            # Inertia share of the committed unit: capacity fraction when
            # online, relaxed to an upper bound in pricing re-solves.
            share = g.p_max / sg_cap
            relation = "<=" if variant.continuous_k else "="
            m.add_constraint(
                {f"k[{g.id},{t}]": 1.0, f"u[{g.id},{t}]": -share},
                relation,
                0.0,
                f"kdef[{g.id},{t}]",
            )

    if variant.vi_enabled and vis:
        for t in range(1, T + 1):
            for g in gens:
                m.add_constraint(
                    {f"h[{g.id},{t}]": 1.0, f"u[{g.id},{t}]": -g.rotor_inertia},
                    "=",
                    0.0,
                    f"hdef[{g.id},{t}]",
                )
            for v in vis:
                m.add_constraint(
                    {f"kv[{v.id},{t}]": 1.0, f"pv[{v.id},{t}]": -1.0 / vi_cap},
                    "=",
                    0.0,
                    f"kvdef[{v.id},{t}]",
                )
                m.add_constraint(
                    {
                        f"hv[{v.id},{t}]": 1.0,
                        f"pv[{v.id},{t}]": -2.0 * v.inertia_const,
                    },
                    "=",
                    0.0,
                    f"hvdef[{v.id},{t}]",
                )
            m.add_constraint(
                {f"Msg[{t}]": 1.0}
                | {f"k[{g.id},{t}]": -2.0 * g.inertia_const for g in gens},
                "=",
                0.0,
                f"msgdef[{t}]",
            )
            m.add_constraint(
                {f"Mvi[{t}]": 1.0}
                | {f"kv[{v.id},{t}]": -2.0 * v.inertia_const for v in vis},
                "=",
                0.0,
                f"mvidef[{t}]",
            )
            # System inertia is the capacity-weighted average of both pools.
            total_cap = sg_cap + vi_cap
            m.add_constraint(
                {
                    f"M[{t}]": 1.0,
                    f"Msg[{t}]": -sg_cap / total_cap,
                    f"Mvi[{t}]": -vi_cap / total_cap,
                },
                "=",
                0.0,
                f"mdef[{t}]",
            )
    else:
        for t in range(1, T + 1):
            m.add_constraint(
                {f"M[{t}]": 1.0}
                | {f"k[{g.id},{t}]": -2.0 * g.inertia_const for g in gens},
                "=",
                0.0,
                f"mdef[{t}]",
            )

    if variant.frequency_constrained:
        # The disturbance is per unit on `base`; the aggregate inertia is
        # normalized on the formulation capacity. They coincide unless the
        # scenario pins an explicit base, in which case the requirement is
        # rescaled so the physical MW s^2 demand stays put.
        dp_scale = base / cap_form
        for t in range(1, T + 1):
            dp = scenario.disturbance[t - 1] * dp_scale
            coeffs = {f"M[{t}]": rocof_coef}
            if variant.slack_inertia is not None:
                coeffs[f"Mplus[{t}]"] = rocof_coef
            m.add_constraint(dict(coeffs), ">=", dp, f"rocof_lo[{t}]")
            m.add_constraint(dict(coeffs), ">=", -dp, f"rocof_hi[{t}]")

    return m


def extract_solution(
    scenario: Scenario, variant: UcVariant, solved: Solution
) -> UcSolution:
    """Read a solver result back into domain terms."""
    if not solved.is_optimal:
        raise ValueError(f"cannot extract from a {solved.status} solution")
    T = scenario.horizon
    vis = scenario.vi_units if variant.vi_enabled else ()
    vals = solved.values

    commitment, startup, dispatch, k_sg = {}, {}, {}, {}
    unit_inertia: dict[tuple[str, int], float] = {}
    su_total = 0.0
    energy_total = 0.0
    for g in scenario.generators:
        for t in range(1, T + 1):
            u = int(round(vals[f"u[{g.id},{t}]"]))
            y = int(round(vals[f"y[{g.id},{t}]"]))
            p = vals[f"p[{g.id},{t}]"]
            commitment[(g.id, t)] = u
            startup[(g.id, t)] = y
            dispatch[(g.id, t)] = p
            k_sg[(g.id, t)] = vals[f"k[{g.id},{t}]"]
            unit_inertia[(g.id, t)] = g.rotor_inertia * u
            su_total += g.startup_cost * y
            energy_total += g.fuel_cost * p

    vi_power, k_vi = {}, {}
    vi_total = 0.0
    for v in vis:
        for t in range(1, T + 1):
            pv = vals[f"pv[{v.id},{t}]"]
            hv = vals[f"hv[{v.id},{t}]"]
            vi_power[(v.id, t)] = pv
            k_vi[(v.id, t)] = vals[f"kv[{v.id},{t}]"]
            unit_inertia[(v.id, t)] = hv
            vi_total += v.bid_cost * hv

    system = tuple(vals[f"M[{t}]"] for t in range(1, T + 1))
    if variant.vi_enabled and vis:
        sg_inertia = tuple(vals[f"Msg[{t}]"] for t in range(1, T + 1))
        vi_inertia = tuple(vals[f"Mvi[{t}]"] for t in range(1, T + 1))
    else:
        sg_inertia = system
        vi_inertia = tuple(0.0 for _ in range(T))

    if variant.slack_inertia is not None:
        slack = tuple(vals[f"Mplus[{t}]"] for t in range(1, T + 1))
    else:
        slack = tuple(0.0 for _ in range(T))
    base = scenario.pu_base(variant.vi_enabled and bool(vis))
    cap_form = formulation_capacity(scenario, variant.vi_enabled and bool(vis))
    slack_cost = (
        sum(slack) * cap_form * variant.slack_inertia
        if variant.slack_inertia is not None
        else 0.0
    )

    return UcSolution(
        variant=variant,
        pu_base=base,
        objective=float(solved.objective_value),
        commitment=commitment,
        startup=startup,
        dispatch=dispatch,
        vi_power=vi_power,
        k_sg=k_sg,
        k_vi=k_vi,
        unit_inertia=unit_inertia,
        system_inertia=system,
        sg_inertia=sg_inertia,
        vi_inertia=vi_inertia,
        slack=slack,
        startup_cost_total=su_total,
        energy_cost_total=energy_total,
        vi_cost_total=vi_total,
        slack_cost_total=slack_cost,
    )


def rocof_requirements(scenario: Scenario) -> list[float]:
    """Minimum aggregate inertia per hour, in seconds on the active base."""
    g = scenario.grid
    return [
        min_inertia_for_rocof(dp, g.f0, g.rocof_limit) for dp in scenario.disturbance
    ]


def fleet_inertia_mws(scenario: Scenario, vi_enabled: bool) -> float:
    """Total MW s^2 with the whole fleet online and VI at full power."""
    mass = sum(g.rotor_inertia for g in scenario.generators)
    if vi_enabled and scenario.vi_units:
        mass += sum(v.max_inertia for v in scenario.vi_units)
    return mass


def formulation_capacity(scenario: Scenario, vi_enabled: bool) -> float:
    """MW base the aggregate inertia variable is normalized on."""
    cap = scenario.sg_capacity
    if vi_enabled and scenario.vi_units:
        cap += scenario.vi_capacity
    return cap


def requirement_mws(scenario: Scenario, vi_enabled: bool) -> list[float]:
    """Hourly inertia requirement in MW s^2 on the disturbance base."""
    base = scenario.pu_base(vi_enabled and bool(scenario.vi_units))
    return [req * base for req in rocof_requirements(scenario)]


def solve_variant(
    scenario: Scenario, variant: UcVariant, solver: Solver | None = None
) -> UcSolution:
    """Build and solve one variant to optimality."""
    solver = solver or default_solver()
    model = build(scenario, variant)
    _pin_essential_units(model, scenario, variant)
    solved = solver.solve_milp(model)
    if solved.status != "optimal":
        raise _infeasibility(scenario, variant, solved.status)
    return extract_solution(scenario, variant, solved)


def _pin_essential_units(
    model: LinearModel, scenario: Scenario, variant: UcVariant
) -> None:
    """Presolve reductions that keep at least one optimum intact.

    Unit pinning is valid only when the RoCoF requirement is hard (no slack
    variable): a unit whose absence makes an hour infeasible must be on.
    """
    if not variant.frequency_constrained:
        # Without a RoCoF requirement virtual inertia is pure cost: pin the
        # battery allocation to its floor so the search tree ignores it.
        if variant.vi_enabled:
            for v in scenario.vi_units:
                for t in range(1, scenario.horizon + 1):
                    model.variable(f"pv[{v.id},{t}]").upper = v.p_min
        return
    if variant.slack_inertia is not None:
        return
    fleet = fleet_inertia_mws(scenario, variant.vi_enabled)
    for t, req in enumerate(requirement_mws(scenario, variant.vi_enabled), start=1):
        for g in scenario.generators:
            if fleet - g.rotor_inertia < req - 1e-9:
                model.variable(f"u[{g.id},{t}]").lower = 1.0


def _infeasibility(
    scenario: Scenario, variant: UcVariant, status: str
) -> UcInfeasibleError:
    if variant.frequency_constrained and variant.slack_inertia is None:
        fleet = fleet_inertia_mws(scenario, variant.vi_enabled)
        hours = [
            t + 1
            for t, req in enumerate(requirement_mws(scenario, variant.vi_enabled))
            if req > fleet + 1e-6
        ]
        if hours:
            return UcInfeasibleError(
                "inertia requirement exceeds the full fleet at hour(s) "
                + ", ".join(map(str, hours)),
                hours,
            )
    return UcInfeasibleError(f"commitment problem is {status}")


def two_step_pipeline(
    scenario: Scenario, variant: UcVariant, solver: Solver | None = None
) -> TwoStepResult:
    """Energy-only commitment, frequency-constrained commitment, then the
    restricted LP re-solve that yields the pricing duals."""
    if not variant.frequency_constrained:
        raise ValueError("two-step pipeline needs a frequency-constrained variant")
    solver = solver or default_solver()

    step1_variant = replace(
        variant, frequency_constrained=False, slack_inertia=None, utility_term=None
    )
    step1 = solve_variant(scenario, step1_variant, solver)
    step2 = solve_variant(scenario, variant, solver)

    extra = frozenset(
        key
        for key, on in step2.commitment.items()
        if on and not step1.commitment.get(key, 0)
    )

    assignment = _binary_assignment(step2)
    relaxed = fix_binaries(
        build(scenario, replace(variant, continuous_k=True)), assignment
    )
    relaxed_solved = solver.solve_lp(relaxed)
    if not relaxed_solved.is_optimal:
        raise UcInfeasibleError("restricted pricing LP did not solve")
    duals = extract_duals(scenario, variant, relaxed_solved)

    plain = fix_binaries(build(scenario, variant), assignment)
    plain_solved = solver.solve_lp(plain)
    if not plain_solved.is_optimal:
        raise UcInfeasibleError("restricted LP did not solve")

    return TwoStepResult(
        step1=step1,
        step2=step2,
        extra_units=extra,
        restricted_duals=duals,
        restricted_objective=float(plain_solved.objective_value),
    )


def _binary_assignment(solution: UcSolution) -> dict[str, float]:
    assignment: dict[str, float] = {}
    for (g, t), u in solution.commitment.items():
        assignment[f"u[{g},{t}]"] = float(u)
    for (g, t), y in solution.startup.items():
        assignment[f"y[{g},{t}]"] = float(y)
    return assignment


def extract_duals(
    scenario: Scenario, variant: UcVariant, solved: Solution
) -> DualSet:
    """Pull the market-relevant duals out of a restricted LP solution.

    The RoCoF row dual (per unit of row right-hand side) is converted into
    a price per MW s^2 of provided inertia: the row scales the aggregate
    inertia variable, which is normalized on the formulation capacity.
    """
    T = scenario.horizon
    cap = formulation_capacity(scenario, variant.vi_enabled and bool(scenario.vi_units))
    coef = scenario.grid.rocof_limit / scenario.grid.f0

    mu = tuple(solved.duals[f"balance[{t}]"] for t in range(1, T + 1))
    lam = []
    for t in range(1, T + 1):
        raw = solved.duals.get(f"rocof_lo[{t}]", 0.0) + solved.duals.get(
            f"rocof_hi[{t}]", 0.0
        )
        lam.append(raw * coef / cap)
    nu_upper: dict[tuple[str, int], float] = {}
    nu_lower: dict[tuple[str, int], float] = {}
    for g in scenario.generators:
        for t in range(1, T + 1):
            nu_lower[(g.id, t)] = max(0.0, solved.duals[f"pmin[{g.id},{t}]"])
            nu_upper[(g.id, t)] = max(0.0, -solved.duals[f"pmax[{g.id},{t}]"])
    return DualSet(
        mu=mu, lambda_h=tuple(lam), nu_upper=nu_upper, nu_lower=nu_lower
    )


def hourly_inertia_shortfall(scenario: Scenario, step1: UcSolution) -> list[float]:
    """Per-hour inertia gap of the energy-only schedule, in MW s^2.

    The physical requirement (on the disturbance base) minus the scheduled
    MW s^2; hours already satisfied contribute 0.
    """
    vi = step1.variant.vi_enabled and bool(scenario.vi_units)
    cap = formulation_capacity(scenario, vi)
    reqs = requirement_mws(scenario, vi)
    return [
        max(0.0, req - m * cap)
        for req, m in zip(reqs, step1.system_inertia)
    ]


def inertia_shortfall(scenario: Scenario, step1: UcSolution) -> float:
    """Largest hourly inertia gap after the energy-only run, in MW s^2."""
    hourly = hourly_inertia_shortfall(scenario, step1)
    return max(hourly) if hourly else 0.0


def total_inertia_shortfall(scenario: Scenario, step1: UcSolution) -> float:
    """Summed hourly inertia gap, in MW s^2; the utility-pricing demand."""
    return sum(hourly_inertia_shortfall(scenario, step1))
