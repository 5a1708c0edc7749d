"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The large-system golden numbers need the external demand/wind
dataset and stay skipped until ``INERTIAMARKET_RTS_DATA`` points at a
scenario file carrying real profiles.
"""

import contextlib
import os

import pytest

from inertiamarket import analysis, pricing, uc
from inertiamarket.optimizer import fix_binaries, solve_lp, solve_milp
from inertiamarket.scenario_io import load_scenario

import oracles

EUR_TOL = 0.01
HOURS = range(1, 9)


@contextlib.contextmanager
def criterion(number, description):
    try:
        yield
    except Exception:
        print(f"criterion {number}: FAIL - {description}")
        raise
    print(f"criterion {number}: PASS - {description}")


def _assignment(solution):
    out = {}
    for (g, t), u in solution.commitment.items():
        out[f"u[{g},{t}]"] = float(u)
    for (g, t), y in solution.startup.items():
        out[f"y[{g},{t}]"] = float(y)
    return out


def test_criterion_1_energy_only_run(small, pipeline):
    with criterion(1, "energy-only cost 3360, only G1 online, energy price 10"):
        step1 = pipeline.step1
        assert step1.objective == pytest.approx(3360.00, abs=EUR_TOL)
        assert step1.committed_hours("G1") == list(HOURS)
        assert step1.committed_hours("G2") == []
        assert step1.committed_hours("G3") == []
        restricted = fix_binaries(
            uc.build(small, uc.UcVariant(frequency_constrained=False)),
            _assignment(step1),
        )
        solved = solve_lp(restricted)
        duals = uc.extract_duals(
            small, uc.UcVariant(frequency_constrained=False), solved
        )
        assert duals.mu == pytest.approx((10.0,) * 8, abs=1e-6)


def test_criterion_2_frequency_constrained_run(small, pipeline):
    with criterion(2, "RoCoF requirement adds 590, G3 hours 4-6, G2 hours 5-7"):
        assert pipeline.step2.objective - pipeline.step1.objective == pytest.approx(
            590.00, abs=EUR_TOL
        )
        assert pipeline.step2.committed_hours("G3") == [4, 5, 6]
        assert pipeline.step2.committed_hours("G2") == [5, 6, 7]
        bare = pricing.profit_report(
            pipeline.step2, pipeline.restricted_duals, {}, small, (0.0,) * 8
        )
        assert bare.unit_total_profit("G2") == pytest.approx(-360.0, abs=EUR_TOL)
        assert bare.unit_total_profit("G3") == pytest.approx(-230.0, abs=EUR_TOL)


def test_criterion_3_ex_post_scheme(small, pipeline):
    with criterion(3, "ex-post: price 0.328125 at hour 4, G2 made exactly whole"):
        prices = pricing.ex_post_price(
            pipeline.restricted_duals, pipeline.step2, pipeline.extra_units, small
        )
        assert prices[3] == pytest.approx(0.328125, abs=1e-9)
        payments = pricing.inertia_payments(prices, pipeline.step2, small)
        assert payments[("G3", 4)] == pytest.approx(210.0, abs=EUR_TOL)
        assert [payments.get(("G2", t), 0.0) for t in (5, 6, 7)] == pytest.approx(
            [320.0, 20.0, 20.0], abs=EUR_TOL
        )
        report = pricing.profit_report(
            pipeline.step2, pipeline.restricted_duals, payments, small, prices
        )
        assert report.unit_total_profit("G2") == pytest.approx(0.0, abs=EUR_TOL)
        # Hours 5-6 for G3 follow the normative payment rule rather than the
        # two unexplained cells; its block profit must still be non-negative.
        assert report.unit_total_profit("G3") >= -EUR_TOL


def test_criterion_4_utility_scheme(small, pipeline):
    with criterion(4, "utility: payments total 590.00, block profits cancel"):
        up = pricing.utility_method_prices(small, pipeline)
        payments = pricing.inertia_payments(
            up.prices, pipeline.step2, small, quantities=up.procured
        )
        assert sum(payments.values()) == pytest.approx(590.00, abs=EUR_TOL)
        report = pricing.profit_report(
            pipeline.step2, pipeline.restricted_duals, payments, small, up.prices
        )
        combined = report.unit_total_profit("G2") + report.unit_total_profit("G3")
        assert combined == pytest.approx(0.0, abs=0.5)


def test_criterion_5_uplift_scheme(small, pipeline):
    with criterion(5, "uplift: totals 360/230, both units end at zero profit"):
        payments = pricing.uplift_payments(
            pipeline.step2, pipeline.restricted_duals, small
        )
        g2 = sum(v for (u, _), v in payments.items() if u == "G2")
        g3 = sum(v for (u, _), v in payments.items() if u == "G3")
        assert g2 == pytest.approx(360.0, abs=1e-6)
        assert g3 == pytest.approx(230.0, abs=1e-6)
        report = pricing.profit_report(
            pipeline.step2,
            pipeline.restricted_duals,
            payments,
            small,
            pipeline.restricted_duals.lambda_h,
        )
        assert report.unit_total_profit("G2") == pytest.approx(0.0, abs=1e-6)
        assert report.unit_total_profit("G3") == pytest.approx(0.0, abs=1e-6)


def test_criterion_6_vi_dual_identity(vi_pipeline, negative_vi_pipeline):
    with criterion(6, "utility price is U - bid when VI is marginal; sign flips"):
        scenario, res = vi_pipeline
        up = pricing.utility_method_prices(scenario, res)
        for t in (4, 5, 6, 7):
            assert up.raw_prices[t - 1] == pytest.approx(
                up.u_value - 0.05, rel=1e-6
            )
            assert up.raw_prices[t - 1] > 0
        scenario_hi, res_hi = negative_vi_pipeline
        with pytest.warns(UserWarning):
            up_hi = pricing.utility_method_prices(scenario_hi, res_hi)
        assert up_hi.negative_hours != ()
        for t in up_hi.negative_hours:
            assert up_hi.raw_prices[t - 1] == pytest.approx(
                up_hi.u_value - 0.3, rel=1e-6
            )


def test_criterion_7a_milp_matches_enumeration(small):
    with criterion(7, "(a) branch and bound equals brute force on small MILPs"):
        import inertiamarket.model as model
        from inertiamarket.optimizer import LinearModel

        mini = model.Scenario(
            name="mini",
            horizon=2,
            generators=(
                model.SyncGenerator("G1", 60, 10, 10.0, 0.0, 4.0),
                model.SyncGenerator("G2", 50, 10, 12.0, 100.0, 4.0),
            ),
            load={"n1": (50.0, 80.0)},
            wind={},
            disturbance=(0.0, 0.02),
            grid=model.GridParams(50.0, 0.25),
        )
        m = uc.build(mini, uc.UcVariant(frequency_constrained=True))
        knapsack = LinearModel("knapsack")
        for name, value in (("a", 11.0), ("b", 6.0), ("c", 4.0)):
            knapsack.add_variable(name, 0.0, 1.0, integral=True, cost=-value)
        knapsack.add_constraint({"a": 6.0, "b": 4.0, "c": 3.0}, "<=", 8.0, "w")
        for instance in (m, knapsack):
            assert len(instance.integral_names) <= 12
            oracle_obj, _ = oracles.enumerate_milp(instance)
            assert solve_milp(instance).objective_value == pytest.approx(
                oracle_obj, rel=1e-6
            )


def test_criterion_7b_duality_on_pricing_solves(small, pipeline):
    with criterion(7, "(b) strong duality and complementary slackness"):
        assignment = _assignment(pipeline.step2)
        for continuous in (False, True):
            model = uc.build(
                small,
                uc.UcVariant(frequency_constrained=True, continuous_k=continuous),
            )
            solved = solve_lp(fix_binaries(model, assignment))
            assert solved.is_optimal
            dual_obj = oracles.dual_objective(fix_binaries(model, assignment), solved)
            assert dual_obj == pytest.approx(solved.objective_value, rel=1e-6)
        duals = pipeline.restricted_duals
        for g in small.generators:
            for t in HOURS:
                key = (g.id, t)
                if not pipeline.step2.commitment[key]:
                    assert duals.nu_lower[key] == pytest.approx(0.0, abs=1e-6)
                    continue
                p = pipeline.step2.dispatch[key]
                if duals.nu_lower[key] > 1e-6:
                    assert p == pytest.approx(g.p_min, abs=1e-6)
                if duals.nu_upper[key] > 1e-6:
                    assert p == pytest.approx(g.p_max, abs=1e-6)


def test_criterion_7c_balance_and_rocof_feasibility(small, pipeline, vi_pipeline):
    with criterion(7, "(c) power balance and RoCoF feasibility everywhere"):
        cases = [
            (small, pipeline.step1),
            (small, pipeline.step2),
            (vi_pipeline[0], vi_pipeline[1].step1),
            (vi_pipeline[0], vi_pipeline[1].step2),
        ]
        for scenario, sol in cases:
            net = scenario.net_load()
            vi_on = sol.variant.vi_enabled and bool(scenario.vi_units)
            cap = uc.formulation_capacity(scenario, vi_on)
            reqs = uc.requirement_mws(scenario, vi_on)
            for t in HOURS:
                total = sum(sol.dispatch[(g.id, t)] for g in scenario.generators)
                assert total == pytest.approx(net[t - 1], abs=1e-6)
                if sol.variant.frequency_constrained:
                    provided = (sol.system_inertia[t - 1] + sol.slack[t - 1]) * cap
                    assert provided >= reqs[t - 1] - 1e-6


def test_criterion_7d_substitution_curve_monotone(small):
    with criterion(7, "(d) slack demand curve is monotone non-increasing"):
        curve = analysis.substitution_sweep(
            small, [0.0, 0.1, 0.3, 1.0], refine=False
        )
        values = curve.m_plus_values()
        assert all(a >= b - 1e-6 for a, b in zip(values, values[1:]))


def test_criterion_7e_vi_never_raises_uplift_payments(
    small, pipeline, vi_pipeline, negative_vi_pipeline
):
    with criterion(7, "(e) uplift payments with VI never exceed the no-VI level"):
        no_vi = analysis.price_method(small, pipeline, "uplift").total_inertia_payments
        for scenario, res in (vi_pipeline, negative_vi_pipeline):
            swept = analysis.price_method(scenario, res, "uplift")
            assert swept.total_inertia_payments <= no_vi + 1e-6


def test_criterion_7f_extra_units_never_lose(small, pipeline, negative_vi_pipeline):
    with criterion(7, "(f) inertia-only units end non-negative under 1 and 3"):
        for scenario, res in ((small, pipeline), negative_vi_pipeline):
            for method in ("expost", "uplift"):
                report = analysis.price_method(scenario, res, method)
                for uid in res.extra_unit_ids():
                    assert report.unit_total_profit(uid) >= -EUR_TOL


def test_criterion_7g_methods_share_commitment(small, pipeline):
    with criterion(7, "(g) one commitment and dispatch behind all methods"):
        comp = analysis.compare_methods(small, two_step=pipeline)
        assert comp.dispatch["expost"] == comp.dispatch["utility"]
        assert comp.dispatch["expost"] == comp.dispatch["uplift"]
        assert len({r.uc_objective for r in comp.rows}) == 1


def test_criterion_8_substitution_structure_small(small, pipeline):
    with criterion(8, "slack curve: plateau at the shortfall, cutoff beyond fleet cost"):
        curve = analysis.substitution_sweep(small, [0.0, 5.0], refine=False)
        plateau = curve.points[0].m_plus
        assert plateau == pytest.approx(uc.inertia_shortfall(small, pipeline.step1))
        assert plateau > 0
        assert curve.points[-1].m_plus == pytest.approx(0.0, abs=1e-6)


RTS_DATA = os.environ.get("INERTIAMARKET_RTS_DATA")


@pytest.mark.skipif(
    not RTS_DATA,
    reason="large-system goldens need the external demand/wind dataset; "
    "set INERTIAMARKET_RTS_DATA to the scenario file to enable",
)
def test_criterion_8_large_system_goldens():
    with criterion(8, "large system golden figures (external dataset)"):
        try:
            from inertiamarket.optimizer import ScipySolver

            solver = ScipySolver()
        except ImportError:  # pragma: no cover
            solver = None
        scenario = load_scenario(RTS_DATA)
        assert not scenario.profiles_placeholder, (
            "dataset still carries placeholder profiles"
        )
        res = uc.two_step_pipeline(
            scenario, uc.UcVariant(frequency_constrained=True), solver
        )
        assert res.step1.objective == pytest.approx(407500, abs=100)
        assert res.step2.objective == pytest.approx(569600, abs=100)
        assert res.step2.startup_cost_total == pytest.approx(3500, abs=100)
        assert res.step2.energy_cost_total == pytest.approx(566100, abs=100)

        comp = analysis.compare_methods(scenario, solver=solver, two_step=res)
        assert comp.row("expost").total_payments == pytest.approx(258160, abs=500)
        assert comp.row("utility").total_payments == pytest.approx(162124, abs=500)
        assert comp.row("uplift").total_payments == pytest.approx(187948, abs=500)
        assert comp.row("expost").negative_profit_units == 0
        assert comp.row("utility").negative_profit_units == 5
        assert comp.row("uplift").negative_profit_units == 0

        curve = analysis.substitution_sweep(
            scenario, [0.0, 6000.0], solver=solver, refine=False
        )
        assert curve.points[0].m_plus == pytest.approx(8.0, rel=0.1)
        assert curve.points[-1].m_plus == pytest.approx(0.0, abs=1e-3)
