import pytest

from inertiamarket import analysis, uc


@pytest.fixture(scope="module")
def small_curve(small):
    grid = [0.0, 0.05, 0.15, 0.3, 0.45, 0.6]
    return analysis.substitution_sweep(small, grid, refine=False)


def test_curve_monotone_nonincreasing(small_curve):
    values = small_curve.m_plus_values()
    assert all(a >= b - 1e-6 for a, b in zip(values, values[1:]))


def test_curve_total_cost_nondecreasing(small_curve):
    costs = [p.total_cost for p in small_curve.points]
    assert all(a <= b + 1e-6 for a, b in zip(costs, costs[1:]))


def test_curve_free_slack_equals_max_shortfall(small, small_curve, pipeline):
    assert small_curve.points[0].cost == 0.0
    assert small_curve.points[0].m_plus == pytest.approx(
        uc.inertia_shortfall(small, pipeline.step1)
    )
    assert small_curve.points[0].total_cost == pytest.approx(3360.0)


def test_curve_no_purchases_beyond_fleet_cost(small):
    expensive = analysis.substitution_sweep(small, [5.0], refine=False)
    assert expensive.points[0].m_plus == pytest.approx(0.0, abs=1e-6)
    assert expensive.points[0].total_cost == pytest.approx(3950.0)


def test_curve_zero_disturbance_flat(small):
    quiet = small.with_disturbance((0.0,) * 8)
    curve = analysis.substitution_sweep(quiet, [0.0, 0.1, 1.0], refine=False)
    assert curve.m_plus_values() == pytest.approx([0.0, 0.0, 0.0], abs=1e-9)
    for p in curve.points:
        assert p.total_cost == pytest.approx(3360.0)


def test_curve_refinement_inserts_points(small):
    coarse = analysis.substitution_sweep(small, [0.0, 0.6], refine=False)
    refined = analysis.substitution_sweep(
        small, [0.0, 0.6], refine=True, max_points=12
    )
    assert len(refined.points) > len(coarse.points)
    costs = [p.cost for p in refined.points]
    assert costs == sorted(costs)


def test_default_cost_grid_spans_action(small):
    grid = analysis.default_cost_grid(small)
    assert len(grid) == 30
    assert grid[0] == 0.0
    # The dearest per-unit rate on the small system is G2's 0.4; the grid
    # must reach past it so the curve hits zero purchases.
    assert grid[-1] > 0.4


def test_auto_sweep_extends_until_purchases_stop():
    # A two-unit case whose marginal sliver rate exceeds the estimated cap:
    # the auto grid must keep extending until the curve reaches zero.
    import inertiamarket.model as model

    sc = model.Scenario(
        name="sliver",
        horizon=2,
        generators=(
            model.SyncGenerator("G1", 60, 10, 10.0, 0.0, 4.0),
            model.SyncGenerator("G2", 50, 10, 12.0, 150.0, 4.0),
        ),
        load={"n1": (40.0, 40.0)},
        wind={},
        disturbance=(0.0, 0.035),
        grid=model.GridParams(50.0, 0.25),
    )
    curve = analysis.substitution_sweep(sc, cost_grid=None, refine=False)
    values = curve.m_plus_values()
    assert values[0] > 0
    assert values[-1] == pytest.approx(0.0, abs=1e-6)
    assert all(a >= b - 1e-6 for a, b in zip(values, values[1:]))


def test_grid_must_be_sorted(small):
    with pytest.raises(ValueError):
        analysis.substitution_sweep(small, [0.3, 0.1])


def test_compare_methods_small(small, pipeline):
    comp = analysis.compare_methods(small, two_step=pipeline)
    assert {r.method for r in comp.rows} == set(analysis.METHODS)
    objectives = {r.uc_objective for r in comp.rows}
    assert len(objectives) == 1
    assert comp.row("uplift").total_payments == pytest.approx(590.0)
    assert comp.row("expost").negative_profit_units == 0
    assert comp.row("uplift").negative_profit_units == 0


def test_compare_methods_identical_dispatch(small, pipeline):
    comp = analysis.compare_methods(small, two_step=pipeline)
    base = comp.dispatch["expost"]
    assert comp.dispatch["utility"] == base
    assert comp.dispatch["uplift"] == base


def test_compare_methods_zero_disturbance(small):
    quiet = small.with_disturbance((0.0,) * 8)
    comp = analysis.compare_methods(quiet)
    for r in comp.rows:
        assert r.total_payments == pytest.approx(0.0, abs=1e-9)
        assert r.negative_profit_units == 0


def test_vi_sweep_uplift_never_above_no_vi(small, pipeline):
    no_vi_total = analysis.price_method(small, pipeline, "uplift").total_inertia_payments
    points = analysis.vi_cost_sweep(small, [0.05, 0.3], method="uplift")
    for p in points:
        assert p.total_payments <= no_vi_total + 1e-6


def test_vi_sweep_expost_zero_bid_empties_extra_set(small):
    swept = small.with_vi_bids(0.0)
    res = uc.two_step_pipeline(
        swept, uc.UcVariant(frequency_constrained=True, vi_enabled=True)
    )
    assert res.extra_units == frozenset()
    report = analysis.price_method(swept, res, "expost")
    assert report.total_inertia_payments == pytest.approx(0.0, abs=1e-9)


def test_vi_sweep_flags_negative_duals(small):
    # Above the utility value (~0.19 EUR/MW s^2) but below the point where
    # VI is priced out entirely, the utility-scheme dual goes negative.
    points = analysis.vi_cost_sweep(small, [0.05, 0.3], method="utility")
    assert points[0].negative_duals is False
    assert points[1].negative_duals is True


def test_vi_sweep_requires_vi_units(small):
    import dataclasses

    bare = dataclasses.replace(small, vi_units=())
    with pytest.raises(ValueError):
        analysis.vi_cost_sweep(bare, [0.1], method="uplift")


def test_unknown_method_rejected(small):
    with pytest.raises(ValueError):
        analysis.vi_cost_sweep(small, [0.1], method="vcg")


def test_slack_floor_when_fleet_cannot_meet_requirement():
    # Requirement above the whole fleet's rotors: the hard variant is
    # infeasible, the slack variant stays solvable with a purchase floor
    # that no price removes.
    import inertiamarket.model as model

    sc = model.Scenario(
        name="floor",
        horizon=2,
        generators=(
            model.SyncGenerator("G1", 60, 10, 10.0, 0.0, 4.0),
            model.SyncGenerator("G2", 50, 10, 12.0, 150.0, 4.0),
        ),
        load={"n1": (40.0, 40.0)},
        wind={},
        disturbance=(0.0, 0.045),
        grid=model.GridParams(50.0, 0.25),
    )
    with pytest.raises(uc.UcInfeasibleError):
        uc.solve_variant(sc, uc.UcVariant(frequency_constrained=True))
    curve = analysis.substitution_sweep(sc, [0.0, 100.0], refine=False)
    floor = 0.045 * 200 * 110 - 2 * 4 * 110  # requirement minus all rotors
    assert curve.points[-1].m_plus == pytest.approx(floor, abs=1e-6)
