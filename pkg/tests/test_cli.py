import json

import pytest

from inertiamarket.cli import main
from inertiamarket.scenario_io import (
    ScenarioParseError,
    dump_scenario,
    load_bundled,
    load_scenario,
    parse_scenario,
)


def run(args):
    return main([str(a) for a in args])


def test_parse_small_system_contents(small):
    assert small.horizon == 8
    assert [g.id for g in small.generators] == ["G1", "G2", "G3"]
    assert [v.id for v in small.vi_units] == ["B1", "B2", "B3"]
    assert small.disturbance == (0.001, 0.001, 0.015, 0.025, 0.033, 0.033, 0.030, 0.010)


def test_parse_rejects_malformed_json():
    with pytest.raises(ScenarioParseError, match=r"line 1, column"):
        parse_scenario("{nope")


def test_parse_rejects_unknown_fields(small):
    doc = json.loads(dump_scenario(small))
    doc["voltage"] = 400
    doc["generators"][0]["ramp_rate"] = 5
    with pytest.raises(ScenarioParseError) as err:
        parse_scenario(json.dumps(doc))
    msg = str(err.value)
    assert "voltage" in msg and "generators[0].ramp_rate" in msg


def test_parse_rejects_empty_generator_list(small):
    doc = json.loads(dump_scenario(small))
    doc["generators"] = []
    with pytest.raises(Exception, match="at least one"):
        parse_scenario(json.dumps(doc))


def test_parse_aggregates_type_errors(small):
    doc = json.loads(dump_scenario(small))
    doc["generators"][0]["p_max"] = "big"
    doc["horizon"] = "eight"
    with pytest.raises(ScenarioParseError) as err:
        parse_scenario(json.dumps(doc))
    msg = str(err.value)
    assert "generators[0].p_max" in msg and "horizon" in msg


def test_rts96_skeleton_parses_and_builds():
    from inertiamarket import uc

    rts = load_bundled("rts96")
    assert rts.profiles_placeholder
    assert len(rts.generators) == 20
    assert [v.p_max for v in rts.vi_units] == [70, 50, 100, 40]
    model = uc.build(rts, uc.UcVariant(frequency_constrained=True, vi_enabled=True))
    assert len(model.integral_names) == 2 * 20 * 24


def test_load_scenario_resolves_bundled_names(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    sc = load_scenario("small_system")
    assert sc.name == "small_system"


def test_missing_file_is_input_error(tmp_path):
    assert run(["--out", tmp_path / "o", "solve", tmp_path / "ghost.json"]) == 2


def test_malformed_file_is_input_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["--out", tmp_path / "o", "solve", bad]) == 2


def test_infeasible_exit_code(tmp_path, small):
    doc = json.loads(dump_scenario(small))
    doc["disturbance"][4] = 0.05
    doc["disturbance"][5] = 0.05
    path = tmp_path / "hot.json"
    path.write_text(json.dumps(doc))
    assert run(["--out", tmp_path / "o", "solve", path]) == 1


def test_freq_metrics_output(capsys):
    code = run(
        "freq-metrics --dp 0.1 --m 6 --d 1 --rg 19 --fg 15 --t 8 "
        "--zeta 0.7 --omega-n 1 --tm 1".split()
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "-0.016667" in out  # RoCoF p.u./s
    assert "-0.833333" in out  # RoCoF in Hz/s
    assert "-0.010734" in out  # nadir p.u.
    assert "-0.005000" in out  # steady state p.u.


def test_freq_metrics_domain_error(capsys):
    code = run(
        "freq-metrics --dp 0.1 --m 6 --d 1 --rg 10 --fg 15 --t 8 "
        "--zeta 0.7 --omega-n 1 --tm 1".split()
    )
    assert code == 2


def test_solve_outputs(tmp_path):
    out = tmp_path / "solve"
    assert run(["--out", out, "solve", "small_system"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solution"]["objective"] == pytest.approx(3950.0)
    schedule = (out / "schedule.csv").read_text().splitlines()
    assert schedule[0] == "hour,unit,committed,startup,dispatch_mw,inertia_mws2"
    assert (out / "inertia.csv").exists()
    assert (out / "inertia_schedule.png").stat().st_size > 0


def test_price_uplift_summary(tmp_path):
    out = tmp_path / "uplift"
    assert run(["--out", out, "price", "small_system", "--method", "uplift"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["total_inertia_payments"] == pytest.approx(590.0)
    assert summary["report"]["unit_profits"]["G2"] == pytest.approx(0.0)
    assert summary["report"]["unit_profits"]["G3"] == pytest.approx(0.0)
    assert (out / "prices_uplift.png").stat().st_size > 0


def test_price_expost_payment_rows(tmp_path):
    out = tmp_path / "expost"
    assert run(["--out", out, "price", "small_system", "--method", "expost"]) == 0
    rows = (out / "payments_expost.csv").read_text().splitlines()
    assert "5,G2,-20.00,300.00,320.00,0.00" in rows
    assert "6,G2,-20.00,0.00,20.00,0.00" in rows
    assert "4,G3,-10.00,200.00,210.00,0.00" in rows
    prices = (out / "prices_expost.csv").read_text().splitlines()
    assert "4,10.000000,0.328125" in prices


def test_price_rocof_override_relaxes_requirement(tmp_path):
    out = tmp_path / "relaxed"
    code = run(
        [
            "--out", out,
            "price", "small_system",
            "--method", "uplift",
            "--rocof-limit", "2.0",
        ]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    # An 8x weaker limit removes the need for extra units entirely.
    assert summary["total_inertia_payments"] == pytest.approx(0.0)
    assert summary["extra_units"] == []


def test_sweep_slack_outputs(tmp_path):
    out = tmp_path / "sweep"
    code = run(
        ["--out", out, "sweep-slack", "small_system", "--grid", "0,0.2,5"]
    )
    assert code == 0
    rows = (out / "sweep_slack.csv").read_text().splitlines()
    assert rows[0] == "slack_cost,m_plus_mws2"
    assert len(rows) == 4
    assert (out / "substitution_curve.png").stat().st_size > 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["points"][0]["m_plus"] == pytest.approx(964.0)
    assert summary["points"][-1]["m_plus"] == pytest.approx(0.0)


def test_sweep_vi_outputs(tmp_path):
    out = tmp_path / "vsweep"
    code = run(
        [
            "--out", out,
            "sweep-vi", "small_system",
            "--grid", "0.05,0.3",
            "--method", "uplift",
        ]
    )
    assert code == 0
    rows = (out / "sweep_vi.csv").read_text().splitlines()
    assert rows[0] == "vi_bid,total_payments"
    assert len(rows) == 3
    assert (out / "vi_payments.png").stat().st_size > 0


def test_compare_outputs_and_identical_dispatch(tmp_path):
    out = tmp_path / "cmp"
    assert run(["--out", out, "compare", "small_system"]) == 0
    base = (out / "dispatch_expost.csv").read_bytes()
    assert (out / "dispatch_utility.csv").read_bytes() == base
    assert (out / "dispatch_uplift.csv").read_bytes() == base
    summary = json.loads((out / "summary.json").read_text())
    assert summary["methods"]["uplift"]["total_inertia_payments"] == pytest.approx(590.0)
    objectives = {m["uc_objective"] for m in summary["methods"].values()}
    assert objectives == {3950.0}
    assert (out / "method_payments.png").stat().st_size > 0


def test_reports_are_byte_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert run(["--out", out, "price", "small_system", "--method", "utility"]) == 0
    for name in ("payments_utility.csv", "prices_utility.csv", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_outdir_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("INERTIAMARKET_OUTDIR", "envout")
    assert run(["solve", "small_system", "--no-freq"]) == 0
    assert (tmp_path / "envout" / "schedule.csv").exists()


def test_placeholder_profiles_warn(tmp_path, capsys, small):
    doc = json.loads(dump_scenario(small))
    doc["profiles_placeholder"] = True
    path = tmp_path / "placeholder.json"
    path.write_text(json.dumps(doc))
    assert run(["--out", tmp_path / "o", "solve", path, "--no-freq"]) == 0
    assert "placeholder" in capsys.readouterr().err


def test_quiet_scenario_pays_nothing(tmp_path):
    # Zero disturbance everywhere: rows exist for the committed unit but
    # every payment and profit column is zero.
    doc = json.loads(dump_scenario(load_bundled("small_system")))
    doc["disturbance"] = [0.0] * 8
    path = tmp_path / "quiet.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "q"
    assert run(["--out", out, "price", path, "--method", "uplift"]) == 0
    rows = (out / "payments_uplift.csv").read_text().splitlines()
    # G1 stays committed for energy, so its rows appear; no payments flow.
    assert rows[0].startswith("hour,unit")
    assert all(row.endswith(",0.00,0.00") for row in rows[1:])


def test_payment_report_with_no_cells_is_header_only(tmp_path, small):
    from inertiamarket.pricing import PaymentReport
    from inertiamarket.reports import write_payment_report

    empty = PaymentReport(
        method="uplift",
        cells={},
        prices=(),
        unit_totals={},
        total_inertia_payments=0.0,
        negative_profit_units=0,
        positive_profit_units=0,
        n_sg_units=0,
    )
    paths = write_payment_report(empty, (), small, tmp_path)
    payments, prices = paths
    assert payments.read_text().splitlines() == [
        "hour,unit,eom_profit,startup_cost,inertia_payment,total_profit"
    ]
    assert prices.read_text().splitlines() == ["hour,mu,lambda_hat"]


def test_conflicting_flags_are_input_error(tmp_path, capsys):
    code = run(
        ["--out", tmp_path / "o", "solve", "small_system", "--vi", "--slack-cost", "1.0"]
    )
    assert code == 2
    assert "mutually exclusive" in capsys.readouterr().err
