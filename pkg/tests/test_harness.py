import json

import numpy as np
import pytest

from ustash.cli import main
from ustash.config import build_config, load_config
from ustash.experiments import (build_trace, emit_figures, emit_report,
                                mixture_hit_rate, model_sim_agreement,
                                run_compare, run_model_curve, run_simulate,
                                run_sweep)
from ustash.model import x_optimal


SMALL = {
    "seed": 3,
    "workload": {
        "n_requests": 1500, "r_v": 4.0,
        "video": {"catalog_size": 60},
        "nonvideo": {"catalog_size": 300},
    },
    "model": {"catalog_size": 500, "n_requests": 1500},
}


def small_config(**overrides):
    data = json.loads(json.dumps(SMALL))  # deep copy
    for key, value in overrides.items():
        data[key] = value
    return build_config(data)


def write_small_toml(path, extra=""):
    path.write_text(
        "seed = 3\n"
        "[workload]\nn_requests = 1500\nr_v = 4.0\n"
        "[workload.video]\ncatalog_size = 60\n"
        "[workload.nonvideo]\ncatalog_size = 300\n"
        "[model]\ncatalog_size = 500\nn_requests = 1500\n"
        + extra
    )


# ---------------------------------------------------------------------------
# experiments

def test_compare_runs_all_scenarios():
    report = run_compare(small_config())
    assert set(report.scenario_metrics) == {"direct", "onboard-wifi", "cache-wifi", "ustash"}
    rows = report.figures["fig11_scenarios"]
    assert {"scenario", "mean_completion_s", "system_cost_cents"} <= set(rows[0])


def test_sweep_x_has_u_shape():
    cfg = small_config(sweep={"parameter": "x"})
    report = run_sweep(cfg)
    rows = report.figures["fig5b_completion_vs_x"]
    assert len(rows) == 21
    values = np.array([r["expected_T_s"] for r in rows])
    i = int(np.argmin(values))
    assert 0 < i < 20
    assert np.all(np.diff(values[: i + 1]) <= 1e-12)
    assert np.all(np.diff(values[i:]) >= -1e-12)
    x_opt = x_optimal(cfg.model.net, cfg.model.lambda_e)
    assert abs(rows[i]["x"] - x_opt) <= 0.05 + 1e-12


def test_sweep_x_with_sim_columns():
    cfg = small_config(sweep={"parameter": "x", "values": [0.0, 0.5, 1.0]})
    report = run_sweep(cfg, with_sim=True, jobs=2)
    rows = report.figures["fig5b_completion_vs_x"]
    assert all("sim_mean_T_s" in r and r["sim_mean_T_s"] > 0 for r in rows)


def test_sweep_s_rows():
    cfg = small_config(sweep={"parameter": "s", "values": [0.5, 1.0, 2.0]})
    report = run_sweep(cfg, with_sim=True)
    rows = report.figures["fig9_s_sweep"]
    hit = [r["expected_hit_rate"] for r in rows]
    assert hit == sorted(hit)  # more skew, more hits
    assert all(0 <= r["sim_hit_rate"] <= 1 for r in rows)


def test_sweep_rv_rows():
    cfg = small_config(sweep={"parameter": "r_v", "values": [1.0, 10.0]})
    report = run_sweep(cfg)
    rows = report.figures["fig10_rv_sweep"]
    assert [r["r_v"] for r in rows] == [1.0, 10.0]
    for r in rows:
        assert 0 <= r["video_full_hit_rate"] <= 1
        assert 0 <= r["byte_hit_rate"] <= 1


def test_sweep_omega_schema_and_extremes(tmp_path):
    cfg = small_config(sweep={"parameter": "omega_ratio"})
    report = run_sweep(cfg)
    rows = report.figures["fig12_h_surface"]
    paths = emit_figures(report, tmp_path, plots=False)
    csv_path = [p for p in paths if p.name == "fig12_h_surface.csv"][0]
    header = csv_path.read_text().splitlines()[0]
    assert header == "x,omega_ratio,t_norm,cb_norm,cu_norm,h_sum,h_dist"
    worst = max(rows, key=lambda r: r["h_dist"])
    assert worst["h_dist"] == pytest.approx(np.sqrt(2.0))


def test_simulate_hit_rate_series():
    report, _ = run_simulate(small_config())
    rows = report.figures["fig6_hitrate_vs_n"]
    assert rows[-1]["n"] == 1500
    rates = [r["sim_hit_rate"] for r in rows]
    assert all(0 <= v <= 1 for v in rates)
    assert all(0 <= r["analytic_hit_rate"] < 1 for r in rows)


def test_mixture_hit_rate_monotone():
    cfg = small_config()
    values = [mixture_hit_rate(cfg.workload, n) for n in [100, 500, 1000, 1500]]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_model_curve_report():
    report = run_model_curve(small_config(), grid_points=11)
    rows = report.figures["model_curve"]
    assert len(rows) == 11
    assert report.extras["x_optimal"] == pytest.approx(0.6154, abs=5e-4)


def test_model_sim_agreement_small():
    cfg = build_config({"model": {"catalog_size": 400, "n_requests": 3000}})
    rows = model_sim_agreement(cfg.model, [0.0, 0.5, 1.0], seed=1)
    for r in rows:
        assert r["rel_err"] <= 0.05
        assert abs(r["sim_misses"] - r["expected_unique"]) <= r["unique_band"]


def test_report_json_and_echo(tmp_path):
    cfg = small_config()
    report = run_compare(cfg)
    emit_report(report, tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["kind"] == "compare"
    assert doc["provenance"]["tool"] == "ustash"
    assert "ustash" in doc["scenario_metrics"]
    assert (tmp_path / "config-echo.toml").exists()


def test_reproducible_csv_bytes(tmp_path):
    cfg = small_config(sweep={"parameter": "r_v", "values": [1.0, 5.0]})
    d1, d2 = tmp_path / "a", tmp_path / "b"
    emit_figures(run_sweep(cfg), d1, plots=False)
    emit_figures(run_sweep(cfg), d2, plots=False)
    f1, f2 = d1 / "fig10_rv_sweep.csv", d2 / "fig10_rv_sweep.csv"
    assert f1.read_bytes() == f2.read_bytes()


def test_config_echo_reruns_identically(tmp_path):
    cfg = small_config()
    report = run_compare(cfg)
    emit_figures(report, tmp_path / "first", plots=False)
    emit_report(report, tmp_path / "first")
    cfg2 = load_config(tmp_path / "first" / "config-echo.toml")
    emit_figures(run_compare(cfg2), tmp_path / "second", plots=False)
    assert ((tmp_path / "first" / "fig11_scenarios.csv").read_bytes()
            == (tmp_path / "second" / "fig11_scenarios.csv").read_bytes())


# ---------------------------------------------------------------------------
# CLI

def test_cli_model_writes_exact_columns(tmp_path):
    code = main(["--out", str(tmp_path), "--no-plots", "--config", _small(tmp_path),
                 "model", "--grid", "5"])
    assert code == 0
    header = (tmp_path / "model_curve.csv").read_text().splitlines()[0]
    assert header == ("x,expected_T_s,cost_stash_cents,cost_user_cents,"
                      "cost_system_cents,t_norm,cb_norm,cu_norm,h_sum,h_dist")


def _small(tmp_path):
    path = tmp_path / "small.toml"
    write_small_toml(path)
    return str(path)


def test_cli_compare_and_plots(tmp_path, capsys):
    code = main(["--out", str(tmp_path), "--config", _small(tmp_path), "compare"])
    assert code == 0
    assert (tmp_path / "fig11_scenarios.csv").exists()
    png = tmp_path / "fig11_scenarios.png"
    assert png.exists() and png.stat().st_size > 0
    out = capsys.readouterr().out
    assert "ustash" in out and "direct" in out


def test_cli_generate_deterministic(tmp_path):
    cfg_path = _small(tmp_path)
    for sub in ("a", "b"):
        code = main(["--out", str(tmp_path / sub), "--config", cfg_path,
                     "generate", "--trace-json", "trace.json"])
        assert code == 0
    assert ((tmp_path / "a" / "trace.csv").read_bytes()
            == (tmp_path / "b" / "trace.csv").read_bytes())
    header = (tmp_path / "a" / "trace.csv").read_text().splitlines()[0]
    assert header == "index,content_id,class,rank,size_mb,view_ratio"
    assert (tmp_path / "a" / "trace.json").exists()


def test_cli_simulate_with_log(tmp_path):
    code = main(["--out", str(tmp_path), "--no-plots", "--config", _small(tmp_path),
                 "simulate", "--log"])
    assert code == 0
    assert (tmp_path / "outcomes.csv").exists()
    assert (tmp_path / "fig6_hitrate_vs_n.csv").exists()


def test_cli_sweep_with_values(tmp_path):
    code = main(["--out", str(tmp_path), "--no-plots", "--config", _small(tmp_path),
                 "sweep", "x", "--values", "0,0.5,1"])
    assert code == 0
    lines = (tmp_path / "fig5b_completion_vs_x.csv").read_text().splitlines()
    assert len(lines) == 4


def test_cli_sweep_json_format(tmp_path):
    code = main(["--out", str(tmp_path), "--no-plots", "--format", "json",
                 "--config", _small(tmp_path), "sweep", "r_v", "--values", "1,5"])
    assert code == 0
    doc = json.loads((tmp_path / "fig10_rv_sweep.json").read_text())
    assert len(doc) == 2


def test_cli_analyze(tmp_path):
    req = tmp_path / "requests.csv"
    req.write_text("label,content_id\nbus1,a\nbus1,b\nbus2,b\nbus2,c\nbus3,a\n")
    code = main(["--out", str(tmp_path), "analyze", "--requests", str(req)])
    assert code == 0
    matrix = (tmp_path / "jaccard_matrix.csv").read_text().splitlines()
    assert matrix[0] == "label,bus1,bus2,bus3"
    assert (tmp_path / "entropy_cdf.csv").exists()


def test_cli_seed_override_changes_trace(tmp_path):
    cfg_path = _small(tmp_path)
    main(["--out", str(tmp_path / "a"), "--config", cfg_path, "generate"])
    main(["--out", str(tmp_path / "b"), "--config", cfg_path, "--seed", "77", "generate"])
    assert ((tmp_path / "a" / "trace.csv").read_bytes()
            != (tmp_path / "b" / "trace.csv").read_bytes())


def test_cli_exit_code_parse_error(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("not [valid\n")
    assert main(["--config", str(bad), "compare"]) == 2


def test_cli_exit_code_unknown_key(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[workload]\nwarp = 9\n")
    assert main(["--config", str(bad), "compare"]) == 3


def test_cli_exit_code_bad_value(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[workload.video]\nzipf_s = -1\n")
    assert main(["--config", str(bad), "compare"]) == 4


def test_cli_io_error(tmp_path):
    assert main(["--config", str(tmp_path / "missing.toml"), "compare"]) == 5
