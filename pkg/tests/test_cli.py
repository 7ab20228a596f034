import json

import pytest

from trimreg.cli import main


def test_run_setup_a_writes_outputs(tmp_path, capsys):
    out = tmp_path / "runA"
    code = main(
        [
            "run-setup-a",
            "--n", "30", "--d", "3",
            "--eps-grid", "0,0.1",
            "--methods", "OLS,TM-PlugIn",
            "--trials", "3",
            "--seed", "1",
            "--out", str(out),
        ]
    )
    assert code == 0
    for name in ("trials.csv", "summary.csv", "metadata.json"):
        assert (out / name).exists()
    lines = (out / "trials.csv").read_text().strip().split("\n")
    assert len(lines) == 1 + 2 * 2 * 3  # header + eps x methods x trials
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["trim_rule"] == "k = floor(eps*n) + 5"
    assert meta["initializer"] == "random"
    assert any("infeasible" in note for note in meta["notes"])


def test_run_setup_b_json_format(tmp_path):
    out = tmp_path / "runB"
    code = main(
        [
            "run-setup-b",
            "--n", "40", "--d", "3", "--p", "0.5",
            "--eps-grid", "0.1",
            "--methods", "OLS",
            "--trials", "2",
            "--out", str(out),
            "--format", "json",
        ]
    )
    assert code == 0
    rows = json.loads((out / "trials.json").read_text())
    assert len(rows) == 2
    assert rows[0]["setup"] == "B"


def test_config_file_argument(tmp_path):
    cfg = tmp_path / "experiment.cfg"
    cfg.write_text(
        "# benchmark settings\n"
        "n = 30\n"
        "d = 3\n"
        "eps-grid = 0,0.1\n"
        "methods = OLS\n"
        "trials = 2\n"
        f"out = {tmp_path / 'cfgrun'}\n"
    )
    code = main(["run-setup-a", f"@{cfg}"])
    assert code == 0
    assert (tmp_path / "cfgrun" / "trials.csv").exists()


def test_config_file_flag_override(tmp_path):
    cfg = tmp_path / "experiment.cfg"
    cfg.write_text("n = 30\ntrials = 2\n")
    out = tmp_path / "override"
    code = main(
        [
            "run-setup-a", f"@{cfg}",
            "--d", "2", "--eps-grid", "0", "--methods", "OLS",
            "--trials", "1", "--out", str(out),
        ]
    )
    assert code == 0
    lines = (out / "trials.csv").read_text().strip().split("\n")
    assert len(lines) == 2  # the command-line trial count wins


def test_identical_runs_are_byte_identical(tmp_path):
    args = [
        "run-setup-a", "--n", "25", "--d", "2", "--eps-grid", "0,0.2",
        "--methods", "OLS,MoM", "--trials", "4", "--seed", "7",
    ]
    assert main(args + ["--out", str(tmp_path / "x")]) == 0
    assert main(args + ["--out", str(tmp_path / "y"), "--workers", "2"]) == 0
    for name in ("trials.csv", "summary.csv", "metadata.json"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_compare_algs_emits_delta_table(tmp_path):
    out = tmp_path / "cmp"
    code = main(["compare-algs", "--trials", "2", "--seed", "5", "--out", str(out)])
    assert code == 0
    lines = (out / "comparison.csv").read_text().strip().split("\n")
    assert lines[0] == (
        "n,eps,error_dist,aasd_mean,aasd_std,plugin_mean,plugin_std,"
        "delta_mean_pct,delta_std_pct"
    )
    assert len(lines) == 1 + 16  # {120,360} x {0.05,0.2} x 4 error dists


def test_bounds_subcommand(tmp_path):
    out = tmp_path / "bounds"
    code = main(["bounds", "--out", str(out), "--eps-step", "0.01", "--n-max", "10000"])
    assert code == 0
    ce = (out / "c_epsilon_curve.csv").read_text().strip().split("\n")
    assert ce[0] == "eps,c_epsilon"
    eps, vals = zip(*(map(float, ln.split(",")) for ln in ce[1:]))
    flat = [v for e, v in zip(eps, vals) if e <= 0.25]
    assert all(v == pytest.approx(768.0) for v in flat)
    rising = [v for e, v in zip(eps, vals) if 0.25 < e < 0.5]
    assert all(b > a for a, b in zip(rising, rising[1:]))

    cj = (out / "c_j_epsilon_curve.csv").read_text().strip().split("\n")
    assert cj[0] == "eps,c_j_epsilon"

    slice_u = (out / "phi_p_uniform_slice.csv").read_text().strip().split("\n")
    assert slice_u[0] == "n,phi_p_uniform"
    ns, phis = zip(*(map(float, ln.split(",")) for ln in slice_u[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(phis, phis[1:]))

    slice_r = (out / "phi_p_regression_slice.csv").read_text().strip().split("\n")
    assert slice_r[0] == "n,r_q,r_m_bound,phi_p_regression"


def test_bad_config_value_exits_nonzero(capsys):
    code = main(
        [
            "run-setup-a", "--n", "10", "--eps-grid", "0.7",
            "--methods", "OLS", "--trials", "1", "--out", "/tmp/never",
        ]
    )
    assert code != 0
    assert "error" in capsys.readouterr().err


def test_unknown_method_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["run-setup-a", "--n", "10", "--methods", "LASSO", "--out", "/tmp/never"])
    assert exc.value.code == 2


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    assert "eps,c_epsilon" in text
    assert "phi_p_uniform" in text
