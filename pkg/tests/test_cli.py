import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from zoest import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, list(csv.DictReader(io.StringIO(out))), err


def test_estimate_aggregate_row(capsys):
    code, rows, _ = run(["estimate", "--n", "500", "--k", "500", "--delta", "0.1", "--x", "zero"],
                        capsys)
    assert code == 0
    assert len(rows) == 11
    agg = rows[-1]
    assert agg["trial"] == "agg" and agg["schema"] == "zoest-result/1"
    assert 1.4e-4 <= float(agg["error_l2"]) <= 5.6e-4
    assert float(agg["c_curve_value"]) == pytest.approx(math.log10(0.05))
    assert agg["error_fro"] == "" and agg["bound_value"] == ""
    assert int(agg["n_evals"]) == 10 * 1000


def test_estimate_entrywise_pi4(capsys):
    code, rows, _ = run(["estimate", "--estimator", "entrywise", "--n", "500", "--delta", "0.01",
                         "--x", "pi4"], capsys)
    assert code == 0
    assert float(f"{float(rows[-1]['error_l2']):.2g}") == 3.2e-4
    assert rows[-1]["c_curve_value"] == ""


def test_estimate_hessian_and_bound(capsys):
    code, rows, _ = run(["estimate", "--estimator", "hess-stiefel", "--n", "20", "--k", "5",
                         "--trials", "3"], capsys)
    assert code == 0
    assert rows[0]["error_fro"] and rows[0]["error_spec"] and rows[0]["error_l2"] == ""
    code, rows, _ = run(["estimate", "--n", "20", "--k", "5", "--l3", "1.0", "--trials", "2"],
                        capsys)
    assert float(rows[-1]["bound_value"]) > 0


def test_floats_have_17_significant_digits(capsys):
    _, rows, _ = run(["estimate", "--n", "10", "--k", "3", "--trials", "2"], capsys)
    text = rows[0]["error_l2"]
    assert float(format(float(text), ".17g")) == float(text)
    assert len(text.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) >= 15


def test_invalid_k_is_parameter_error(capsys):
    code, _, err = run(["estimate", "--n", "500", "--k", "501", "--delta", "0.1"], capsys)
    assert code == cli.EXIT_PARAMETER
    assert "k must satisfy" in err


def test_unknown_estimator(capsys):
    code, _, err = run(["estimate", "--estimator", "hess-nope"], capsys)
    assert code == 2 and "hess-stiefel" in err


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_evaluation_failure_exit_code(tmp_path, capsys):
    # a linear objective with an infinite coefficient yields non-finite values
    params = tmp_path / "c.txt"
    params.write_text("1e308 1e308\n")
    code, _, err = run(["estimate", "--function", "linear", "--params", str(params), "--k", "2",
                        "--x", "pi2", "--delta", "1e10", "--trials", "1"], capsys)
    assert code == cli.EXIT_EVALUATION
    assert "returned" in err


def test_sweep_k(capsys):
    code, rows, _ = run(["sweep-k", "--n", "50", "--delta", "0.01", "--trials", "3"], capsys)
    assert code == 0
    assert [int(r["k"]) for r in rows] == [1, 2, 5, 10, 20, 50]
    assert all(r["trial"] == "agg" for r in rows)
    lg = [float(r["lg_error"]) for r in rows]
    c = [float(r["c_curve_value"]) for r in rows]
    assert np.corrcoef(lg, c)[0, 1] > 0.95


def test_sweep_k_explicit_grid_and_zero_delta(capsys):
    code, rows, _ = run(["sweep-k", "--n", "20", "--k", "1,4,20", "--trials", "2",
                         "--estimator", "hess-stiefel"], capsys)
    assert code == 0 and [r["k"] for r in rows] == ["1", "4", "20"]
    code, _, err = run(["sweep-k", "--n", "20", "--delta", "0"], capsys)
    assert code == 2 and "delta" in err


def test_table_t_entry(capsys):
    code, rows, _ = run(["table", "--table-name", "t-entry", "--trials", "3"], capsys)
    assert code == 0 and len(rows) == 6
    assert rows[0]["schema"] == "zoest-table/1"
    assert rows[3]["reproduced_std"] == "" and rows[3]["paper_std"] == ""
    for r in rows:
        assert 0.5 <= float(r["ratio"]) <= 2


def test_table_errors(capsys):
    code, _, err = run(["table"], capsys)
    assert code == 2 and "t-hess1" in err
    with pytest.raises(SystemExit) as info:
        cli.main(["table", "--table-name", "t9"])
    assert info.value.code == 2


def test_moments(capsys):
    code, rows, _ = run(["moments", "--n", "10", "--p", "4", "--draws", "100000"], capsys)
    assert code == 0 and len(rows) == 3
    assert float(rows[0]["exact"]) == 0.025
    code, _, err = run(["moments", "--n", "5", "--p", "3"], capsys)
    assert code == 2 and "even" in err


def test_moments_failure_exit_code(monkeypatch, capsys):
    from zoest.experiments import MomentCheck
    monkeypatch.setattr(cli, "moment_check",
                        lambda *a, **k: [MomentCheck("E[v1^2]", 5, 0.3, 0.2, 0.01, 100)])
    code, rows, err = run(["moments", "--n", "5", "--p", "2"], capsys)
    assert code == cli.EXIT_MOMENTS
    assert float(rows[0]["z"]) == pytest.approx(10.0)


def test_zo_gd_quadratic(tmp_path, capsys):
    params = tmp_path / "q.txt"
    params.write_text("1 0 0\n0 2 0\n0 0 3\n1 1 1\n")
    code, rows, _ = run(["zo-gd", "--function", "quadratic", "--params", str(params),
                         "--eta", "0.1", "--steps", "100", "--x", "pi2", "--k", "3"], capsys)
    assert code == 0 and len(rows) == 101
    f = [float(r["f"]) for r in rows]
    assert all(b < a for a, b in zip(f, f[1:]))
    assert rows[-1]["n_evals"] == "600"
    code, _, _ = run(["zo-gd", "--n", "5", "--steps", "0"], capsys)
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# benchmark\nn = 30\nk = 4\ntrials = 2\ndelta=0.05\nestimator = gaussian\n")
    code, rows, _ = run(["estimate", "--config", str(cfg), "--k", "6"], capsys)
    assert code == 0
    agg = rows[-1]
    assert (agg["n"], agg["k"], agg["delta"], agg["estimator"]) == ("30", "6", "0.050000000000000003",
                                                                     "gaussian")
    assert len(rows) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, err = run(["estimate", "--config", str(bad)], capsys)
    assert code == 2 and "colour" in err


def test_output_file_and_bit_reproducibility(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["estimate", "--n", "40", "--k", "7", "--trials", "4", "--seed", "3"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text(encoding="utf-8").splitlines()[0].startswith("schema,")


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "zoest", "moments", "--n", "5", "--p", "2",
                           "--draws", "10000", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().count("\n") == 2
    proc = subprocess.run([sys.executable, "-m", "zoest", "estimate", "--n", "5", "--k", "9"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
