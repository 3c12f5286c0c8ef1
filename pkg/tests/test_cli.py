import json
import math
import subprocess
import sys

import pytest

from tailcorrect import cli
from tailcorrect.errors import DivergenceError, FiniteDifferenceError

CAUCHY2 = '{"kind": "iid", "family": "cauchy", "n": 2}'
NORMAL3 = '{"kind": "iid", "family": "normal", "n": 3}'


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_kg_cauchy(capsys):
    res = run_json(capsys, "kg", "--test", "ost", "--n", 2, "--density", CAUCHY2)
    assert res["kg"] == pytest.approx(2 / math.pi, rel=1e-12)
    assert res["method"] == "closed-form"
    assert res["schema"] == "tailcorrect/1"
    assert set(res["provenance"]) >= {"spec_sha256", "seed", "version"}


def test_kg_welch_diagonal(capsys):
    mvn = json.dumps({"kind": "mvn", "cov": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]})
    res = run_json(capsys, "kg", "--test", "welch", "--n1", 2, "--n2", 2, "--density", mvn)
    assert res["kg"] == pytest.approx(1.0, abs=1e-10)


def test_kg_f_variance_ratio(capsys, tmp_path):
    spec = {"kind": "product", "blocks": [
        {"kind": "iid", "family": "normal", "params": {"sigma": 2.0}, "n": 2},
        {"kind": "iid", "family": "normal", "n": 2}]}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(spec))
    res = run_json(capsys, "kg", "--test", "f", "--n1", 2, "--n2", 2, "--density", path,
                   "--mc-samples", 200_000)
    assert abs(res["kg"] - 2.0) <= max(4 * res["abs_error"], 1e-12)


def test_kg_is_reproducible(capsys):
    a = run(capsys, "kg", "--test", "ost", "--n", 3, "--density", NORMAL3)
    b = run(capsys, "kg", "--test", "ost", "--n", 3, "--density", NORMAL3)
    assert a == b


def test_pval_examples(capsys, tmp_path):
    res = run_json(capsys, "pval", "--test", "ost", "--n", 2, "--t-star", 0, "--kg", 1)
    assert res["p_raw"] == 0.5 and res["tail"] == "upper"
    data = tmp_path / "x.txt"
    data.write_text("0 2\n")
    res = run_json(capsys, "pval", "--test", "ost", "--n", 2, "--data", data, "--kg", 2.5)
    assert res["t_star"] == pytest.approx(1.0)
    assert res["p_raw"] == pytest.approx(0.25)
    assert res["p_corrected"] == pytest.approx(0.625)
    assert res["outside_approximation_regime"] is False


def test_pval_flags_outside_regime(capsys):
    code, out, err = run(capsys, "pval", "--test", "ost", "--n", 2, "--t-star", 0, "--kg", 4)
    assert code == 0 and json.loads(out)["outside_approximation_regime"] is True
    assert "outside" in err


def test_pval_welch_from_data(capsys, tmp_path):
    data = tmp_path / "xy.txt"
    data.write_text("0.1 1.3\n-0.2 0.4 2.2\n")
    res = run_json(capsys, "pval", "--test", "welch", "--n1", 2, "--n2", 3, "--data", data,
                   "--density", '{"kind": "iid", "family": "normal", "n": 5}')
    assert {"p_welch", "welch_df", "p_raw"} <= set(res)
    assert res["kg"] == pytest.approx(1.2423, abs=1e-4)


def test_exit_codes(capsys, tmp_path, monkeypatch):
    assert run(capsys, "kg", "--test", "ost", "--n", 2, "--density", "{bad")[0] == 2
    assert run(capsys, "kg", "--test", "ost", "--n", 3, "--density", CAUCHY2)[0] == 2
    data = tmp_path / "c.txt"
    data.write_text("1 1 1\n")
    assert run(capsys, "pval", "--test", "ost", "--n", 3, "--data", data, "--kg", 1)[0] == 4
    assert run(capsys, "simulate", "--scenario", "fig2-cauchy-n2", "--zoom", 10 ** 6)[0] == 5
    pv = tmp_path / "p.txt"
    pv.write_text("0.5\n0.9\n")
    assert run(capsys, "estimate", "--pvalues", pv, "--tau", 0.1)[0] == 7

    def diverge(*a, **k):
        raise DivergenceError("radial integral diverges")

    def noisy(*a, **k):
        raise FiniteDifferenceError("too noisy")

    monkeypatch.setattr(cli, "compute_kg", diverge)
    assert run(capsys, "kg", "--test", "ost", "--n", 2, "--density", CAUCHY2)[0] == 3
    monkeypatch.setattr(cli, "error_bounds", noisy)
    assert run(capsys, "bounds", "--test", "ost", "--n", 3, "--density", NORMAL3, "--u", 10)[0] == 6


def test_simulate_csv_threads_identical(capsys):
    argv = ["simulate", "--scenario", "fig2-cauchy-n2", "--zoom", 10, "--seed", 7]
    code1, out1, _ = run(capsys, *argv, "--threads", 1)
    code8, out8, _ = run(capsys, *argv, "--threads", 8)
    assert code1 == code8 == 0
    assert out1 == out8
    assert out1.splitlines()[0] == "q,ecdf_raw,ecdf_corrected"


def test_simulate_welch_files(capsys, tmp_path):
    out = tmp_path / "w.csv"
    pv = tmp_path / "p.txt"
    code, _, _ = run(capsys, "simulate", "--scenario", "fig5-welch-2-3", "--zoom", 10,
                     "--output", out, "--pvalues-out", pv)
    assert code == 0
    assert out.read_text().splitlines()[0] == "q,ecdf_raw,ecdf_corrected,ecdf_welch"
    side = json.loads((tmp_path / "w.csv.json").read_text())
    assert side["n_samples"] == 100_000 and side["schema"] == "tailcorrect/1"
    res = run_json(capsys, "estimate", "--pvalues", pv, "--tau", 1e-2)
    assert res["n_total"] == 100_000
    assert abs(res["kg_hat"] - 1.2423) < 4 * res["standard_error"]


def test_simulate_json_and_custom_density(capsys):
    res = run_json(capsys, "simulate", "--test", "ost", "--n", 3, "--density", NORMAL3,
                   "--zoom", 1, "--samples", 5000, "--grid-points", 4, "--format", "json")
    assert len(res["grid"]) == 4 and res["kg"] == pytest.approx(1.0)


def test_bounds_reports(capsys):
    a = run_json(capsys, "bounds", "--test", "ost", "--n", 3, "--density", NORMAL3, "--u", 10)
    b = run_json(capsys, "bounds", "--test", "ost", "--n", 3, "--density", NORMAL3, "--u", 20)
    assert a["triple"] == [2, 1, 2]
    assert a["d"] > b["d"] > 0
    res = run_json(capsys, "bounds", "--test", "tst", "--n1", 2, "--n2", 3, "--u", 10,
                   "--density", '{"kind": "iid", "family": "normal", "n": 5}')
    assert res["triple"] == [2, 1, 3]


def test_estimate_uniform_and_flag(capsys, tmp_path):
    import numpy as np
    rng = np.random.default_rng(0)
    path = tmp_path / "u.txt"
    path.write_text("\n".join("%.17g" % v for v in rng.uniform(size=50_000)))
    res = run_json(capsys, "estimate", "--pvalues", path, "--tau", 0.05)
    assert abs(res["kg_hat"] - 1) < 3 * res["standard_error"]
    path.write_text("\n".join("%.17g" % v for v in rng.uniform(size=50_000) ** 3))
    code, out, err = run(capsys, "estimate", "--pvalues", path, "--tau", 0.9)
    assert code == 0 and json.loads(out)["inconsistent"] is True and "warning" in err


def test_scenarios_listing(capsys):
    res = run_json(capsys, "scenarios")
    assert len(res["scenarios"]) >= 39


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "tailcorrect.cli", "pval", "--test", "ost", "--n", "2",
                           "--t-star", "1", "--kg", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["p_raw"] == pytest.approx(0.25)
