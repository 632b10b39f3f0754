import json

import numpy as np
import pytest

from overparam.expcli.cli import main
from overparam.expcli.suite import rule_equivalence_gap, verify_suite, worked_example_gap
from overparam.matcore import full_svd, kron
from overparam.optim import precond_eigenvalue, precond_matrix


def off_by_one_precond(w_e, n):
    """Right-hand exponent uses j instead of j - 1."""
    k, d = w_e.shape
    u, s, v = full_svd(w_e)
    sl = np.zeros(k)
    sr = np.zeros(d)
    sl[: s.size] = s
    sr[: s.size] = s
    out = np.zeros((k * d, k * d))
    for r in range(k):
        for rp in range(d):
            lam = sum(sl[r] ** (2 * (n - j) / n) * sr[rp] ** (2 * j / n) for j in range(1, n + 1))
            vec = kron(v[:, rp:rp + 1], u[:, r:r + 1])
            out += lam * vec @ vec.T
    return out


def test_reference_precond_passes():
    assert rule_equivalence_gap(50, 1) <= 1e-10
    assert precond_eigenvalue(1.0, 1.0, 3) == 3.0


def test_mutation_is_caught():
    assert rule_equivalence_gap(50, 1, precond=off_by_one_precond) > 1e-3
    assert worked_example_gap(off_by_one_precond) > 1e-3
    report = verify_suite(precond=off_by_one_precond, include_slow=False)
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert not report["passed"] and "rule_equivalence" in failed


def test_quick_suite_report_format():
    report = verify_suite(include_slow=False)
    assert report["passed"], [c for c in report["checks"] if not c["passed"]]
    names = [c["name"] for c in report["checks"]]
    assert len(names) == len(set(names)) >= 15
    for c in report["checks"]:
        assert set(c) >= {"name", "tolerance", "measured", "passed"}
    json.dumps(report, default=float)


def test_suite_aggregates_failures():
    def broken(w_e, n):
        raise RuntimeError("boom")

    report = verify_suite(precond=broken, include_slow=False)
    failed = {c["name"]: c for c in report["checks"] if not c["passed"]}
    assert not report["passed"]
    assert set(failed) == {"rule_equivalence", "worked_example"}
    assert "boom" in failed["rule_equivalence"]["error"]


def write_config(tmp_path, **overrides):
    raw = {
        "problem": {"kind": "synth_gaussian", "d": 4, "m": 20, "seed": 0},
        "p": 2,
        "model": {"depth": 2, "hidden": [1], "init": "gaussian", "std": 0.3},
        "optimizer": {"kind": "gd", "eta": 0.05},
        "iters": 50,
        **overrides,
    }
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(raw))
    return f


def test_cli_run_and_plot(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path), "--stem", "a"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] in ("converged", "budget exhausted")
    assert (tmp_path / "a.csv").exists() and (tmp_path / "a.json").exists()
    assert main(["plot", "--out", str(tmp_path / "a.svg"), str(tmp_path / "a.csv")]) == 0
    assert (tmp_path / "a.svg").read_text().count("<polyline") == 1


def test_cli_grid(tmp_path, capsys):
    cfg = write_config(tmp_path, iters=300)
    assert main(["grid", "--config", str(cfg), "--rates", "0.01,0.1", "--out", str(tmp_path / "g")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["table"]) == 2


def test_cli_curve(capsys):
    assert main(["curve", "--n", "3", "--m", "1024"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "non-conservative"
    assert main(["curve", "--n", "1", "--m", "1024"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "conservative-consistent"


def test_cli_verify_quick(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "--quick", "--report", str(report)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS ") for line in lines)
    assert json.loads(report.read_text())["passed"] is True


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"problem": {"kind": "nope"}}')
    assert main(["run", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["grid", "--config", str(bad), "--rates", "-1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    assert main(["curve", "--n", "3", "--dim", "1"]) == 2
    assert main(["plot", "--out", str(tmp_path / "x.svg"), str(tmp_path / "none.csv")]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_cli_divergent_run_exits_nonzero(tmp_path, capsys):
    cfg = write_config(tmp_path, optimizer={"kind": "gd", "eta": 100.0}, model={"depth": 1})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_cli_dataset_missing(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("OVERPARAM_DATA", raising=False)
    cfg = write_config(tmp_path, problem={"kind": "uci_ethanol"}, model={"depth": 1})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert main(["--data", str(tmp_path / "nowhere"), "run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
