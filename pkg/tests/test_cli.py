import json
import subprocess
import sys
from pathlib import Path

import pytest

from atomsg.cli import UsageError, main, parse_int_list, parse_range
from atomsg.io import read_csv, read_state

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    r = parse_range("0:50:200")
    assert len(r) == 200 and r[0] == 0.0 and r[-1] == 50.0
    for bad in ("0:1", "a:b:3", "0:1:1", "2:1:5", "-1:1:5"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_parse_int_list():
    assert parse_int_list("10, 28,60") == [10, 28, 60]
    with pytest.raises(UsageError):
        parse_int_list("10,x")


def test_beta_closed_shells(tmp_path, capsys):
    code, out, _ = run(["beta", "--closed-shells", 6, "--out", tmp_path], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "beta.csv")
    assert [int(r["Z"]) for r in rows] == [10, 28, 60, 110, 182]
    for r in rows:
        assert int(r["numerator"]) * 2 == int(r["Z"]) * int(r["denominator"])
    fit = json.loads(out)
    assert fit["r_squared"] >= 0.999 and fit["slope"] == pytest.approx(0.5)
    assert (tmp_path / "fig1.svg").stat().st_size > 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man["outputs"]) == {"beta.csv", "beta_fit.json", "fig1.svg"}


def test_beta_open_shell_is_usage_error(tmp_path, capsys):
    code, _, err = run(["beta", "--z-list", "10,11", "--out", tmp_path], capsys)
    assert code == 2
    assert "10, 28" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["beta"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2
    capsys.readouterr()


def test_potential_sources(tmp_path, capsys):
    code, out, _ = run(["potential", "--Z", 10, "--omega", "0:5:6", "--sources", "closed,quad,mc",
                        "--samples", 20000, "--out", tmp_path], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["max_rel_dev_quad"] < 1e-10
    assert summary["max_rel_dev_mc"] < 0.05
    mc = read_csv(tmp_path / "potential_mc.csv")
    assert list(mc[0]) == ["omega", "value", "source", "stderr"]
    assert mc[0]["source"] == "monte-carlo"
    comp = read_csv(tmp_path / "potential_compare.csv")
    assert len(comp) == 6


def test_potential_bad_inputs(tmp_path, capsys):
    assert run(["potential", "--Z", 11, "--out", tmp_path], capsys)[0] == 2
    assert run(["potential", "--Z", 10, "--sources", "exact", "--out", tmp_path], capsys)[0] == 2
    assert run(["potential", "--Z", 10, "--omega", "0:1:1", "--out", tmp_path], capsys)[0] == 2


def test_oracle_command(tmp_path, capsys):
    code, out, _ = run(["oracle", "--Z", 10, "--omega", "0:50:11", "--mc-points", 2,
                        "--samples", 50000, "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads(out)["passed"]
    rows = read_csv(tmp_path / "oracle.csv")
    assert len(rows) == 11
    assert sum(r["mc"] != "" for r in rows) == 2


def test_oracle_tolerance_failure_exit(tmp_path, capsys):
    code, out, _ = run(["oracle", "--Z", 28, "--omega", "0.5:2:3", "--tolerance", 1e-30,
                        "--out", tmp_path], capsys)
    assert code == 3
    assert not json.loads(out)["passed"]


def test_kappa(capsys, tmp_path):
    code, out, _ = run(["kappa", "--Z", 79, "--A", 197, "--out", tmp_path / "k.json"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["kappa1"] < 1e-4 and rec["kappa2"] < 1e-3
    assert json.loads((tmp_path / "k.json").read_text()) == rec


def test_kappa_hydrogen_and_bad_a(capsys):
    code, out, _ = run(["kappa", "--Z", 1, "--A", 1], capsys)
    assert code == 2 and "error" in json.loads(out)
    assert run(["kappa", "--Z", 10, "--A", 5], capsys)[0] == 2


def test_masses(capsys):
    code, out, _ = run(["masses", "--Z", 2, "--A", 4], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["M_atom"] == pytest.approx(rec["M_nucleus"] + 2)


def test_simulate_shipped_config(tmp_path, capsys):
    code, out, _ = run(["simulate", CONFIGS / "coupled-small.toml", "--out", tmp_path], capsys)
    assert code == 0
    s = json.loads(out)
    assert s["min_branch_overlap"] <= 1 - 1e-3
    assert s["final_purity"] < 1 - 1e-4
    assert s["max_norm_drift"] <= 1e-10
    rows = read_csv(tmp_path / "metrics.csv")
    assert list(rows[0]) == ["time", "branch_overlap", "purity", "separation", "x_plus", "x_minus", "norm"]
    assert len(rows) == s["snapshots"]


def test_simulate_config_errors(tmp_path, capsys):
    text = (CONFIGS / "no-coupling.toml").read_text()
    missing = tmp_path / "missing.toml"
    missing.write_text(text.replace("cm = 20.0", ""))
    code, _, err = run(["simulate", missing, "--out", tmp_path / "o"], capsys)
    assert code == 2 and "masses.cm" in err
    unstable = tmp_path / "unstable.toml"
    unstable.write_text(text.replace("dt = 0.005", "dt = 0.5"))
    code, _, err = run(["simulate", unstable, "--out", tmp_path / "o"], capsys)
    assert code == 4 and "time.dt" in err


def test_simulate_state_dump(tmp_path, capsys):
    text = (CONFIGS / "no-coupling.toml").read_text().replace("total = 4.0", "total = 0.2")
    cfg = tmp_path / "dump.toml"
    cfg.write_text(text + "\n[output]\ndump_states = true\n")
    assert run(["simulate", cfg, "--out", tmp_path / "o"], capsys)[0] == 0
    files = sorted((tmp_path / "o" / "states").glob("*.atsg"))
    assert len(files) == 3
    assert read_state(files[0]).shape == (128, 32, 2)


def test_transforms_selftest(capsys):
    code, out, _ = run(["transforms-selftest", "--trials", 20], capsys)
    assert code == 0 and json.loads(out)["passed"]


def _tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.mark.parametrize("argv", [
    ["beta", "--closed-shells", "6"],
    ["potential", "--Z", "28", "--omega", "0:10:20", "--sources", "closed,quad,mc", "--samples", "10000"],
    ["oracle", "--Z", "10", "--omega", "0:50:8", "--mc-points", "2", "--samples", "20000"],
    ["simulate", str(CONFIGS / "no-coupling.toml")],
])
def test_cli_outputs_byte_identical(argv, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    trees = []
    for name in ("a", "b"):
        assert main(argv + ["--out", str(tmp_path / name)]) == 0
        trees.append(_tree(tmp_path / name))
    capsys.readouterr()
    assert trees[0].keys() == trees[1].keys()
    for k in trees[0]:
        assert trees[0][k] == trees[1][k], k


def test_entry_point():
    res = subprocess.run([sys.executable, "-m", "atomsg.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "atomsg" in res.stdout
