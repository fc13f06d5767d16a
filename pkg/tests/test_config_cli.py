import json

import pytest

from torusbif import cli
from torusbif.config import parse_config
from torusbif.continuation import Branch
from torusbif.errors import ConfigError


def write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, 'multiplier = "fractional"\ns = 0.5\np = 2\nN = 128\n'))
    assert (cfg.s, cfg.p, cfg.N) == (0.5, 2.0, 128)
    assert cfg.kmax == 2 and cfg.format == "csv"


def test_nested_tables_and_aliases(tmp_path):
    text = '[problem]\nmultiplier = "ilw"\ndelta = 1.0\nn = 32\n[diagram]\nkmax = 1\n"lambda-max" = 2.0\n'
    cfg = parse_config(write(tmp_path, text))
    assert cfg.multiplier == "ilw" and cfg.N == 32 and cfg.lambda_max == 2.0


def test_overrides_win(tmp_path):
    cfg = parse_config(write(tmp_path, "s = 0.75\n"), {"s": 1.0})
    assert cfg.s == 1.0


@pytest.mark.parametrize("bad,field", [({"s": 0.3}, "s:"), ({"p": 1.5}, "p:")])
def test_invalid_exponents_rejected(bad, field):
    with pytest.raises(ConfigError) as info:
        parse_config(None, bad)
    assert any(e.startswith(field) for e in info.value.errors)


def test_all_errors_reported_together(tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config(write(tmp_path, 's = 0.1\np = 1.0\nbogus = 3\nN = "many"\n'))
    errs = " ".join(info.value.errors)
    for key in ("s:", "p:", "bogus", "N:"):
        assert key in errs


def test_malformed_toml(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "s = = 1\n"))


def test_table_violating_monotonicity_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config(None, {"multiplier": "table", "table": [0, 2, 1, 3], "m0": 0.5, "m1": 4, "N": 3})
    assert any("M2" in e for e in info.value.errors)


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert cli.main(["spectrum", "--out", out]) == 0
    assert cli.main(["solve", "--s", "0.2", "--out", out]) == 2
    assert cli.main(["oracle", "--lambda", "0.5", "--out", out]) == 2  # lambda not in either family
    assert cli.main(["bounds-check", "--out", out]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_cli_spectrum_output(tmp_path, capsys):
    out = tmp_path / "o"
    cli.main(["spectrum", "--kmax", "3", "--s", "1", "--out", str(out)])
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "k,sigma,lambda_ddot"
    assert [float(line.split(",")[1]) for line in lines[1:]] == [0, 1, 4, 9]


def test_cli_oracle_json(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["oracle", "--lambda", "2", "--k", "1", "--format", "json", "--n", "64", "--out", str(out)]) == 0
    doc = json.loads((out / "oracle.json").read_text())
    assert doc["lambda"] == 2.0 and len(doc["a"]) == 65


def test_cli_branch_and_bounds_check(tmp_path):
    out = tmp_path / "o"
    args = ["--n", "32", "--lambda-max", "1.5", "--out", str(out)]
    assert cli.main(["branch", "--k", "1", "--amplitude", "0.1", *args]) == 0
    br = Branch.loads((out / "branch_k1p.json").read_text())
    assert br.points[-1].lam == pytest.approx(1.5)
    assert cli.main(["bounds-check", "--branch", str(out / "branch_k1p.json"), "--out", str(out)]) == 0
    rows = (out / "bounds.csv").read_text().splitlines()
    assert len(rows) == len(br) + 1


def test_cli_evolve(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["evolve", "--lambda", "2", "--n", "64", "--t-end", "0.2", "--snapshot-every", "20", "--out", str(out)]) == 0
    summary = json.loads((out / "evolve_summary.json").read_text())
    assert summary["mass_drift"] == 0.0
    assert summary["snapshots"] == len(list(out.glob("evolve_*.csv")))


def run_small_diagram(out, workers):
    args = ["diagram", "--n", "32", "--kmax", "2", "--lambda-min", "-3", "--lambda-max", "3"]
    assert cli.main([*args, "--workers", str(workers), "--out", str(out)]) == 0
    return json.loads((out / "summary.json").read_text())


def test_diagram_topology_and_determinism(tmp_path):
    one = run_small_diagram(tmp_path / "a", 1)
    two = run_small_diagram(tmp_path / "b", 3)
    assert (tmp_path / "a" / "diagram.csv").read_text() == (tmp_path / "b" / "diagram.csv").read_text()
    names = [b["name"] for b in one["branches"]]
    assert names == [b["name"] for b in two["branches"]]
    assert {"trivial", "constant_pos", "constant_neg", "C1p", "C1m", "C2p", "C2m", "T_C1p"} <= set(names)
    by = {b["name"]: b for b in one["branches"]}
    assert all(b["error"] is None for b in one["branches"])
    trivial_bps = [e["lambda"] for e in by["trivial"]["events"] if e["type"] == "BranchPoint"]
    assert trivial_bps == pytest.approx([0, 1, 2], abs=1e-6)
    # the mirrored k=1 family lives at lambda < -1
    mirrored = Branch.loads((tmp_path / "a" / "branch_T_C1p.json").read_text())
    assert mirrored.lambdas.max() < -1 and mirrored.lambdas.min() >= -3


def test_diagram_kmax_zero(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["diagram", "--n", "16", "--kmax", "0", "--out", str(out)]) == 0
    names = [b["name"] for b in json.loads((out / "summary.json").read_text())["branches"]]
    assert names == ["trivial", "constant_pos", "constant_neg"]


def test_diagram_ilw_branch_point(tmp_path):
    out = tmp_path / "o"
    args = ["--multiplier", "ilw", "--delta", "1", "--kmax", "1", "--n", "32", "--lambda-min", "-1", "--lambda-max", "1"]
    assert cli.main(["diagram", *args, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    trivial = next(b for b in summary["branches"] if b["name"] == "trivial")
    import math
    found = [e["lambda"] for e in trivial["events"] if e["type"] == "BranchPoint"]
    assert any(abs(v - (1 / math.tanh(1) - 1)) < 1e-6 for v in found)


def test_verify_under_resolved_reports_truncation(tmp_path, capsys):
    assert cli.main(["verify", "--n", "8", "--out", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "verify.json").read_text())
    assert not report["passed"]
    assert "TruncationOverflow" in capsys.readouterr().out


def test_verify_rejects_bad_table_before_solving(tmp_path, capsys):
    args = ["verify", "--multiplier", "table", "--m0", "0.5", "--m1", "4", "--n", "3"]
    path = tmp_path / "t.toml"
    path.write_text("table = [0.0, 2.0, 1.0, 3.0]\n")
    assert cli.main([*args, "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "M2" in capsys.readouterr().err
    assert not (tmp_path / "verify.json").exists()
