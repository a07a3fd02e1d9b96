import json
import math

import numpy as np
import pytest

from neumannlab.cli import main


def test_solve_subcritical(tmp_path):
    code = main(
        ["solve", "--p", "3", "--q", "3", "--dim", "1", "--n", "600", "--outdir", str(tmp_path)]
    )
    assert code == 0
    payload = json.loads((tmp_path / "solution.json").read_text())
    assert payload["converged"] is True
    assert payload["Lambda"] * payload["D"] == pytest.approx(1.0, rel=1e-12)
    for name in ("u.csv", "v.csv"):
        raw = (tmp_path / name).read_bytes()
        assert raw.startswith(b"r,value\r\n")
        assert raw.count(b"\r\n") == 602
    # 17 significant digits requested for diffable output
    first = (tmp_path / "u.csv").read_text().splitlines()[1]
    assert len(first.split(",")[1].replace("-", "").replace(".", "").split("e")[0]) >= 16


def test_solve_sign_case_reports_zero_radius(tmp_path):
    code = main(["solve", "--p", "0", "--q", "1", "--dim", "2", "--n", "800", "--outdir", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "solution.json").read_text())
    assert payload["zero_radius"] == pytest.approx(2.0 ** -0.5, abs=3e-3)


def test_solve_rejects_hyperbola(tmp_path, capsys):
    code = main(["solve", "--p", "1", "--q", "1", "--n", "300", "--outdir", str(tmp_path)])
    assert code == 1
    assert "hyperbola" in capsys.readouterr().err


def test_solve_nonconvergence_exit_code(tmp_path):
    code = main(
        ["solve", "--p", "2", "--q", "3", "--n", "300", "--max-iter", "2", "--outdir", str(tmp_path)]
    )
    assert code == 2
    payload = json.loads((tmp_path / "solution.json").read_text())
    assert payload["converged"] is False  # partial output still written


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 3.0, "q": 3.0, "n": 600}))
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["solve", "--config", str(cfg), "--outdir", str(out1)]) == 0
    assert main(["solve", "--config", str(cfg), "--n", "1000", "--outdir", str(out2)]) == 0
    n1 = json.loads((out1 / "solution.json").read_text())["config"]["n"]
    n2 = json.loads((out2 / "solution.json").read_text())["config"]["n"]
    assert (n1, n2) == (600, 1000)


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 3.0, "q": 3.0, "bogus": 1}))
    assert main(["solve", "--config", str(cfg), "--outdir", str(tmp_path)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_env_seed_override(tmp_path, monkeypatch):
    monkeypatch.setenv("NEUMANN_LAB_SEED", "17")
    assert main(["solve", "--p", "3", "--q", "3", "--n", "600", "--outdir", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "solution.json").read_text())
    assert payload["config"]["seed"] == 17


def test_table1_command(tmp_path):
    assert main(["table1", "--outdir", str(tmp_path)]) == 0
    lines = (tmp_path / "table1.csv").read_bytes().split(b"\r\n")
    assert lines[0] == b"N,h1,h2,h1_minus_h2"
    assert len([ln for ln in lines if ln]) == 7


def test_sweep_command(tmp_path):
    code = main(
        [
            "sweep",
            "--path",
            "p:1.5..3,q:1",
            "--samples",
            "6",
            "--n",
            "400",
            "--outdir",
            str(tmp_path),
        ]
    )
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("t,p,q,Lambda")
    ps = [float(r.split(",")[1]) for r in rows[1:] if r]
    assert ps == sorted(ps)
    summary = json.loads((tmp_path / "sweep.json").read_text())
    assert summary["failed"] == 0
    assert summary["config"]["path"] == "p:1.5..3,q:1"


def test_sweep_rejects_bad_path(tmp_path, capsys):
    assert main(["sweep", "--path", "z:1..2", "--outdir", str(tmp_path)]) == 1


def test_asympt_command(tmp_path):
    assert main(["asympt", "--nmin", "2", "--nmax", "12", "--outdir", str(tmp_path)]) == 0
    rows = (tmp_path / "asympt.csv").read_text().splitlines()
    assert len(rows) == 12  # header + 11 dimensions
    assert rows[1].startswith("2,1,table")
    assert rows[-1].startswith("12,1,bound")


def test_oracle_command(tmp_path, capsys):
    code = main(
        ["oracle", "--n", "9", "--p", "2", "--q", "3", "--restarts", "16", "--outdir", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "relative gap" in out
    payload = json.loads((tmp_path / "oracle.json").read_text())
    assert payload["relative_gap"] <= 1e-6
