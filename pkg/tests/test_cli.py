import csv
import json

import pytest

from hbnmem import __version__
from hbnmem.cli import CONFIG_ENV, main


def _body(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def _rows(path):
    return list(csv.DictReader(_body(path)))


def _meta(path):
    return dict(ln[2:].split(": ", 1) for ln in path.read_text().splitlines() if ln.startswith("# "))


def test_simulate_default(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["summary"]["efficiency"] >= 0.95
    assert summary["meta"]["tool"] == f"hbnmem {__version__}"
    assert "window" in summary["meta"]["config"]
    rows = _rows(tmp_path / "trajectory.csv")
    assert float(rows[-1]["P(s,0)"]) == pytest.approx(summary["summary"]["efficiency"])


def test_simulate_no_coupling(tmp_path):
    assert main(["simulate", "--g", "0", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["summary"]["efficiency"] <= 1e-6


@pytest.mark.parametrize("argv", [
    ["simulate", "--omega0", "-1"],
    ["simulate", "--T", "0"],
    ["kappa", "--threshold", "1.5"],
    ["match", "--tol", "-1"],
    ["screen", "--qmax", "0"],
])
def test_validation_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_argparse_usage_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_kappa(tmp_path):
    assert main(["kappa", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "kappa.json").read_text())["kappa"]
    assert res["kappa_max"] == pytest.approx(0.06, abs=0.01)
    assert res["window_policy"]["p_g"] == 0.999
    assert main(["kappa", "--threshold", "0.999", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "kappa.json").read_text())["kappa"]["kappa_max"] == pytest.approx(0, abs=1e-6)


def test_bandwidth_coarse_grid_exit_3(tmp_path, capsys):
    assert main(["bandwidth", "--max", "1", "--step", "0.5", "--out", str(tmp_path)]) == 3
    assert "half maximum" in capsys.readouterr().err


def test_bandwidth_small_grid(tmp_path):
    assert main(["bandwidth", "--max", "8", "--step", "1", "--check-symmetry", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "bandwidth.json").read_text())["bandwidth"]
    assert 3 < res["sigma_delta"] < 8
    assert res["max_asymmetry"] < 1e-6
    rows = _rows(tmp_path / "efficiency_vs_detuning.csv")
    assert [float(r["delta"]) for r in rows] == [float(x) for x in range(-8, 9)]


def test_fom_seed(tmp_path, published):
    assert main(["fom", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "fom.csv")
    assert len(rows) == 25
    pub = {(r["defect_label"], r["transition_spin"]): r for r in published}
    ok = 0
    for r in rows:
        p = pub[(r["defect_label"], r["transition_spin"])]
        q_ok = abs(float(r["Q"]) / p["Q"] - 1) <= 0.10
        d_ok = p["delta_ghz"] == 0 or abs(float(r["bandwidth_ghz"]) / p["delta_ghz"] - 1) <= 0.10
        ok += q_ok and d_ok
    assert ok >= 20
    meta = _meta(tmp_path / "fom.csv")
    assert "seed_v1.csv" in json.loads(meta["inputs"])


def test_fom_row_level_error(tmp_path):
    db = tmp_path / "db.csv"
    db.write_text(
        "host,defect_label,spin_multiplicity,transition_spin,zpl_nm,mu_x_debye,mu_y_debye,mu_z_debye,"
        "lifetime_ns,source\n"
        "hBN,Ge_NV_N,triplet,up,555.1,,,,54.7,x\n"
        "hBN,S_BV_B,triplet,down,591.1,,,,,x\n"
    )
    out = tmp_path / "out"
    assert main(["fom", "--db", str(db), "--out", str(out)]) == 0
    rows = _rows(out / "fom.csv")
    assert rows[0]["error"] == "" and float(rows[0]["Q"]) > 0
    assert "no FoM inputs" in rows[1]["error"]
    digest = json.loads(_meta(out / "fom.csv")["inputs"])[str(db)]
    assert len(digest) == 64


def test_sigma_delta_override_via_config(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"constants": {"kappa_hat": 0.06, "sigma_delta": 3.1}}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert main(["fom", "--out", str(tmp_path / "a")]) == 0
    monkeypatch.delenv(CONFIG_ENV)
    assert main(["fom", "--out", str(tmp_path / "b")]) == 0
    a = _rows(tmp_path / "a" / "fom.csv")[0]
    b = _rows(tmp_path / "b" / "fom.csv")[0]
    assert float(a["bandwidth_ghz"]) == pytest.approx(float(b["bandwidth_ghz"]) / 2)
    assert json.loads(_meta(tmp_path / "a" / "fom.csv")["config"])["sigma_delta"] == 3.1


def test_bad_config_exit_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["fom", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    cfg.write_text(json.dumps({"mystery": 1}))
    assert main(["fom", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_file_exit_4(tmp_path):
    assert main(["fom", "--db", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 4


def test_deterministic_output(tmp_path):
    for d in ("a", "b"):
        assert main(["fom", "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "fom.csv").read_bytes()
    b = (tmp_path / "b" / "fom.csv").read_bytes()
    assert a == b
    assert main(["fom", "--timestamp", "--out", str(tmp_path / "c")]) == 0
    c = tmp_path / "c" / "fom.csv"
    assert "generated" in _meta(c)
    assert _body(c) == _body(tmp_path / "a" / "fom.csv")


def test_ingest_roundtrip_and_errors(tmp_path):
    assert main(["ingest", "--out", str(tmp_path)]) == 0
    again = tmp_path / "again"
    assert main(["ingest", "--db", str(tmp_path / "records.csv"), "--out", str(again)]) == 0
    assert (again / "records.csv").read_bytes() == (tmp_path / "records.csv").read_bytes()
    bad = tmp_path / "bad.csv"
    bad.write_text((tmp_path / "records.csv").read_text() + "hBN,X_Q,triplet,up,600,,,,1,x\n")
    assert main(["ingest", "--db", str(bad), "--out", str(tmp_path / "bad")]) == 2


def test_match_and_screen(tmp_path, capsys):
    assert main(["match", "--tol", "0", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "matches.csv")) == 1
    assert main(["screen", "--qmax", "1e7", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "screen.json").read_text())
    assert sorted(tuple(r["key"]) for r in res["rejected"]) == [("Al_BV_N^{+1}", "up"), ("In_BV_N^{+1}", "up")]


def test_report_without_sweep(tmp_path):
    assert main(["report", "--skip-sweep", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())["report"]
    assert rep["writing_efficiency"] >= 0.95
    assert len(rep["kappa_max_sensitivity"]) >= 5
    assert rep["efficiency_at_kappa_hat"]["efficiency"] > 0.5
