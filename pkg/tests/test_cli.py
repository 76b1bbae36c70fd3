import csv
import io
import json
import subprocess
import sys

import pytest

from dualdvfs.cli import main
from dualdvfs.characterization import data_dir
from dualdvfs.workload import load_trace


def _config(tmp_path, **doc):
    doc.setdefault("profile", "tabla")
    doc.setdefault("trace", {"generate": {"n_steps": 512}})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return p


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_writes_three_files(tmp_path, capsys):
    cfg = _config(tmp_path)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["manifest.json", "steps.csv", "summary.json"]
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["profile"] == "tabla"
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert {f["path"] for f in manifest["files"]} == {"steps.csv", "summary.json"}
    assert "proposed" in capsys.readouterr().out


def test_missing_profile_is_config_error(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"trace": {"generate": {"n_steps": 128}}}))
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "profile" in capsys.readouterr().err


def test_unknown_key_and_bad_scheme(tmp_path):
    assert main(["run", str(_config(tmp_path, colour="red")), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", str(_config(tmp_path, schemes=["warp"])), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", str(_config(tmp_path, profile="nope")), "--out", str(tmp_path / "o")]) == 2


def test_margin_too_small_is_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, predictor={"m": 10, "margin_t": 0.05})
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "margin cannot discriminate adjacent bins" in capsys.readouterr().err


def test_runs_are_byte_identical(tmp_path):
    cfg = _config(tmp_path)
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--out", str(tmp_path / d), "--seed", "7"]) == 0
    for name in ("steps.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_flag_is_honoured(tmp_path):
    cfg = _config(tmp_path)
    main(["run", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["run", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "steps.csv").read_bytes() != (tmp_path / "b" / "steps.csv").read_bytes()
    manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert manifest["seed"] == 2


def test_trace_file_config(tmp_path):
    (tmp_path / "t.csv").write_text("load\n" + "0.5\n" * 100)
    cfg = _config(tmp_path, trace={"file": "t.csv"}, schemes=["proposed", "pg"])
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = _rows((tmp_path / "o" / "steps.csv").read_text())
    assert {r["scheme"] for r in rows} == {"proposed", "pg"}
    assert len(rows) == 200


def test_sweep_workload_dominance(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--axis", "workload", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    by = {}
    for r in rows:
        by.setdefault(r["value"], {})[r["scheme"]] = float(r["power_w"])
    assert len(by) == 19
    for v in by.values():
        assert v["proposed"] <= v["core-only"] <= v["freq-only"]
        assert v["proposed"] <= v["bram-only"] <= v["freq-only"]


def test_sweep_jobs_same_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--axis", "alpha", "--out", str(a)])
    main(["sweep", "--axis", "alpha", "--out", str(b), "--jobs", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_alpha_zero_floors_bram(tmp_path):
    out = tmp_path / "s.csv"
    main(["sweep", "--axis", "alpha", "--schemes", "proposed", "--out", str(out)])
    row = [r for r in _rows(out.read_text()) if float(r["value"]) == 0.0][0]
    assert float(row["v_bram"]) == 0.50


def test_beta_trend(tmp_path):
    out = tmp_path / "s.csv"
    main(["sweep", "--axis", "beta", "--out", str(out)])
    by = {}
    for r in _rows(out.read_text()):
        by.setdefault(float(r["value"]), {})[r["scheme"]] = float(r["power_w"])
    betas = sorted(by)
    core = [by[b]["core-only"] / by[b]["freq-only"] for b in betas]
    bram = [by[b]["bram-only"] / by[b]["freq-only"] for b in betas]
    assert all(x < y for x, y in zip(core, core[1:]))
    assert all(x > y for x, y in zip(bram, bram[1:]))


def test_gen_trace(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["gen-trace", "--out", str(out)]) == 0
    trace = load_trace(out)
    assert len(trace) == 4096
    meta = json.loads((tmp_path / "t.meta.json").read_text())
    assert meta["seed"] == 42 and meta["hurst"] == 0.76
    assert main(["gen-trace", "--out", str(out), "--hurst", "0.5"]) == 2


def test_validate_curves(tmp_path, capsys):
    good = data_dir() / "default_curves.csv"
    assert main(["validate-curves", str(good)]) == 0
    text = good.read_text().replace("logic,delay,0.500,", "logic,delay,x,", 1)
    bad = tmp_path / "bad.csv"
    bad.write_text(text)
    assert main(["validate-curves", str(bad)]) != 0
    assert "row 2" in capsys.readouterr().err


def test_data_dir_env(tmp_path, monkeypatch):
    import shutil
    shutil.copytree(data_dir(), tmp_path / "data")
    prof = json.loads((tmp_path / "data" / "profiles" / "tabla.json").read_text())
    prof["name"] = "custom"
    (tmp_path / "data" / "profiles" / "custom.json").write_text(json.dumps(prof))
    monkeypatch.setenv("DUALDVFS_DATA_DIR", str(tmp_path / "data"))
    cfg = _config(tmp_path, profile="custom")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dualdvfs", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "gen-trace" in res.stdout
