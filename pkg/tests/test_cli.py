"""Config-driven runs: artifacts, exit codes, echo completeness, determinism."""

import json
from pathlib import Path

import numpy as np

from geodesics.cli import DEFAULTS, main

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def small_sphere_config(tmp_path, **extra):
    doc = {
        "mode": "sweepout",
        "backend": {"name": "sphere"},
        "discretization": {"grid_res": 8, "m": 64},
        "sweepout": {"map": "identity"},
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(extra)
    return write_config(tmp_path, doc)


def report_of(outdir):
    with open(Path(outdir) / "report.json") as fh:
        return json.load(fh)


def test_sphere_run_artifacts(tmp_path):
    cfg = small_sphere_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    rep = report_of(out)
    assert rep["success"] is True
    assert abs(rep["result"]["candidate_length"] - 2 * np.pi) < 0.01 * 2 * np.pi
    assert (out / "trace.csv").read_text().startswith("iteration,c,")
    cand = json.loads((out / "candidate.curve.json").read_text())
    assert cand["backend"] == "sphere"
    assert cand["closed"] is True


def _leaf_keys(d, prefix=""):
    keys = []
    for k, v in d.items():
        here = f"{prefix}.{k}" if prefix else k
        if isinstance(v, dict):
            keys.extend(_leaf_keys(v, here))
        else:
            keys.append(here)
    return keys


def test_echo_lists_every_default(tmp_path):
    cfg = small_sphere_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    echo = report_of(tmp_path / "out")["config"]
    for key in _leaf_keys(DEFAULTS):
        node = echo
        for part in key.split("."):
            assert part in node, f"defaulted field {key} missing from echo"
            node = node[part]
    assert "epsilon_used" in echo["backend"]


def test_misspelled_mode_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, {"mode": "sweeput"})
    assert main(["run", "--config", str(cfg)]) == 1
    assert "mode" in capsys.readouterr().err


def test_unknown_field_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, {"mode": "sweepout", "gridres": 3})
    assert main(["run", "--config", str(cfg)]) == 1
    assert "gridres" in capsys.readouterr().err


def test_missing_seeds_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, {"mode": "systole",
                                  "backend": {"name": "torus"}})
    assert main(["run", "--config", str(cfg)]) == 1
    assert "seeds" in capsys.readouterr().err


def test_set_override(tmp_path):
    cfg = small_sphere_config(tmp_path)
    assert main(["run", "--config", str(cfg),
                 "--set", "discretization.m=96"]) == 0
    assert report_of(tmp_path / "out")["config"]["discretization"]["m"] == 96


def test_set_unknown_path_exits_1(tmp_path, capsys):
    cfg = small_sphere_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--set", "nope.x=1"]) == 1
    assert "nope.x" in capsys.readouterr().err


def test_shipped_torus_systole(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(CONFIGS / "torus_systole.json"),
                 "--set", f"output_dir={out}"]) == 0
    rep = report_of(out)
    assert abs(rep["result"]["length"] - 1.0) < 1e-6
    lens = sorted(s["length"] for s in rep["result"]["seeds"])
    assert abs(lens[0] - 1.0) < 1e-6
    assert abs(lens[1] - np.sqrt(2)) < 1e-6
    assert (out / "trace.csv").read_text().startswith("iteration,length,")


def test_shipped_cube_belt_writes_obj(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(CONFIGS / "cube_belt_shorten.json"),
                 "--set", f"output_dir={out}"]) == 0
    rep = report_of(out)
    assert abs(rep["result"]["length"] - 4.0) < 1e-3
    obj = (out / "candidate.obj").read_text().splitlines()
    verts = [ln for ln in obj if ln.startswith("v ")]
    lines = [ln for ln in obj if ln.startswith("l ")]
    assert len(verts) >= 3
    assert len(lines) == 1
    idx = [int(x) for x in lines[0].split()[1:]]
    assert idx[0] == idx[-1] == 1  # closed polyline
    assert max(idx) == len(verts)


def test_collapse_exits_2(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(CONFIGS / "collapse_sphere.json"),
                 "--set", f"output_dir={out}"]) == 2
    rep = report_of(out)
    assert rep["error"]["type"] == "FamilyCollapsed"
    assert rep["success"] is False
    assert "FamilyCollapsed" in capsys.readouterr().err


def test_certify_mode(tmp_path):
    m = 64
    t = np.arange(m) / m
    curve = {"backend": "torus", "closed": True,
             "points": [[float(ti), 0.25] for ti in t]}
    cfg = write_config(tmp_path, {
        "mode": "certify",
        "backend": {"name": "torus"},
        "seeds": [curve],
        "output_dir": str(tmp_path / "out"),
    })
    assert main(["run", "--config", str(cfg)]) == 0
    rep = report_of(tmp_path / "out")
    assert rep["result"]["certified"]["passed"] is True


def test_unconverged_systole_exits_2(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, {
        "mode": "systole",
        "backend": {"name": "torus"},
        "seeds": [{"file": str(CONFIGS / "seeds" / "torus_h.curve.json")}],
        "limits": {"max_iter": 1},
        "output_dir": str(out),
    })
    assert main(["run", "--config", str(cfg)]) == 2
    rep = report_of(out)
    assert rep["error"]["type"] == "NoneConverged"
    assert "NoneConverged" in capsys.readouterr().err


def test_unconverged_shorten_exits_2(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", str(CONFIGS / "cube_belt_shorten.json"),
                 "--set", f"output_dir={out}",
                 "--set", "limits.max_iter=1",
                 "--set", "tolerances.tol_length=1e-16"])
    assert code == 2
    rep = report_of(out)
    assert rep["result"]["status"] == "MaxIter"
    assert rep["success"] is False


def _stripped_report_bytes(outdir):
    lines = (Path(outdir) / "report.json").read_bytes().splitlines()
    return b"\n".join(ln for ln in lines
                      if b'"timestamp"' not in ln
                      and b'"runtime_seconds"' not in ln)


def test_reports_are_deterministic(tmp_path):
    cfg = small_sphere_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    first = _stripped_report_bytes(tmp_path / "out")
    assert main(["run", "--config", str(cfg)]) == 0
    second = _stripped_report_bytes(tmp_path / "out")
    assert first == second
