import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

import otkit
from otkit import io
from otkit.cli import main
from otkit.measures import DiscreteMeasure, GridDensity

from conftest import bump_2d

A, B = otkit.data_path("bump_a.csv"), otkit.data_path("bump_b.csv")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out) if out.strip() else None, err


@pytest.fixture
def files(tmp_path):
    io.write_discrete(tmp_path / "m.json", DiscreteMeasure([[0.1], [0.5], [0.9]], [0.2, 0.3, 0.5]))
    io.write_pgm(tmp_path / "p.pgm", bump_2d(16, (0.35, 0.4)))
    io.write_pgm(tmp_path / "q.pgm", bump_2d(16, (0.6, 0.6)))
    io.write_grid_csv(tmp_path / "u.csv", GridDensity(np.ones((16, 16))))
    io.write_discrete(tmp_path / "s.json", DiscreteMeasure([[0.25, 0.5], [0.75, 0.5]], [0.25, 0.75]))
    return tmp_path


def test_dist_lp_self_is_zero(capsys, files):
    code, res, _ = run_json(capsys, "dist", "--method", "lp", "--a", str(files / "m.json"), "--b", str(files / "m.json"))
    assert code == 0 and res["value"] == 0.0 and res["diagnostics"]["certified"]


def test_dist_sinkhorn_relative_alpha_close_to_lp(capsys):
    _, lp, _ = run_json(capsys, "dist", "--method", "lp", "--a", A, "--b", B)
    code, sk, _ = run_json(capsys, "dist", "--method", "sinkhorn", "--alpha", "0.001", "--relative-alpha", "--a", A, "--b", B)
    assert code == 0
    assert sk["diagnostics"]["alpha"] == pytest.approx(0.001 * (63.0 / 64.0) ** 2)
    assert abs(sk["value"] - lp["value"]) <= 0.01 * lp["value"]


def test_missing_b_names_flag(capsys):
    code, _, err = run(capsys, "dist", "--method", "lp", "--a", A)
    assert code == 1 and "--b" in err


def test_input_failure_modes(capsys, files):
    code, _, err = run(capsys, "dist", "--method", "nope", "--a", A, "--b", B)
    assert code == 1 and "--method" in err
    code, _, err = run(capsys, "dist", "--method", "lp", "--a", str(files / "missing.json"), "--b", B)
    assert code == 1 and "--a" in err
    (files / "bad.json").write_text("{not json")
    code, _, err = run(capsys, "dist", "--method", "lp", "--a", A, "--b", str(files / "bad.json"))
    assert code == 1 and "--b" in err
    code, _, err = run(capsys, "dist", "--method", "dynamic", "--a", A, "--b", str(files / "p.pgm"))
    assert code == 1 and "--b" in err
    code, _, err = run(capsys, "dist", "--method", "cdf1d", "--a", str(files / "p.pgm"), "--b", str(files / "q.pgm"))
    assert code == 1
    code, _, err = run(capsys)
    assert code == 1


def test_nonconvergence_exit_2(capsys):
    code, res, _ = run_json(capsys, "dist", "--method", "dynamic", "--iters", "10", "--a", A, "--b", B)
    assert code == 2 and res["converged"] is False and np.isfinite(res["value"])
    code, res, _ = run_json(capsys, "dist", "--method", "sinkhorn", "--alpha", "1e-4", "--iters", "2", "--a", A, "--b", B)
    assert code == 2


def test_json_roundtrip_and_precision(capsys):
    code, out, _ = run(capsys, "dist", "--method", "cdf1d", "--a", A, "--b", B, "--json")
    payload = json.loads(out)
    assert json.loads(json.dumps(payload, sort_keys=True)) == payload
    assert json.dumps(payload, sort_keys=True) + "\n" == out
    digits = len(repr(payload["value"]).replace("0.", "", 1).lstrip("0").split("e")[0].replace(".", ""))
    assert digits <= 12


def test_env_defaults_and_flag_precedence(capsys, monkeypatch):
    monkeypatch.setenv("OT_ALPHA", "0.5")
    code, res, _ = run_json(capsys, "dist", "--method", "sinkhorn", "--a", A, "--b", B)
    assert res["diagnostics"]["alpha"] == 0.5
    code, res, _ = run_json(capsys, "dist", "--method", "sinkhorn", "--alpha", "0.1", "--a", A, "--b", B)
    assert res["diagnostics"]["alpha"] == 0.1
    monkeypatch.setenv("OT_ALPHA", "abc")
    code, _, err = run(capsys, "dist", "--method", "sinkhorn", "--a", A, "--b", B)
    assert code == 1 and "OT_ALPHA" in err


def test_compare_bundled_1d(capsys):
    code, res, _ = run_json(capsys, "compare", "--a", A, "--b", B)
    assert code == 0
    names = [r["method"] for r in res["methods"]]
    assert {"cdf1d", "lp", "sinkhorn", "dynamic"} <= set(names)
    assert res["relative_deviation"]["cdf1d-lp"] <= 1e-9


def test_compare_identical_inputs(capsys):
    code, res, _ = run_json(capsys, "compare", "--a", A, "--b", A, "--alpha", "0.001")
    floors = {"cdf1d": 1e-12, "lp": 1e-12, "sinkhorn": 2e-3, "conv": 2e-3, "dynamic": 1e-6}
    for row in res["methods"]:
        assert row["value"] <= floors[row["method"]], row


def test_compare_2d_drops_cdf1d(capsys, files):
    code, res, _ = run_json(capsys, "compare", "--a", str(files / "p.pgm"), "--b", str(files / "q.pgm"),
                            "--methods", "lp,sinkhorn,cdf1d")
    assert code == 0
    assert [r["method"] for r in res["methods"]] == ["lp", "sinkhorn"]


def test_compare_needs_two_methods(capsys, files):
    code, _, err = run(capsys, "compare", "--a", A, "--b", B, "--methods", "lp")
    assert code == 1


def test_plan_export(capsys, files):
    out = files / "plan.csv"
    code, res, _ = run_json(capsys, "plan", "--a", str(files / "m.json"), "--b", A, "--out", str(out))
    assert code == 0 and res["certified"]
    T = io.read_plan_csv(out, (3, 64))
    np.testing.assert_allclose(T.sum(axis=1), [0.2, 0.3, 0.5], atol=1e-12)


def test_interpolate_three_frames(capsys, files):
    out = files / "frames"
    code, res, _ = run_json(capsys, "interpolate", "--a", A, "--b", B, "--nt", "2", "--out", str(out))
    assert code == 0
    names = sorted(p.name for p in out.glob("frame_*.pgm"))
    assert names == ["frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"]
    f0 = io.read_pgm(out / "frame_0000.pgm")
    a = io.read_grid_csv(A)
    np.testing.assert_allclose(f0.values, a.values, atol=a.values.max() / 65535 * 2)
    report = json.loads((out / "report.json").read_text())
    assert report["frames"] == names and "w2sq" in report


def test_barycenter_degenerate_weights(capsys, files):
    for method in ("conv", "sinkhorn"):
        out = files / f"bar_{method}.csv"
        code, _, _ = run_json(capsys, "barycenter", "--method", method, "--alpha", "0.0005", "--inputs",
                              str(files / "p.pgm"), str(files / "q.pgm"), "--weights", "1,0", "--out", str(out))
        assert code == 0
        bar, p = io.read_grid_csv(out), io.read_pgm(files / "p.pgm")
        np.testing.assert_allclose(bar.values, p.values, atol=1e-6 * p.values.max())
    code, _, err = run(capsys, "barycenter", "--inputs", str(files / "p.pgm"), "--weights", "1,2", "--out",
                       str(files / "x.csv"))
    assert code == 1 and "--weights" in err


def test_stipple_single_point_and_determinism(capsys, files):
    code, res, _ = run_json(capsys, "stipple", "--density", str(files / "u.csv"), "--n", "1",
                            "--out", str(files / "st" / "one"))
    assert code == 0
    pts = json.loads((files / "st" / "one.json").read_text())["points"]
    np.testing.assert_allclose(pts, [[0.5, 0.5]], atol=1e-9)
    assert (files / "st" / "one.svg").read_text().startswith("<svg")
    outs = []
    for k in range(2):
        run_json(capsys, "stipple", "--density", str(files / "p.pgm"), "--n", "20", "--seed", "4",
                 "--iters", "5", "--out", str(files / f"r{k}"))
        outs.append((files / f"r{k}.json").read_bytes())
    assert outs[0] == outs[1]


def test_semidiscrete_command(capsys, files):
    out = files / "sd.json"
    code, res, _ = run_json(capsys, "semidiscrete", "--sites", str(files / "s.json"), "--density",
                            str(files / "u.csv"), "--out", str(out))
    assert code == 0
    np.testing.assert_allclose(res["masses"], [0.25, 0.75], atol=1e-9)
    feats = res["cells"]["features"]
    assert len(feats) == 2 and feats[0]["geometry"]["type"] == "Polygon"
    xs = [p[0] for p in feats[0]["geometry"]["coordinates"][0]]
    assert max(xs) == pytest.approx(0.25, abs=1e-9)
    assert json.loads(out.read_text())["w2sq"] == res["w2sq"]


@pytest.mark.skipif(shutil.which("ot") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ot", "dist", "--method", "cdf1d", "--a", A, "--b", B, "--json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["method"] == "cdf1d"
    proc = subprocess.run([sys.executable, "-m", "otkit.cli", "dist", "--a", A], capture_output=True, text=True)
    assert proc.returncode == 1 and "--b" in proc.stderr
