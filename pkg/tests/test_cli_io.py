import json

import numpy as np
import pytest

from zorich import cli
from zorich import io as zio

CONSTANT_KEYS = {"a", "m", "M", "alpha", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9",
                 "eta", "delta", "q", "H"}


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = cli.main(["run", *args, "--out", str(out)])
    report = out / "report.json"
    return code, out, (json.loads(report.read_text()) if report.exists() else None)


def test_pgm_roundtrip(tmp_path):
    img = (np.arange(12, dtype=np.uint8) * 20).reshape(3, 4)
    zio.write_pgm(str(tmp_path / "a.pgm"), img)
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 3\n255\n")
    assert np.array_equal(zio.read_pgm(str(tmp_path / "a.pgm")), img)


def test_json_cleaning():
    text = zio.dumps({"b": np.float64(1.5), "a": [np.int64(2), float("inf")], "big": 3 ** 50,
                      "arr": np.array([1.0, 2.0]), "flag": np.bool_(True)})
    d = json.loads(text)
    assert d == {"a": [2, "inf"], "arr": [1.0, 2.0], "b": 1.5, "big": str(3 ** 50), "flag": True}
    assert text.endswith("\n") and text.index('"a"') < text.index('"b"')


def test_parsers():
    assert zio.parse_range("1:4:10") == (1.0, 4.0, 10)
    assert zio.parse_floats("1,2.5,-3", 3) == [1.0, 2.5, -3.0]
    assert zio.parse_int_range("3:7") == [3, 4, 5, 6, 7]
    assert zio.parse_int_range("4") == [4]
    for bad in ("1:2", "3:1:5", "1:2:0"):
        with pytest.raises(ValueError):
            zio.parse_range(bad)
    with pytest.raises(ValueError):
        zio.parse_floats("1,2", 3)
    with pytest.raises(ValueError):
        zio.parse_int_range("5:3")


def test_derive_report(tmp_path):
    code, out, rep = run(tmp_path, "derive")
    assert code == 0
    assert CONSTANT_KEYS <= set(rep["constants"])
    assert (out / "config.json").exists()


def test_config_file_roundtrip(tmp_path):
    run(tmp_path, "derive")
    cfg_path = tmp_path / "out" / "config.json"
    code, _, rep = run(tmp_path, "endpoint", "--config", str(cfg_path))
    assert code == 0 and rep["error_bound"] < 1e-8


def test_render_slice(tmp_path, monkeypatch):
    monkeypatch.setenv("ZORICH_THREADS", "2")
    code, out, rep = run(tmp_path, "render-slice", "--pixels", "32", "--budget", "30")
    assert code == 0
    img = zio.read_pgm(str(out / "slice.pgm"))
    assert img.shape == (32, 32)
    assert sum(rep["counts"].values()) == 32 * 32
    assert rep["planar_agreement"] > 0.99


def test_trace_hair_csv(tmp_path):
    code, out, rep = run(tmp_path, "trace-hair", "--t", "1:5:30")
    assert code == 0 and rep["injective"] and rep["flagged"] == 0
    rows = (out / "hair.csv").read_text().splitlines()
    assert rows[0] == "t,x1,x2,x3,depth,error_bound" and len(rows) == 31
    x3 = [float(r.split(",")[3]) for r in rows[1:]]
    assert all(b > a for a, b in zip(x3, x3[1:]))


def test_classify(tmp_path):
    code, out, rep = run(tmp_path, "classify", "--point", "0,0,0")
    assert code == 0 and rep["verdicts"][0]["verdict"] == "Basin"
    assert (out / "verdicts.csv").read_text().startswith("x1,x2,x3,verdict,index\n")


def test_boxdim_calibration(tmp_path):
    code, _, rep = run(tmp_path, "boxdim", "--set", "plane", "--scales", "1:5")
    assert code == 0 and abs(rep["slope"] - 2) < 0.1


def test_karpinska_reports_trend(tmp_path):
    code, _, rep = run(tmp_path, "karpinska")
    assert code == 0
    assert rep["first_k_below_one"] == 5 and rep["decreasing"] is False


def test_access_path(tmp_path):
    code, out, rep = run(tmp_path, "access-path", "--depth", "5")
    assert code == 0 and rep["basin_fraction"] == 1.0
    assert (out / "access.csv").exists()


def test_mcmullen(tmp_path):
    code, _, rep = run(tmp_path, "mcmullen", "--samples", "4000")
    assert code == 0 and rep["increasing"]
    assert len(rep["densities"]) == 5


def test_family7(tmp_path):
    code, _, rep = run(tmp_path, "family7")
    assert code == 0
    assert {fp["n"]: fp["kind"] for fp in rep["fixed_points"]}[6] == "attracting"


@pytest.mark.parametrize("args", [
    ["family7", "--params", '{"t": 0.7}'],
    ["trace-hair", "--t", "1:x:3"],
    ["trace-hair", "--itinerary", "not-json"],
    ["render-slice", "--plane", "y=0"],
    ["classify"],
    ["derive", "--alpha", "1.5"],
])
def test_invalid_config_exit_1(tmp_path, args):
    code, _, _ = run(tmp_path, *args)
    assert code == 1


def test_bad_thread_count(tmp_path, monkeypatch):
    monkeypatch.setenv("ZORICH_THREADS", "0")
    code, _, _ = run(tmp_path, "render-slice", "--pixels", "8")
    assert code == 1


def test_experiment_failure_exit_2(tmp_path):
    # a tolerance below what the depth cap can certify is an invariant failure
    code, _, rep = run(tmp_path, "trace-hair", "--t", "1:2:5", "--tol", "1e-30")
    assert code == 2 and rep["flagged"] > 0
