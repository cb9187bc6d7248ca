import csv
import hashlib
import json

import pytest

from tracksweep.cli import main


def _sha(p):
    return hashlib.sha256(p.read_bytes()).hexdigest()


def _gen(out, *extra):
    args = ["gen", "--frames", "5", "--targets", "4", "--clutter", "200", "--jitter", "0.5",
            "--seed", "7", "--out", str(out), *extra]
    assert main(args) == 0
    return out / "points.csv", out / "gt.json"


@pytest.fixture(scope="module")
def scene(tmp_path_factory):
    return _gen(tmp_path_factory.mktemp("scene"))


def test_gen_writes_expected_rows(scene, tmp_path):
    pts, gt = scene
    with open(pts) as fh:
        assert sum(1 for _ in csv.reader(fh)) - 1 == 1020
    assert (pts.parent / "manifest.json").exists()
    again, _ = _gen(tmp_path)
    assert _sha(again) == _sha(pts)


def test_gen_without_targets(tmp_path):
    _, gt = _gen(tmp_path, "--targets", "0")
    assert json.loads(gt.read_text())["tracks"] == []


def test_detect_ts_and_ps_identical(scene, tmp_path):
    pts, _ = scene
    for method in ("ts", "ps"):
        assert main(["detect", "--input", str(pts), "--method", method, "--select", "topk:4",
                     "--out", str(tmp_path / f"{method}.json")]) == 0
    assert (tmp_path / "ts.json").read_bytes() == (tmp_path / "ps.json").read_bytes()
    manifest = json.loads((tmp_path / "ts.manifest.json").read_text())
    assert manifest["command"] == "detect" and str(pts) in manifest["inputs"]


def test_detect_threshold_keeps_long_tracks(scene, tmp_path):
    pts, _ = scene
    out = tmp_path / "t.json"
    assert main(["detect", "--input", str(pts), "--select", "thresh:3", "--out", str(out)]) == 0
    tracks = json.loads(out.read_text())["tracks"]
    assert tracks and all(len(t["point_ids"]) >= 4 for t in tracks)


def test_eval_perfect_and_lambda_check(scene, tmp_path, capsys):
    pts, gt = scene
    out = tmp_path / "m.json"
    assert main(["eval", "--pred", str(gt), "--gt", str(gt), "--points", str(pts),
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    for level in ("tau", "d"):
        assert doc[level]["recall"] == doc[level]["precision"] == doc[level]["f1"] == 1.0
    assert main(["eval", "--pred", str(gt), "--gt", str(gt), "--points", str(pts),
                 "--lambda", "0"]) == 2


def test_exit_codes(scene, tmp_path):
    pts, gt = scene
    assert main(["detect", "--input", str(pts), "--method", "naive",
                 "--out", str(tmp_path / "n.json")]) == 4
    assert main(["detect", "--input", str(pts), "--eps1", "-1", "--out", str(tmp_path / "x.json")]) == 2
    assert main(["detect", "--input", str(pts), "--select", "best", "--out", str(tmp_path / "x.json")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["detect", "--input", str(bad), "--out", str(tmp_path / "x.json")]) == 3
    assert main(["detect", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x.json")]) == 3
    assert main(["bench", "--sizes", "400,200"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["detect", "--method", "kalman"])
    assert info.value.code == 2


def test_bench_output_schema(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--sizes", "100,200", "--repeats", "1", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["method", "n", "median_seconds", "slope_fit"]
    assert [r[:2] for r in rows[1:]] == [["ts", "100"], ["ts", "200"], ["ts", ""]]
    assert (tmp_path / "bench.manifest.json").exists()
