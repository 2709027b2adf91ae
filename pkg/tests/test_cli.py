import json

import numpy as np
import pytest

from fixscope.cli import main, parse_lags
from fixscope.fixmap import FixationMap, read_map, write_map
from fixscope.synth import Kind, Scenario, generate


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def sp_map(tmp_path):
    path = tmp_path / "sp.fxm"
    assert run("synth", "--scenario", "smooth-pursuit", "--dims", "12x16x40", "--seed", 1, "--out", path) == 0
    return path


def test_parse_lags():
    assert parse_lags("1-3,8") == (1, 2, 3, 8)
    assert parse_lags("4,2") == (2, 4)


def test_synth_writes_expected_map(sp_map):
    assert read_map(sp_map) == generate(Scenario(Kind.SMOOTH_PURSUIT, depth=40, seed=1))


def test_synth_gaze_then_build(tmp_path):
    out, gaze = tmp_path / "cb.fxm", tmp_path / "cb.txt"
    assert run("synth", "--scenario", "center-bias", "--dims", "12x16x10", "--out", out, "--emit-gaze", gaze) == 0
    assert (tmp_path / "cb.meta").read_text().startswith("width=16 height=12")
    rebuilt = tmp_path / "rebuilt.fxm"
    assert run("build", "--gaze", gaze, "--meta", tmp_path / "cb.meta", "--frames", 10, "--out", rebuilt) == 0
    assert read_map(rebuilt) == read_map(out)


def test_build_multi_subject_with_scale(tmp_path):
    meta = tmp_path / "rec.meta"
    meta.write_text("width=640 height=480 fps=30 hz=240\n")
    (tmp_path / "s1.txt").write_text("0 319 239 FIX\n1 319 239 SAC\n8 10 10 SP\n")
    (tmp_path / "s2.txt").write_text("# subject 2\n0 320 240 FIX\n9 639 479 BLINK\n")
    out = tmp_path / "m.fxm"
    assert run("build", "--gaze", tmp_path / "s1.txt", "--gaze", tmp_path / "s2.txt", "--meta", meta,
               "--frames", 2, "--out", out, "--scale", "40x40") == 0
    fmap = read_map(out)
    assert fmap.shape == (2, 12, 16)
    assert fmap.frame(0)[5, 7] == 1 and fmap.frame(0)[6, 8] == 1 and fmap.frame(1)[0, 0] == 1


def test_build_data_errors(tmp_path):
    meta = tmp_path / "rec.meta"
    meta.write_text("width=640 height=480 fps=30 hz=240\n")
    (tmp_path / "bad.txt").write_text("0 700 10 FIX\n")
    args = ["build", "--gaze", tmp_path / "bad.txt", "--meta", meta, "--frames", 1, "--out", tmp_path / "o.fxm"]
    assert run(*args) == 2
    assert run(*args, "--skip-oob") == 0
    (tmp_path / "late.txt").write_text("0 1 1 FIX\n80 1 1 FIX\n")
    args = ["build", "--gaze", tmp_path / "late.txt", "--meta", meta, "--frames", 2, "--out", tmp_path / "o.fxm"]
    assert run(*args) == 2
    assert run(*args, "--truncate") == 0
    (tmp_path / "junk.txt").write_text("0 x 1 FIX\n")
    assert run("build", "--gaze", tmp_path / "junk.txt", "--meta", meta, "--frames", 1,
               "--out", tmp_path / "o.fxm") == 2


def test_rescale_command(tmp_path):
    src = tmp_path / "a.fxm"
    write_map(FixationMap.from_dense(np.ones((2, 4, 6), dtype=np.uint16)), src)
    assert run("rescale", "--map", src, "--scale", "2x3", "--out", tmp_path / "b.fxm") == 0
    assert (read_map(tmp_path / "b.fxm").dense() == 6).all()
    assert run("rescale", "--map", src, "--scale", "5x5", "--out", tmp_path / "c.fxm") == 2
    assert run("rescale", "--map", src, "--scale", "five", "--out", tmp_path / "c.fxm") == 1


def test_analyze_happy_path(sp_map, tmp_path):
    out = tmp_path / "report"
    assert run("analyze", "--map", sp_map, "--out", out, "--distances", "1,2,4,8", "--seed", 3) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["temporal_pair"]["distances"] == [1, 2, 4, 8]
    assert (out / "temporal_pair.csv").read_text().startswith("D,mi_bits\n1,")
    assert (out / "temporal_window.csv").read_text().startswith("N,mi_bits\n")
    heat = (out / "spatial_mi.csv").read_text().splitlines()
    assert heat[0] == "m,n,mi_bits" and heat[1] == "0,0," and len(heat) == 1 + 12 * 16
    pgm = (out / "spatial_mi.pgm").read_text().splitlines()
    assert pgm[0] == "P2" and pgm[1].startswith("# max_mi_bits=") and pgm[2] == "16 12" and pgm[3] == "255"
    assert max(int(v) for line in pgm[4:] for v in line.split()) == 255


def test_analyze_usage_and_data_errors(tmp_path, capsys):
    assert run("analyze", "--out", tmp_path) == 1
    assert "usage" in capsys.readouterr().err
    bad = tmp_path / "bad.fxm"
    bad.write_bytes(b"NOPE" + bytes(16) + bytes(2))
    assert run("analyze", "--map", bad, "--out", tmp_path / "r") == 2
    assert "magic" in capsys.readouterr().err
    assert run() == 1
    assert run("frobnicate") == 1


def test_analyze_infeasible_distance(sp_map, tmp_path):
    assert run("analyze", "--map", sp_map, "--out", tmp_path / "r", "--distances", "1,30") == 2


def _manifest(tmp_path, rows):
    path = tmp_path / "manifest.csv"
    path.write_text("".join(f"{p},{c}\n" for p, c in rows))
    return path


def test_batch_structure(tmp_path):
    maps = []
    for i, kind in enumerate(["smooth-pursuit", "center-bias", "iid-frames"]):
        p = tmp_path / f"v{i}.fxm"
        assert run("synth", "--scenario", kind, "--dims", "12x16x30", "--seed", i, "--out", p) == 0
        maps.append(p.name)
    manifest = _manifest(tmp_path, [(maps[0], "sports"), (maps[1], "games"), (maps[2], "games")])
    out = tmp_path / "out"
    assert run("batch", "--manifest", manifest, "--out", out) == 0
    table = (out / "entropy_table.csv").read_text().splitlines()
    assert table[0].startswith("video,category,h_x,h_x_given_z,h_x_given_u")
    assert len(table) == 4
    assert sorted(p.name for p in out.glob("category_*")) == [
        "category_games_pair.csv", "category_games_window.csv",
        "category_sports_pair.csv", "category_sports_window.csv"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["videos"] == 3 and summary["categories"] == ["games", "sports"]


def test_batch_identical_maps_category_equals_video(tmp_path, sp_map):
    manifest = _manifest(tmp_path, [(sp_map, "a"), (sp_map, "a")])
    out = tmp_path / "out"
    assert run("batch", "--manifest", manifest, "--out", out, "--distances", "1-5") == 0
    video = json.loads(next((out / "videos").glob("000_*.json")).read_text())
    cat = (out / "category_a_pair.csv").read_text().splitlines()[1:]
    assert [float(line.split(",")[1]) for line in cat] == video["temporal_pair"]["mi_bits"]


def test_batch_errors(tmp_path, sp_map):
    assert run("batch", "--manifest", _manifest(tmp_path, []), "--out", tmp_path / "o") == 1
    manifest = _manifest(tmp_path, [(sp_map, "a"), ("missing.fxm", "b")])
    assert run("batch", "--manifest", manifest, "--out", tmp_path / "o") == 2
    assert run("batch", "--manifest", tmp_path / "nope.csv", "--out", tmp_path / "o") == 2


def test_batch_replication_mode(tmp_path, sp_map, capsys):
    manifest = _manifest(tmp_path, [(sp_map, "a")])
    assert run("batch", "--manifest", manifest, "--out", tmp_path / "o", "--replication") == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["replication"]["reference_mean_bits"] == 0.0815
    assert "reference" in capsys.readouterr().err


def test_thread_cap(monkeypatch, tmp_path, sp_map):
    monkeypatch.setenv("FIXSCOPE_THREADS", "1")
    assert run("batch", "--manifest", _manifest(tmp_path, [(sp_map, "a")]), "--out", tmp_path / "o") == 0
    monkeypatch.setenv("FIXSCOPE_THREADS", "many")
    assert run("batch", "--manifest", _manifest(tmp_path, [(sp_map, "a")]), "--out", tmp_path / "o") == 1
