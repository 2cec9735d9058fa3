import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tenscomp.cli import main, parse_dims
from tenscomp.formats import read_samples, read_tensor, write_tensor
from tenscomp.sweep import CSV_HEADER, read_sweep_csv

FAST = ["--gamma", "10", "--max-iters", "60", "--rounds", "2"]


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def small(tmp_path, capsys):
    t = tmp_path / "t.tns"
    s = tmp_path / "s.smp"
    assert run(["generate", "--dims", "8x6x3", "--rank", "2", "--smoothness", "2",
                "--noise-db", "0.5", "--seed", "3", "--out", t], capsys)[0] == 0
    assert run(["sample", "--tensor", t, "--fraction", "0.3", "--seed", "3", "--out", s],
               capsys)[0] == 0
    return t, s


def test_parse_dims():
    assert parse_dims("30x30x3") == (30, 30, 3)
    assert parse_dims("7") == (7,)
    for bad in ["30x", "0x3", "axb", ""]:
        with pytest.raises(Exception):
            parse_dims(bad)


def test_generate_reads_back(tmp_path, capsys):
    out = tmp_path / "t.tns"
    code, _, _ = run(["generate", "--dims", "30x30x3", "--rank", "3", "--seed", "1",
                      "--out", out], capsys)
    assert code == 0
    assert read_tensor(out).shape == (30, 30, 3)


def test_generate_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.tns", tmp_path / "b.tns"
    for p in (a, b):
        run(["generate", "--dims", "9x7x2", "--rank", "2", "--noise-db", "1", "--seed", "5",
             "--out", p], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_generate_invalid_rank(tmp_path, capsys):
    code, _, err = run(["generate", "--dims", "4x4", "--rank", "9", "--out",
                        tmp_path / "t.tns"], capsys)
    assert code != 0
    assert "rank" in err
    assert not (tmp_path / "t.tns").exists()


def test_sample_counts(tmp_path, capsys):
    t = tmp_path / "t.tns"
    run(["generate", "--dims", "30x30x3", "--seed", "1", "--out", t], capsys)
    code, out, _ = run(["sample", "--tensor", t, "--fraction", "0.05", "--seed", "2",
                        "--out", tmp_path / "s"], capsys)
    assert code == 0 and out.strip() == "135"
    assert len(read_samples(tmp_path / "s")) == 135
    run(["sample", "--tensor", t, "--fraction", "1.0", "--out", tmp_path / "all"], capsys)
    assert len(read_samples(tmp_path / "all")) == 2700


def test_sample_missing_tensor(tmp_path, capsys):
    code, _, err = run(["sample", "--tensor", tmp_path / "nope.tns", "--fraction", "0.1",
                        "--out", tmp_path / "s"], capsys)
    assert code != 0 and "nope.tns" in err


def test_unknown_method_prints_usage(small, tmp_path, capsys):
    _, s = small
    with pytest.raises(SystemExit) as info:
        main(["complete", "--samples", str(s), "--method", "magic", "--out", str(tmp_path / "x")])
    assert info.value.code != 0
    assert "usage" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tenscomp", "generate", "--dims", "3x3",
                           "--rank", "5", "--out", str(tmp_path / "t")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout == "" and "rank" in proc.stderr


def test_rank_one_recovery(tmp_path, capsys):
    t, s, x = tmp_path / "t.tns", tmp_path / "s.smp", tmp_path / "x.tns"
    run(["generate", "--dims", "30x30", "--rank", "1", "--smoothness", "0", "--seed", "7",
         "--out", t], capsys)
    run(["sample", "--tensor", t, "--fraction", "0.6", "--seed", "7", "--out", s], capsys)
    code, _, _ = run(["complete", "--samples", s, "--method", "rank", "--out", x,
                      "--report", tmp_path / "r.txt"], capsys)
    assert code == 0
    assert "termination" in (tmp_path / "r.txt").read_text()
    code, out, _ = run(["evaluate", "--estimate", x, "--truth", t, "--samples", s], capsys)
    assert code == 0 and float(out) <= -30


def test_zero_alpha_l2tv_matches_rank(tmp_path, capsys):
    t, s = tmp_path / "t.tns", tmp_path / "s.smp"
    run(["generate", "--dims", "8x6x3", "--rank", "2", "--smoothness", "2", "--noise-db", "0.5",
         "--seed", "5", "--out", t], capsys)
    run(["sample", "--tensor", t, "--fraction", "0.3", "--seed", "5", "--out", s], capsys)
    tight = ["--gamma", "300", "--max-iters", "3000", "--inner-tol", "1e-8", "--rounds", "3"]
    run(["complete", "--samples", s, "--method", "rank", "--out", tmp_path / "a", *tight], capsys)
    run(["complete", "--samples", s, "--method", "l2tv", "--alpha", "0", "--out",
         tmp_path / "b", *tight], capsys)
    a, b = read_tensor(tmp_path / "a"), read_tensor(tmp_path / "b")
    assert np.linalg.norm(a - b) / np.linalg.norm(a) <= 10 * 1e-8


def test_complete_needs_parameters(small, tmp_path, capsys):
    _, s = small
    for method in ("l2tv", "rbf"):
        code, _, err = run(["complete", "--samples", s, "--method", method, "--out",
                            tmp_path / "x"], capsys)
        assert code != 0 and "needs" in err
    code, _, err = run(["complete", "--samples", s, "--method", "l1tv", "--alpha", "1,2",
                        "--out", tmp_path / "x"], capsys)
    assert code != 0


def test_complete_is_byte_identical(small, tmp_path, capsys):
    _, s = small
    for name in ("a", "b"):
        run(["complete", "--samples", s, "--method", "l1tv", "--alpha", "0.1,0.2,0.3",
             "--out", tmp_path / name, "--report", tmp_path / f"{name}.txt", *FAST], capsys)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert (tmp_path / "a.txt").read_text() == (tmp_path / "b.txt").read_text()


def test_tune_then_complete(small, tmp_path, capsys):
    _, s = small
    params = tmp_path / "p.json"
    argv = ["tune", "--samples", s, "--method", "l2tv", "--grid-spec",
            '{"alphas": [0.01, 1.0]}', "--seed", "4", "--out-params", params, *FAST]
    code, out1, _ = run(argv, capsys)
    assert code == 0
    first = params.read_text()
    code, out2, _ = run(argv, capsys)
    assert out1 == out2 and params.read_text() == first
    data = json.loads(first)
    assert len(data["table"]) == 2
    assert data["params"]["alphas"] in ([0.01] * 3, [1.0] * 3)
    code, _, _ = run(["complete", "--samples", s, "--method", "l2tv", "--params", params,
                      "--out", tmp_path / "x", *FAST], capsys)
    assert code == 0 and read_tensor(tmp_path / "x").shape == (8, 6, 3)


def test_tune_single_candidate(small, tmp_path, capsys):
    _, s = small
    grid = tmp_path / "grid.json"
    grid.write_text('{"epsilons": [2.5]}')
    code, out, _ = run(["tune", "--samples", s, "--method", "rbf", "--grid-spec", grid], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "best\tepsilon=2.5"


def test_tune_empty_grid(small, tmp_path, capsys):
    _, s = small
    grid = tmp_path / "grid.json"
    grid.write_text('{"alphas": []}')
    code, _, err = run(["tune", "--samples", s, "--method", "l1tv", "--grid-spec", grid], capsys)
    assert code != 0 and "candidates" in err


def test_evaluate(small, tmp_path, capsys):
    t, s = small
    code, out, _ = run(["evaluate", "--estimate", t, "--truth", t, "--samples", s], capsys)
    assert code == 0 and out.strip() == "-inf"
    write_tensor(np.zeros((8, 6, 3)), tmp_path / "z")
    code, out, _ = run(["evaluate", "--estimate", tmp_path / "z", "--truth", t], capsys)
    assert float(out) == 0.0


def test_sweep_cardinality_and_reparse(small, tmp_path, capsys):
    t, _ = small
    csv_path = tmp_path / "sweep.csv"
    argv = ["sweep", "--truth", t, "--fractions", "0.1,0.2,0.3", "--seeds", "1,2,3",
            "--alpha-grid", "0.1", "--epsilon-grid", "2", "--out-csv", csv_path, *FAST]
    code, out1, _ = run(argv, capsys)
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    rows = read_sweep_csv(csv_path)
    assert len(rows) == 36
    assert [(r.fraction, r.seed) for r in rows[:5]] == [(0.1, 1)] * 4 + [(0.1, 2)]
    assert [r.method for r in rows[:4]] == ["rank", "l2tv", "l1tv", "rbf"]
    assert all(math.isfinite(r.nmse_db) for r in rows)
    code, out2, _ = run(argv, capsys)
    assert out1 == out2


def test_sweep_rejects_unknown_method(small, tmp_path, capsys):
    t, _ = small
    code, _, err = run(["sweep", "--truth", t, "--fractions", "0.1", "--seeds", "1",
                        "--methods", "rank,bogus", "--out-csv", tmp_path / "x.csv"], capsys)
    assert code != 0 and "bogus" in err


def test_ingest(tmp_path, capsys):
    csv_path = tmp_path / "grid.csv"
    rows = ["x,y,height,value"]
    for h in (1.5, 4.5):
        for y in (0, 3, 6):
            for x in (0, 3):
                rows.append(f"{x},{y},{h},{100 + x + 10 * y + h}")
    csv_path.write_text("\n".join(rows) + "\n")
    code, out, _ = run(["ingest", "--csv", csv_path, "--out", tmp_path / "g.tns"], capsys)
    assert code == 0 and out.strip() == "2x3x2"
    t = read_tensor(tmp_path / "g.tns")
    assert t[1, 2, 0] == 100 + 3 + 60 + 1.5
    assert "scale: 3" in (tmp_path / "g.tns").read_text()
