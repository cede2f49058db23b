import csv
import json

import numpy as np
import pytest

from precspa.cli import main, parse_grid, read_matrix, sidecar_path, write_matrix


def _indices(out):
    lines = out.splitlines()
    k = lines.index("{")
    return [int(x) for x in lines[:k]], json.loads("\n".join(lines[k:]))


def test_extract_identity(tmp_path, capsys):
    f = tmp_path / "i3.csv"
    write_matrix(f, np.eye(3))
    assert main(["extract", str(f), "--algo", "spa", "--r", "3"]) == 0
    K, diag = _indices(capsys.readouterr().out)
    assert K == [0, 1, 2]
    assert diag["algorithm"] == "spa" and diag["runtime_seconds"] >= 0


def test_extract_prec_spa_middle_points(tmp_path, capsys):
    f = tmp_path / "mp.csv"
    assert main(["synth", "--r", "20", "--epsilon", "0.4", "--seed", "11", "--out", str(f)]) == 0
    capsys.readouterr()
    out = tmp_path / "k.txt"
    assert main(["extract", str(f), "--algo", "prec-spa", "--r", "20", "-o", str(out)]) == 0
    K, diag = _indices(out.read_text())
    assert sorted(K) == list(range(20))
    assert diag["margin"] <= 1 + 1e-6 and diag["outer_rounds"] >= 1 and "gap" in diag


def test_extract_rank_deficient(tmp_path, capsys):
    rng = np.random.default_rng(0)
    f = tmp_path / "low.csv"
    write_matrix(f, rng.random((6, 3)) @ rng.random((3, 12)))
    assert main(["extract", str(f), "--algo", "spa", "--r", "5"]) == 3
    assert "RankDeficient" in capsys.readouterr().err


def test_extract_parse_errors(tmp_path, capsys):
    assert main(["extract", str(tmp_path / "missing.csv"), "--r", "2"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,abc\n")
    assert main(["extract", str(bad), "--r", "2"]) == 2
    ok = tmp_path / "ok.csv"
    write_matrix(ok, np.eye(3))
    assert main(["extract", str(ok), "--r", "4"]) == 2
    assert main(["extract", str(ok), "--r", "2", "--p", "3"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["extract", str(ok), "--r", "2", "--algo", "vca"])
    assert exc.value.code == 2


def test_synth_middle_points(tmp_path, capsys):
    f = tmp_path / "a.csv"
    assert main(["synth", "--kind", "middle-points", "--r", "20", "--epsilon", "0", "--out", str(f)]) == 0
    assert read_matrix(f).shape == (20, 210)
    meta = json.loads(sidecar_path(f).read_text())
    assert meta["true_indices"] == list(range(20))
    assert set(meta) >= {"kind", "m", "r", "epsilon", "seed", "true_indices", "sigma_min_W"}


def test_synth_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert main(["synth", "--kind", "middle-points-gaussian", "--epsilon", "0.2", "--seed", "9", "--out", str(f)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert sidecar_path(a).read_bytes() == sidecar_path(b).read_bytes()
    assert read_matrix(a).shape == (30, 210)


def test_synth_invalid(tmp_path, capsys):
    f = str(tmp_path / "x.csv")
    assert main(["synth", "--r", "1", "--out", f]) == 2
    assert main(["synth", "--epsilon", "-1", "--out", f]) == 2
    assert main(["synth", "--m", "30", "--out", f]) == 2
    assert main(["synth", "--kind", "middle-points-gaussian", "--m", "5", "--r", "6", "--out", f]) == 2


def test_bench_noiseless(tmp_path, capsys):
    rec, summ = tmp_path / "r.csv", tmp_path / "s.csv"
    code = main(["bench", "--r", "6", "--eps", "0", "--trials", "1", "--records", str(rec), "--summary", str(summ)])
    assert code == 0
    with open(rec) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["algorithm", "epsilon", "trial", "recovery", "runtime_seconds"]
    assert len(rows) == 5 and all(float(r["recovery"]) == 1.0 for r in rows)
    with open(summ) as fh:
        srows = list(csv.DictReader(fh))
    assert list(srows[0]) == ["algorithm", "rob100", "rob95", "mean_runtime"]
    assert all(float(r["rob100"]) == 0.0 for r in srows)
    assert "rob100" in capsys.readouterr().out


def test_bench_config_errors(tmp_path, capsys):
    base = ["bench", "--records", str(tmp_path / "r.csv"), "--summary", str(tmp_path / "s.csv")]
    assert main(base + ["--eps", "0.2,0.1"]) == 2
    assert main(base + ["--eps", "0:1:-1"]) == 2
    assert main(base + ["--algorithms", "spa,xray"]) == 2
    assert main(base + ["--trials", "0"]) == 2


def test_parse_grid():
    assert parse_grid("0:0.6:0.05") == [round(0.05 * i, 10) for i in range(13)]
    assert parse_grid("0,0.1,0.25") == [0.0, 0.1, 0.25]
    assert len(parse_grid("0:0.6:0.01")) == 61


def test_mvee_identity(tmp_path, capsys):
    f, out = tmp_path / "i.csv", tmp_path / "A.csv"
    write_matrix(f, np.eye(4))
    assert main(["mvee", str(f), "-o", str(out)]) == 0
    np.testing.assert_allclose(read_matrix(out), np.eye(4), atol=1e-9)
    text = capsys.readouterr().out
    assert "margin 1" in text and "outer_rounds 1" in text


def test_mvee_noiseless_separable(tmp_path, capsys):
    rng = np.random.default_rng(3)
    W = rng.random((5, 5))
    Hp = rng.dirichlet(np.ones(5), size=40).T
    f, out = tmp_path / "m.csv", tmp_path / "A.csv"
    write_matrix(f, W @ np.hstack([np.eye(5), Hp]))
    assert main(["mvee", str(f), "-o", str(out)]) == 0
    A = read_matrix(out)
    ref = np.linalg.inv(W @ W.T)
    assert np.linalg.norm(A - ref) <= 1e-5 * np.linalg.norm(ref)


def test_mvee_rank_deficient(tmp_path, capsys):
    f = tmp_path / "d.csv"
    write_matrix(f, np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))
    assert main(["mvee", str(f)]) == 3
    assert "RankDeficientInput" in capsys.readouterr().err


def test_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    M = rng.standard_normal((7, 9)) * 10.0 ** rng.integers(-200, 200, size=(7, 9))
    f = tmp_path / "rt.csv"
    write_matrix(f, M)
    np.testing.assert_array_equal(read_matrix(f), M)


def test_sidecar_path():
    assert str(sidecar_path("a/b.csv")) == "a/b.json"
    assert str(sidecar_path("a/b")) == "a/b.json"
