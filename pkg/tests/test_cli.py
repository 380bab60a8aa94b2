from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest
from conftest import CORPUS

from ksrd import brute_force_optimum, load_edge_list
from ksrd.cli import main

KITE5 = str(CORPUS / "kite5.txt")
RECORD_KEYS = ["instance", "n", "k", "algorithm", "objective", "labels", "mode", "non_defended",
               "time_to_best", "total_time", "iterations", "seed", "config"]
CONFIG_KEYS = ["r_min", "r_max", "move_prob", "cutoff", "tries", "attack_bound", "ball_radius",
               "time_limit", "max_iters"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines()]


def test_solve_greedy(capsys):
    code, out, _ = run(capsys, "solve", "--instance", KITE5, "--k", "3", "--algo", "greedy")
    assert code == 0
    (rec,) = records(out)
    assert rec["objective"] == 5 and rec["labels"] == [0, 4, 0, 1, 0]


def test_solve_schema(capsys):
    code, out, _ = run(capsys, "solve", "--instance", KITE5, "--k", "2", "--max-iters", "20")
    (rec,) = records(out)
    assert list(rec) == RECORD_KEYS
    assert list(rec["config"]) == CONFIG_KEYS
    assert rec["objective"] == sum(rec["labels"])
    assert rec["mode"] == "exact" and rec["non_defended"] == 0
    assert rec["algorithm"] == "vns" and rec["instance"] == "kite5"
    assert isinstance(rec["time_to_best"], float)


def test_solve_runs_summary(capsys):
    code, out, _ = run(capsys, "solve", "--instance", KITE5, "--k", "3", "--runs", "10",
                       "--max-iters", "100", "--summary", "--seed", "4")
    recs = records(out)
    assert [r["seed"] for r in recs[:-1]] == list(range(4, 14))
    summary = recs[-1]["summary"]
    assert summary["mean_obj"] == 5.0 and summary["sigma_pct"] == 0.0 and summary["runs"] == 10


def test_solve_exact_algo(capsys):
    code, out, _ = run(capsys, "solve", "--instance", KITE5, "--k", "2", "--algo", "exact")
    (rec,) = records(out)
    assert rec["objective"] == brute_force_optimum(load_edge_list(KITE5), 2)[0]


def test_solve_errors(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--instance", KITE5, "--k", "6")
    assert code == 2 and "k exceeds n" in err
    code, _, err = run(capsys, "solve", "--instance", str(tmp_path / "missing.txt"), "--k", "2")
    assert code == 2 and "cannot read" in err
    code, _, _ = run(capsys, "solve", "--instance", KITE5, "--k", "2", "--rmin", "5", "--rmax", "2")
    assert code == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 7\n")
    code, _, _ = run(capsys, "solve", "--instance", str(bad), "--k", "2")
    assert code == 2


def test_omit_timing_is_byte_identical(capsys):
    argv = ["solve", "--instance", str(CORPUS / "ud_n15_r3_s3.txt"), "--k", "2", "--max-iters", "40",
            "--seed", "3", "--omit-timing"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    assert records(a)[0]["time_to_best"] is None


@pytest.mark.parametrize("labels,code", [("1,0,2,1,1", 0), ("[1, 0, 2, 1, 1]", 0), ("0 0 3 0 1", 1)])
def test_verify_inline(capsys, labels, code):
    got, out, _ = run(capsys, "verify", "--instance", KITE5, "--k", "3", "--labels", labels)
    assert got == code
    if code == 1:
        assert "first failing attack: 0 1 3" in out


def test_verify_file_and_quasi(capsys, tmp_path):
    f = tmp_path / "labels.txt"
    f.write_text("0\n0\n3\n0\n1\n")
    code, out, _ = run(capsys, "verify", "--instance", KITE5, "--k", "3", "--labels", str(f), "--mode", "quasi")
    assert code == 1 and "1 non-defended" in out


@pytest.mark.parametrize("labels", ["0,0,9,0,1", "1,1", "a,b,c,d,e"])
def test_verify_errors(capsys, labels):
    code, _, err = run(capsys, "verify", "--instance", KITE5, "--k", "3", "--labels", labels)
    assert code == 2 and err.startswith("error:")


def test_records_reverify(capsys):
    inst = str(CORPUS / "ud_n20_r3_s5.txt")
    for extra in ([], ["--attack-bound", "100"]):
        _, out, _ = run(capsys, "solve", "--instance", inst, "--k", "3", "--max-iters", "40", *extra)
        (rec,) = records(out)
        _, vout, _ = run(capsys, "verify", "--instance", inst, "--k", "3", "--mode", rec["mode"],
                         "--labels", ",".join(map(str, rec["labels"])), *extra)
        assert f", {rec['non_defended']} non-defended" in vout
        assert rec["mode"] == ("exact" if not extra else "quasi")


def test_gen_unit_disc(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert main(["gen", "unit-disc", "--n", "100", "--radius", "0.6", "--seed", "1", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_edge_list(a).n == 100
    code, out, _ = run(capsys, "gen", "unit-disc", "--n", "5", "--radius", "0.5", "--seed", "1")
    assert out.startswith("5 ")
    code, _, err = run(capsys, "gen", "unit-disc", "--n", "10", "--radius", "1.5")
    assert code == 2


def test_gen_from_geojson(capsys, tmp_path):
    src = tmp_path / "sq.geojson"
    sq = lambda x, y: [[[x, y], [x + 1, y], [x + 1, y + 1], [x, y + 1], [x, y]]]  # noqa: E731
    src.write_text(json.dumps({"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"id": "p"}, "geometry": {"type": "Polygon", "coordinates": sq(0, 0)}},
        {"type": "Feature", "properties": {"id": "q"}, "geometry": {"type": "Polygon", "coordinates": sq(1, 1)}},
    ]}))
    out = tmp_path / "g.txt"
    assert main(["gen", "from-geojson", str(src), "--id-property", "id", "--out", str(out)]) == 0
    assert out.read_bytes() == b"2 1\n0 1\n"
    assert (tmp_path / "g.txt.ids.csv").read_text() == "node,region_id\n0,p\n1,q\n"
    code, _, _ = run(capsys, "gen", "from-geojson", str(tmp_path / "none.geojson"))
    assert code == 2


def write_manifest(path, rows):
    path.write_text("instance,k,algo,runs,time_limit\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))


def test_bench_exact(tmp_path):
    (tmp_path / "kite5.txt").write_bytes((CORPUS / "kite5.txt").read_bytes())
    write_manifest(tmp_path / "m.csv", [("kite5.txt", 2, "exact", 10, 5), ("kite5.txt", 3, "exact", 10, 5)])
    out = tmp_path / "out.csv"
    assert main(["bench", "--manifest", str(tmp_path / "m.csv"), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    gamma2 = brute_force_optimum(load_edge_list(CORPUS / "kite5.txt"), 2)[0]
    assert [float(r["mean_obj"]) for r in rows] == [gamma2, 5.0]
    assert [r["k"] for r in rows] == ["2", "3"]
    assert list(rows[0]) == ["instance", "n", "k", "algo", "mean_obj", "sigma_pct", "mean_t_best", "runs", "seed_base"]


def test_bench_empty_manifest(tmp_path, capsys):
    write_manifest(tmp_path / "m.csv", [])
    code, out, _ = run(capsys, "bench", "--manifest", str(tmp_path / "m.csv"))
    assert code == 0 and out == "instance,n,k,algo,mean_obj,sigma_pct,mean_t_best,runs,seed_base\n"


def test_bench_errors(tmp_path, capsys):
    write_manifest(tmp_path / "m.csv", [("missing.txt", 2, "vns", 1, 5)])
    code, _, err = run(capsys, "bench", "--manifest", str(tmp_path / "m.csv"))
    assert code == 2 and "missing instance" in err
    (tmp_path / "bad.csv").write_text("instance,k\nkite5.txt,2\n")
    code, _, _ = run(capsys, "bench", "--manifest", str(tmp_path / "bad.csv"))
    assert code == 2


def test_bench_jobs_identical(tmp_path):
    write_manifest(tmp_path / "m.csv", [
        (CORPUS / "kite5.txt", 3, "vns", 3, 5),
        (CORPUS / "ud_n15_r3_s3.txt", 2, "vns", 3, 5),
        (CORPUS / "grid4.txt", 2, "greedy", 2, 5),
    ])
    outs = []
    for jobs in ("1", "4"):
        out = tmp_path / f"o{jobs}.csv"
        main(["bench", "--manifest", str(tmp_path / "m.csv"), "--jobs", jobs, "--max-iters", "30",
              "--omit-timing", "--seed-base", "2", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].count(b"\n") == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ksrd", "verify", "--instance", KITE5, "--k", "3",
                          "--labels", "0,0,3,0,1"], capture_output=True, text=True)
    assert res.returncode == 1 and "0 1 3" in res.stdout
