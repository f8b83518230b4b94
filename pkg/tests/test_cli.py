import csv
import io
import json
import math

import pytest

from pomlab.cli import main, parse_n
from pomlab.construct import dump_setup, random_setup


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_n():
    assert parse_n("3") == [3]
    assert parse_n("2..5") == [2, 3, 4, 5]


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "3")
    assert code == 0
    doc = json.loads(out)
    assert {"tool", "version", "command", "timestamp", "results", "checks", "ok"} <= set(doc)
    row = doc["results"][0]
    assert row["pnc"] == pytest.approx(2 / 3)
    assert row["quantum_opt"] == pytest.approx(0.5 * (1 + 1 / math.sqrt(3)))
    assert row["tsirelson_value"] == pytest.approx(4 * math.sqrt(3))


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "2..4", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["n"] for r in rows] == ["2", "3", "4"]
    assert float(rows[2]["tsirelson_value"]) == 16.0


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4")
    doc = json.loads(out)
    assert code == 0 and doc["ok"]
    assert doc["results"][0]["spectral_max"] == pytest.approx(16, abs=1e-9)
    assert {c["check"] for c in doc["checks"]} >= {"parity_oblivious", "sos_residual", "gamma_psd"}


def test_exact(capsys):
    code, out, _ = run(capsys, "exact", "--n", "2..3")
    doc = json.loads(out)
    assert code == 0
    assert doc["results"][1]["p_direct"] == pytest.approx(0.7886751, abs=1e-7)


def test_simulate_rounds_zero(capsys):
    code, _, err = run(capsys, "simulate", "--n", "3", "--rounds", "0")
    assert code == 2 and "rounds" in err


def test_simulate_deterministic(capsys):
    args = ("simulate", "--n", "3", "--rounds", "20000", "--seed", "4", "--shards", "2")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    da, db = json.loads(a), json.loads(b)
    assert da["results"] == db["results"] and da["command"] == db["command"]
    assert da["prng"] == "PCG64"


def test_output_file_round_trip(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "lhv-max", "--n", "2..3", "--out", str(path))
    doc = json.loads(path.read_text())
    assert code == 0 and out == ""
    assert [r["lhv_max"] for r in doc["results"]] == [2, 6]


def test_lhv_range(capsys):
    code, _, err = run(capsys, "lhv-max", "--n", "6")
    assert code == 2 and "2..5" in err


def test_setup_file(capsys, tmp_path, rng):
    path = tmp_path / "s.json"
    dump_setup(random_setup(3, rng), path)
    code, out, _ = run(capsys, "exact", "--setup", str(path))
    doc = json.loads(out)
    assert code == 0
    row = doc["results"][0]
    assert abs(row["p_direct"] - row["p_via_bell"]) <= 1e-12


def test_setup_conflict(capsys, tmp_path, rng):
    path = tmp_path / "s.json"
    dump_setup(random_setup(3, rng), path)
    code, _, _ = run(capsys, "verify", "--setup", str(path), "--n", "4")
    assert code == 2


def test_missing_n(capsys):
    assert run(capsys, "bounds")[0] == 2


def test_bad_n(capsys):
    assert run(capsys, "bounds", "--n", "x")[0] == 2


def test_classical_lp(capsys):
    code, out, _ = run(capsys, "classical-lp", "--n", "3")
    doc = json.loads(out)
    assert code == 0 and doc["results"][0]["value"] == pytest.approx(2 / 3, abs=1e-9)


def test_seesaw(capsys):
    code, out, _ = run(capsys, "seesaw", "--n", "2", "--restarts", "2")
    doc = json.loads(out)
    assert code == 0 and doc["results"][0]["best"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", "--n", "3")
    doc = json.loads(out)
    assert code == 0 and doc["results"][0]["setup"]["dim"] == 2
