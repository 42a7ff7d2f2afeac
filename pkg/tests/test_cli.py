import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from hiercode.cli import main

DATA = Path(__file__).resolve().parent.parent / "data" / "example_topology.json"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_example(capsys):
    code, out, _ = run(capsys, "analyze", "--topology", str(DATA))
    assert code == 0
    rep = json.loads(out)
    assert (rep["up"], rep["down"], rep["up_lb"], rep["down_lb"]) == ("17/2", "7", "13/2", "7")
    assert rep["uncoded"] == {"up": "10", "down": "10"}
    assert rep["gaps"]["up_gap"] == "2" and rep["gaps"]["down_gap"] == "0"
    assert rep["gaps"]["pass"] is True
    assert rep["allocations"]["3"]["alpha"] == ["0", "1/2", "0", "1/2", "1/2"]
    assert rep["profile"]["r"] == "12/5"


def test_analyze_timing_spot_check(capsys):
    code, out, _ = run(capsys, "analyze", "--topology", str(DATA))
    rep = json.loads(out)
    assert rep["timing"]["uncoded"]["T_total"] == "2/5"
    assert rep["timing"]["coded"]["T_comm"] == "71/200"


def test_analyze_combination_gaps(capsys):
    code, out, _ = run(capsys, "analyze", "--gen", "combination", "--H", "5", "--r", "2", "--eta", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["gaps"]["up_gap"] == "0" and rep["gaps"]["down_gap"] == "0"
    assert (rep["up"], rep["down"]) == ("15", "12")


def test_analyze_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "analyze", "--gen", "random", "--K", "20", "--H", "6", "--r", "2", "--seed", "4", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_topology_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"H": 2, "K": 2, "relays": [[1, 2], [1, 2]]}))
    code, _, err = run(capsys, "analyze", "--topology", str(bad))
    assert code == 2
    assert "infeasible" in err


def test_missing_file_exit_code(capsys, tmp_path):
    assert run(capsys, "analyze", "--topology", str(tmp_path / "none.json"))[0] == 1


def test_generator_arguments_required(capsys):
    code, _, err = run(capsys, "analyze", "--gen", "random", "--K", "10")
    assert code == 1
    assert "--H" in err and "--r" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--H", "x"])
    assert exc.value.code == 1


def test_simulate_example(capsys, tmp_path):
    log = tmp_path / "log.jsonl"
    code, out, _ = run(capsys, "simulate", "--topology", str(DATA), "--iters", "2", "--vsym", "7", "--log", str(log))
    assert code == 0
    rep = json.loads(out)
    assert rep["equivalent"] is True
    assert rep["measured_matches_closed_form"] is True
    assert rep["padded"] is True and rep["iv_len"] == 8
    assert rep["iterations"][0]["loads"]["L_up_ES"] == "17/2"
    msgs = [json.loads(line) for line in log.read_text().splitlines()]
    assert {m["z"] for m in msgs} == {2, 3}
    assert sum(1 for m in msgs if m["sender"] == 0) == 8 + 6


def test_simulate_ridge(capsys):
    code, out, _ = run(capsys, "simulate", "--topology", str(DATA), "--learner", "ridge", "--vsym", "3", "--iters", "2")
    assert code == 0
    assert json.loads(out)["equivalent"] is True


def test_simulate_zero_iterations(capsys):
    code, out, _ = run(capsys, "simulate", "--topology", str(DATA), "--iters", "0")
    assert code == 0
    assert json.loads(out)["iterations"] == []


@pytest.mark.parametrize("flag,value", [("--vsym", "0"), ("--iters", "-1")])
def test_simulate_bad_values(capsys, flag, value):
    assert run(capsys, "simulate", "--topology", str(DATA), flag, value)[0] == 1


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--gen", "random", "--H", "5", "--r", "3", "--axis", "K", "--values", "10,20", "--seeds", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2 * (3 + 1)
    means = [r for r in rows if r["seed"] == "mean"]
    assert [m["K"] for m in means] == ["10", "20"]
    for r in rows:
        assert float(r["L_up_lb"]) <= float(r["L_up_coded"]) <= float(r["L_up_uncoded"]) + 1e-9
        assert float(r["L_down_lb"]) <= float(r["L_down_coded"]) <= float(r["L_down_uncoded"]) + 1e-9


def test_sweep_hetero_axis(capsys):
    code, out, _ = run(capsys, "sweep", "--gen", "hetero", "--K", "40", "--axis", "d", "--values", "0,1/10,0.2", "--seeds", "2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["d"] for r in rows if r["seed"] == "mean"] == ["0", "0.1", "0.2"]


def test_sweep_empty_axis(capsys):
    assert run(capsys, "sweep", "--gen", "random", "--H", "5", "--r", "3", "--axis", "K", "--values", "")[0] == 1


def test_sweep_infeasible_point(capsys):
    code = run(capsys, "sweep", "--gen", "hetero", "--K", "50", "--axis", "d", "--values", "0.05", "--seeds", "1")[0]
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hiercode", "analyze", "--gen", "combination", "--H", "4", "--r", "2"],
        capture_output=True, text=True, check=True,
    )
    rep = json.loads(proc.stdout)
    assert (rep["up"], rep["down"]) == ("4", "3")
