import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

from collperf import models as M
from collperf.cli import fmt, int_list, ladder, main
from collperf.params import read_table
from collperf.selector import select

HERE = Path(__file__).parent
TABLE = str(HERE / "data" / "ethernet.plogp")
MEAS = str(HERE / "data" / "alltoall.meas")
GOLDEN = HERE / "golden"

GOLDEN_RUNS = {
    "predict_pipeline": ["predict", "--params", TABLE, "--family", "broadcast", "--strategy", "pipeline",
                         "-P", "16", "-m", "65536", "--auto-segment"],
    "predict_scatter": ["predict", "--params", TABLE, "--family", "scatter", "--strategy", "binomial",
                        "-P", "24", "-m", "1024"],
    "sweep_broadcast": ["sweep", "--params", TABLE, "--family", "broadcast", "-P", "2,3,8,16,32",
                        "--m-ladder", "1,16,5"],
    "sweep_alltoall": ["sweep", "--params", TABLE, "--family", "alltoall", "-P", "2:32:10",
                       "-m", "64,4096", "--gamma", "0.4"],
    "select_broadcast": ["select", "--params", TABLE, "--family", "broadcast", "-P", "16", "-m", "65536"],
    "select_scatter": ["select", "--params", TABLE, "--family", "scatter", "-P", "3", "-m", "1024"],
    "select_alltoall": ["select", "--params", TABLE, "--family", "alltoall", "-P", "8", "-m", "4096",
                        "--gamma-file", MEAS],
}


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden(name):
    code, first = run(GOLDEN_RUNS[name])
    assert code == 0
    _, second = run(GOLDEN_RUNS[name])
    assert first == second
    assert first == (GOLDEN / f"{name}.csv").read_text(encoding="utf-8")


def test_console_entry_point_matches_golden():
    proc = subprocess.run([sys.executable, "-m", "collperf", *GOLDEN_RUNS["select_broadcast"]],
                          capture_output=True, text=True, check=True)
    assert proc.stdout == (GOLDEN / "select_broadcast.csv").read_text(encoding="utf-8")


class TestPredict:
    def test_t0_flat(self, tmp_path):
        path = tmp_path / "t0.plogp"
        path.write_text("L 10\n1 1 0.5 0.5\n1000000 1000000 500000 500000\n")
        code, text = run(["predict", "--params", str(path), "--family", "broadcast",
                          "--strategy", "flat", "-P", "4", "-m", "8"])
        assert code == 0
        assert text.splitlines() == ["family,strategy,P,m,segment,time_s", "broadcast,flat,4,8,,34.0000000"]

    def test_round_trip_with_library(self):
        table = read_table(TABLE)
        _, text = run(GOLDEN_RUNS["predict_scatter"])
        row = text.splitlines()[1].split(",")
        lib = M.scatter_binomial(table, 24, 1024).time
        assert row[-1] == fmt(lib)
        assert math.isclose(float(row[-1]), lib, rel_tol=1e-8)

    def test_segment_on_unsegmented_strategy(self):
        code, _ = run(["predict", "--params", TABLE, "--family", "broadcast", "--strategy", "flat",
                       "-P", "4", "-m", "8", "--segment", "2"])
        assert code == 4


def test_sweep_row_count():
    _, text = run(GOLDEN_RUNS["sweep_broadcast"])
    assert len(text.splitlines()) == 1 + 4 * 5 * 5


def test_select_matches_library():
    _, text = run(GOLDEN_RUNS["select_broadcast"])
    rows = [line.split(",") for line in text.splitlines()[1:]]
    report = select(read_table(TABLE), "broadcast", 16, 65536)
    assert [r[1] for r in rows] == [p.strategy.variant for p in report.ranked]
    assert [r[3] for r in rows] == [fmt(p.time) for p in report.ranked]


def test_select_alltoall_without_gamma_ranks_bounds():
    code, text = run(["select", "--params", TABLE, "--family", "alltoall", "-P", "8", "-m", "64"])
    assert code == 0
    assert [line.split(",")[1] for line in text.splitlines()[1:]] == ["lower_bound", "upper_bound"]


def test_calibrate():
    code, text = run(["calibrate", "--params", TABLE, "--measurements", MEAS])
    assert code == 0
    fields = dict(line.split(" ", 1) for line in text.splitlines())
    assert math.isclose(float(fields["gamma"]), 0.4, rel_tol=1e-8)
    assert fields["samples"] == "8" and fields["in_range"] == "yes"


def test_segment_trace():
    code, text = run(["segment", "--params", TABLE, "-P", "8", "-m", "4096", "--method", "sweep"])
    lines = text.splitlines()
    assert code == 0 and lines[0] == "step,s,k,time_s"
    assert [int(line.split(",")[1]) for line in lines[1:-1]] == [4096 >> i for i in range(13)]
    assert lines[-1].startswith("best,")


def test_simulate_summary_matches_closed_form():
    code, text = run(["simulate", "--params", TABLE, "--family", "scatter", "--variant", "binomial",
                      "-P", "6", "-m", "1024"])
    assert code == 0
    summary = text.splitlines()[-1].split()
    assert summary[0] == "#" and summary[2] == summary[4]


@pytest.mark.parametrize("argv, code", [
    (["predict"], 2),
    (["predict", "--params", TABLE, "--family", "broadcast", "--strategy", "flat", "-P", "x", "-m", "8"], 2),
    (["sweep", "--params", TABLE, "--family", "broadcast", "-P", "2:1", "-m", "8"], 2),
    (["predict", "--params", "/nonexistent", "--family", "broadcast", "--strategy", "flat",
      "-P", "4", "-m", "8"], 3),
    (["predict", "--params", TABLE, "--family", "broadcast", "--strategy", "flat", "-P", "1", "-m", "8"], 4),
    (["predict", "--params", TABLE, "--family", "alltoall", "--strategy", "contended", "-P", "4", "-m", "8"], 4),
    (["predict", "--params", TABLE, "--family", "scatter", "--strategy", "pipeline", "-P", "4", "-m", "8"], 4),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv)[0] == code


def test_malformed_table_exit_code(tmp_path, caplog):
    bad = tmp_path / "bad.plogp"
    bad.write_text("L 1e-4\n1 1e-5 2e-5 1e-5\n")
    code, _ = run(["predict", "--params", str(bad), "--family", "broadcast", "--strategy", "flat",
                   "-P", "4", "-m", "8"])
    assert code == 3
    assert "line 2: gap smaller than send overhead" in caplog.text


@pytest.mark.parametrize("text, expected", [("2,4,8", [2, 4, 8]), ("2:5", [2, 3, 4, 5]), ("2:32:10", [2, 12, 22, 32])])
def test_int_list(text, expected):
    assert int_list(text) == expected


def test_ladder():
    assert ladder("1,16,5") == [1, 16, 256, 4096, 65536]


def test_fmt():
    assert fmt(34.0) == "34.0000000"
    assert float(fmt(1 / 3)) == pytest.approx(1 / 3, rel=1e-8)
