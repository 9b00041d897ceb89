import json
import re
import subprocess
import sys
from dataclasses import replace

import pytest

from sceig.cli import main
from sceig.probfile import write_problem
from sceig.solvers import SolverConfig, initial_guess_hcore, scf

from conftest import make_problem


@pytest.fixture()
def problem_file(tmp_path, toy):
    ref = scf(toy, initial_guess_hcore(toy), SolverConfig(method="scf"))
    prob = replace(toy, reference_energy=ref.total_energy)
    path = tmp_path / "toy.prob"
    path.write_bytes(write_problem(prob))
    return path


def strip_wall(text: str) -> str:
    return re.sub(r'"wall[^"]*": [-0-9.e+]+', '"wall": 0', text)


def test_verify_toy_exit_zero(capsys):
    assert main(["verify-toy"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out
    assert "FAIL" not in out


def test_solve_missing_file_exits_2(capsys):
    assert main(["solve", "missing.prob"]) == 2
    assert "missing.prob" in capsys.readouterr().err


def test_solve_writes_report_and_trace(problem_file, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    trace_path = tmp_path / "trace.csv"
    code = main([
        "solve", str(problem_file), "--method", "scgled", "--t", "20000",
        "--report-out", str(report_path), "--trace-out", str(trace_path),
    ])
    assert code == 0
    doc = json.loads(report_path.read_text())
    assert doc["converged"] is True
    assert abs(doc["energy_error"]) < 1e-8
    lines = trace_path.read_text().strip().splitlines()
    assert lines[0] == "iteration,total_energy,residual,density_change,wall_time_s"
    assert len(lines) > 10


def test_solve_nonconvergent_exits_1(problem_file, tmp_path):
    report_path = tmp_path / "r.json"
    code = main([
        "solve", str(problem_file), "--method", "scgled", "--t", "100",
        "--i-f", "50", "--report-out", str(report_path),
    ])
    assert code == 1
    assert json.loads(report_path.read_text())["converged"] is False


def test_solve_invalid_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.prob"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == 2


def test_solve_report_determinism(problem_file, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main([
            "solve", str(problem_file), "--method", "scgled", "--t", "2000",
            "--seed", "3", "--init", "random", "--report-out", str(path),
        ]) in (0, 1)
        outs.append(strip_wall(path.read_text()))
    assert outs[0] == outs[1]


def test_verify_toy_report_determinism(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["verify-toy", "--report-out", str(path)]) == 0
        outs.append(strip_wall(path.read_text()))
    assert outs[0] == outs[1]


def test_bench_command(problem_file, tmp_path, capsys):
    out_csv = tmp_path / "bench.csv"
    curves_csv = tmp_path / "curves.csv"
    code = main([
        "bench", str(problem_file.parent), "--grid", "methods=scgled;t=200,1000;if=50",
        "--out", str(out_csv), "--curves-out", str(curves_csv),
    ])
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0].startswith("label,method,t")
    assert len(lines) == 3
    assert curves_csv.read_text().startswith("method,t,i_f")


def test_bench_rerun_stable_except_wall(problem_file, tmp_path):
    csvs = []
    for name in ("1.csv", "2.csv"):
        out_csv = tmp_path / name
        assert main(["bench", str(problem_file.parent), "--grid",
                     "methods=scgled;t=500;if=50", "--out", str(out_csv)]) == 0
        rows = out_csv.read_text().strip().splitlines()
        header = rows[0].split(",")
        wall_idx = header.index("wall_ms")
        scrubbed = []
        for line in rows[1:]:
            cols = line.split(",")
            cols[wall_idx] = "WALL"
            scrubbed.append(",".join(cols))
        csvs.append(scrubbed)
    assert csvs[0] == csvs[1]


def test_bench_empty_directory_exits_2(tmp_path):
    assert main(["bench", str(tmp_path), "--out", str(tmp_path / "x.csv")]) == 2


def test_sweep_if_command(problem_file, tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code = main([
        "sweep-if", str(problem_file), "--t", "1000",
        "--if-values", "10,50,500", "--out", str(out_csv),
    ])
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert len(lines) == 4
    out = capsys.readouterr().out
    assert out.count("i_f=") == 3


def test_console_entry_point(problem_file):
    proc = subprocess.run(
        [sys.executable, "-m", "sceig", "solve", str(problem_file),
         "--method", "scf", "--accel", "vanilla"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "converged" in proc.stdout
