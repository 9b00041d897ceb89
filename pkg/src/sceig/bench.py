"""Benchmark harness: grids of solver runs over problem files, CSV rows,
and the summary curves behind time-precision / interval-precision plots.
"""

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .exceptions import Diverged, EmptyInput, SceigError
from .probfile import parse_problem
from .problem import ProblemInstance
from .solvers import SolverConfig, hybrid, initial_guess_hcore, scf, solve

__all__ = [
    "BenchRow",
    "GridCell",
    "parse_grid",
    "run_bench",
    "write_rows_csv",
    "read_rows_csv",
    "bench_curves",
    "sweep_if",
]

CSV_COLUMNS = [
    "label", "method", "t", "i_f", "eta", "accel",
    "wall_ms", "total_energy", "energy_error", "converged", "scf_iters",
]

GUESS_T_GRID = (200, 1000, 2000, 5000, 10000)
FULL_SOLVE_T = 20000
FULL_SOLVE_I_F = 100


@dataclass(frozen=True)
class GridCell:
    """One benchmark configuration applied to every problem file."""

    method: str
    t: int = 0
    i_f: int = 50
    eta: float = 1e-2
    accel: str = "damping"
    scf_accel: str | None = None


@dataclass
class BenchRow:
    label: str
    method: str
    t: int
    i_f: int
    eta: float
    accel: str
    wall_ms: float
    total_energy: float
    energy_error: float | None
    converged: bool
    scf_iters: int


def default_grid() -> list[GridCell]:
    """Baseline fixed-point run, the guess-budget sweep, and one
    gradient-only full solve with the DIIS tail."""
    cells = [GridCell(method="scf", t=0, accel="vanilla")]
    for t in GUESS_T_GRID:
        cells.append(GridCell(method="scgled", t=t, i_f=50, accel="damping"))
        cells.append(
            GridCell(method="hybrid", t=t, i_f=50, accel="damping", scf_accel="vanilla")
        )
    cells.append(GridCell(method="scgled", t=FULL_SOLVE_T, i_f=FULL_SOLVE_I_F, accel="diis"))
    return cells


def parse_grid(spec: str) -> list[GridCell]:
    """Parse a grid spec: ``default`` or ``key=value`` fragments separated
    by ``;`` with comma lists, e.g.
    ``methods=scgled,hybrid;t=200,1000;if=50;accel=damping``.
    """
    spec = spec.strip()
    if spec == "default":
        return default_grid()
    fields = {"methods": ["scgled"], "t": [5000], "if": [50],
              "eta": [1e-2], "accel": ["damping"], "scf-accel": [None]}
    for fragment in spec.split(";"):
        fragment = fragment.strip()
        if not fragment:
            continue
        if "=" not in fragment:
            raise ValueError(f"bad grid fragment {fragment!r}")
        key, _, value = fragment.partition("=")
        key = key.strip()
        values = [v.strip() for v in value.split(",") if v.strip()]
        if key not in fields:
            raise ValueError(f"unknown grid key {key!r}")
        if key in ("t", "if"):
            fields[key] = [int(v) for v in values]
        elif key == "eta":
            fields[key] = [float(v) for v in values]
        else:
            fields[key] = values
    cells = []
    for method in fields["methods"]:
        for accel in fields["accel"]:
            for scf_accel in fields["scf-accel"]:
                for eta in fields["eta"]:
                    for t in fields["t"]:
                        for i_f in fields["if"]:
                            cells.append(GridCell(
                                method=method, t=t, i_f=i_f, eta=eta,
                                accel=accel, scf_accel=scf_accel,
                            ))
    return cells


def _cell_config(cell: GridCell) -> SolverConfig:
    return SolverConfig(
        method=cell.method,
        eta=cell.eta,
        i_f=cell.i_f,
        t_max=max(cell.t, 0),
        accel=cell.accel,
        scf_accel=cell.scf_accel,
    )


def run_cell(problem: ProblemInstance, cell: GridCell) -> BenchRow:
    """Run one (problem, cell) job; divergence yields a non-converged row."""
    config = _cell_config(cell)
    try:
        report = solve(problem, config)
        energy = report.total_energy
        converged = report.converged
        scf_iters = report.scf_iterations_used
        wall_ms = report.wall_time_s * 1e3
    except Diverged:
        energy = math.nan
        converged = False
        scf_iters = 0
        wall_ms = math.nan
    error = None
    if problem.reference_energy is not None and math.isfinite(energy):
        error = abs(energy - problem.reference_energy)
    return BenchRow(
        label=problem.label or "unlabeled",
        method=cell.method,
        t=cell.t,
        i_f=cell.i_f,
        eta=cell.eta,
        accel=cell.accel,
        wall_ms=wall_ms,
        total_energy=energy,
        energy_error=error,
        converged=converged,
        scf_iters=scf_iters,
    )


def _max_workers() -> int:
    raw = os.environ.get("SCEIG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_bench(paths: list, cells: list[GridCell]) -> list[BenchRow]:
    """Run every (file x cell) job in deterministic file-major order.

    Jobs are independent single-threaded solver runs; SCEIG_THREADS caps
    how many run concurrently. Row order never depends on the worker
    count.
    """
    paths = sorted(Path(p) for p in paths)
    problems = [parse_problem(p.read_bytes()) for p in paths]
    jobs = [(problem, cell) for problem in problems for cell in cells]
    workers = _max_workers()
    if workers == 1:
        return [run_cell(problem, cell) for problem, cell in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: run_cell(*job), jobs))


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows_csv(rows: list[BenchRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([_format_value(getattr(r, c)) for c in CSV_COLUMNS])


def read_rows_csv(stream) -> list[BenchRow]:
    reader = csv.DictReader(stream)
    rows = []
    for rec in reader:
        rows.append(BenchRow(
            label=rec["label"],
            method=rec["method"],
            t=int(rec["t"]),
            i_f=int(rec["i_f"]),
            eta=float(rec["eta"]),
            accel=rec["accel"],
            wall_ms=float(rec["wall_ms"]) if rec["wall_ms"] else math.nan,
            total_energy=float(rec["total_energy"]) if rec["total_energy"] else math.nan,
            energy_error=float(rec["energy_error"]) if rec["energy_error"] else None,
            converged=rec["converged"] == "true",
            scf_iters=int(rec["scf_iters"]),
        ))
    return rows


def bench_curves(rows: list[BenchRow]) -> list[dict]:
    """Aggregate rows into per-(method, t, i_f) summary records.

    Reports the mean absolute energy error, the count of non-converged
    rows, and the wall time averaged in log space (time costs are heavily
    skewed across problem sizes, so the plain mean would be dominated by
    the largest instance).
    """
    if not rows:
        raise EmptyInput("no benchmark rows to summarize")
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.method, r.t, r.i_f), []).append(r)
    summaries = []
    for (method, t, i_f) in sorted(groups):
        members = groups[(method, t, i_f)]
        errors = [r.energy_error for r in members if r.energy_error is not None]
        walls = [r.wall_ms for r in members if math.isfinite(r.wall_ms) and r.wall_ms > 0]
        summaries.append({
            "method": method,
            "t": t,
            "i_f": i_f,
            "n_rows": len(members),
            "mean_energy_error": sum(errors) / len(errors) if errors else None,
            "n_not_converged": sum(1 for r in members if not r.converged),
            "log_mean_wall_ms": (
                math.exp(sum(math.log(w) for w in walls) / len(walls)) if walls else None
            ),
        })
    return summaries


def curves_csv(summaries: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["method", "t", "i_f", "n_rows", "mean_energy_error",
              "n_not_converged", "log_mean_wall_ms"]
    writer.writerow(header)
    for s in summaries:
        writer.writerow([_format_value(s[h]) for h in header])
    return out.getvalue()


def sweep_if(problem: ProblemInstance, t: int, if_values: list[int]) -> list[BenchRow]:
    """Interval sweep at fixed budget: one damped gradient run per i_f.

    If the problem carries no reference energy, a converged fixed-point
    solution (DIIS, linear-problem guess) is computed once and used as the
    reference for the error column.
    """
    if not if_values:
        raise EmptyInput("no i_f values given")
    if problem.reference_energy is None:
        ref_cfg = SolverConfig(method="scf", accel="diis")
        ref = scf(problem, initial_guess_hcore(problem), ref_cfg)
        if not ref.converged:
            raise SceigError(
                "cannot derive a reference energy: fixed-point run did not converge"
            )
        problem = replace(problem, reference_energy=ref.total_energy)
    rows = []
    for i_f in if_values:
        rows.append(run_cell(problem, GridCell(method="scgled", t=t, i_f=i_f,
                                               accel="damping")))
    return rows
