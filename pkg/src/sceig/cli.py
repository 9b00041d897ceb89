"""Command line interface.

Exit status: 0 on success, 1 on solver non-convergence (reports are still
written), 2 on input errors. Diagnostics go to stderr.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .exceptions import Diverged, SceigError
from .fock import density, fock_matrix
from .linalg import sym_eig
from .probfile import parse_problem
from .solvers import ConvergenceReport, SolverConfig, solve
from .toy import REFERENCE, toy_problem

METHOD_FLAGS = {
    "scgled": "scgled",
    "scf": "scf",
    "hybrid": "hybrid",
    "scgled-vanilla": "scgled_vanilla",
}


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x)}")


def write_report(report: ConvergenceReport, path: Path) -> None:
    path.write_text(json.dumps(report.to_dict(), indent=2, default=_json_default) + "\n")


def write_trace(report: ConvergenceReport, path: Path) -> None:
    lines = ["iteration,total_energy,residual,density_change,wall_time_s"]
    for r in report.trace:
        lines.append(
            f"{r.iteration},{r.total_energy:.17g},{r.residual:.17g},"
            f"{r.density_change:.17g},{r.wall_time_s:.6f}"
        )
    path.write_text("\n".join(lines) + "\n")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=sorted(METHOD_FLAGS), default="scgled")
    p.add_argument("--eta", type=float, default=1e-2)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--t", type=int, default=5000, help="gradient-phase iteration budget")
    p.add_argument("--i-f", type=int, default=50, help="F update interval")
    p.add_argument("--accel", choices=["vanilla", "damping", "diis"], default="damping")
    p.add_argument("--scf-accel", choices=["vanilla", "damping", "diis"], default=None,
                   help="override accel for the fixed-point phase")
    p.add_argument("--diis-tail", type=float, default=0.1)
    p.add_argument("--energy-tol", type=float, default=1e-10)
    p.add_argument("--density-tol", type=float, default=1e-8)
    p.add_argument("--scf-max-iters", type=int, default=200)
    p.add_argument("--init", choices=["identity", "random"], default="identity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=None)


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        method=METHOD_FLAGS[args.method],
        eta=args.eta,
        alpha=args.alpha,
        beta=args.beta,
        i_f=args.i_f,
        t_max=args.t,
        accel=args.accel,
        scf_accel=args.scf_accel,
        diis_tail_fraction=args.diis_tail,
        energy_tol=args.energy_tol,
        density_tol=args.density_tol,
        scf_max_iters=args.scf_max_iters,
        init="identity_block" if args.init == "identity" else "seeded_random",
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
    )


def _load_problem(path_str: str):
    path = Path(path_str)
    if not path.is_file():
        raise FileNotFoundError(f"no such problem file: {path}")
    return parse_problem(path.read_bytes())


def cmd_solve(args) -> int:
    problem = _load_problem(args.problem)
    config = _config_from_args(args)
    try:
        report = solve(problem, config)
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 1
    if args.report_out:
        write_report(report, Path(args.report_out))
    if args.trace_out:
        write_trace(report, Path(args.trace_out))
    status = "converged" if report.converged else "not converged"
    print(
        f"{report.method} on {report.label or args.problem}: {status}, "
        f"E = {report.total_energy:.12f}, residual = {report.residual:.3e}, "
        f"iterations = {report.iterations_used}+{report.scf_iterations_used}"
    )
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0 if report.converged else 1


def cmd_bench(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"no such directory: {directory}")
    paths = sorted(directory.glob("*.prob"))
    if not paths:
        raise SceigError(f"no .prob files under {directory}")
    cells = bench_mod.parse_grid(args.grid)
    rows = bench_mod.run_bench(paths, cells)
    with open(args.out, "w", newline="") as fh:
        bench_mod.write_rows_csv(rows, fh)
    if args.curves_out:
        summaries = bench_mod.bench_curves(rows)
        Path(args.curves_out).write_text(bench_mod.curves_csv(summaries))
    n_bad = sum(1 for r in rows if not r.converged)
    print(f"wrote {len(rows)} rows to {args.out} ({n_bad} not converged)")
    return 0


def cmd_sweep_if(args) -> int:
    problem = _load_problem(args.problem)
    if_values = [int(v) for v in args.if_values.split(",") if v.strip()]
    rows = bench_mod.sweep_if(problem, args.t, if_values)
    with open(args.out, "w", newline="") as fh:
        bench_mod.write_rows_csv(rows, fh)
    for r in rows:
        print(f"i_f={r.i_f}: energy_error={r.energy_error:.3e}")
    return 0


def cmd_verify_toy(args) -> int:
    problem = toy_problem()
    ref = REFERENCE
    checks: list[tuple[str, bool]] = []
    reports = {}

    def check(name: str, ok: bool):
        checks.append((name, bool(ok)))
        print(f"{'ok  ' if ok else 'FAIL'}  {name}")

    config = SolverConfig(method="scgled", t_max=20000, i_f=50)
    rep = solve(problem, config)
    reports["scgled"] = rep
    v = np.abs(rep.v_star.ravel())
    check("gradient solver recovers |V*| = (0.5489, 0.5489) within 1e-3",
          np.all(np.abs(v - np.abs(ref["v1"])) < ref["v1_tol"]))
    check("lowest eigenvalue -0.5782 within 5e-4",
          abs(rep.eigenvalues[0] - ref["lambda1"]) < ref["lambda1_tol"])
    f_star = fock_matrix(problem, density(rep.v_star))
    check("induced matrix F(V*) entries within 2e-4",
          np.max(np.abs(f_star - ref["fock_at_solution"])) < ref["fock_tol"])

    x = problem.orthogonalizer()
    eig = sym_eig(x.to_orthonormal(f_star))
    v_all = x.back_transform(eig.eigenvectors)
    v2 = np.abs(v_all[:, 1])
    check("second eigenvalue 0.6703 within 5e-4",
          abs(eig.eigenvalues[1] - ref["lambda2"]) < ref["lambda2_tol"])
    check("second eigenvector |(1.2115, -1.2115)| within 5e-4",
          np.all(np.abs(v2 - np.abs(ref["v2"])) < ref["v2_tol"]))

    scf_rep = solve(problem, SolverConfig(method="scf", accel="vanilla"))
    reports["scf"] = scf_rep
    check("fixed-point solver converges from the linear guess in <= 50 cycles",
          scf_rep.converged and scf_rep.scf_iterations_used <= 50)
    check("fixed-point |V*| matches (0.5489, 0.5489) within 1e-4",
          np.all(np.abs(np.abs(scf_rep.v_star.ravel()) - np.abs(ref["v1"])) < 1e-4))
    check("gradient and fixed-point energies agree within 1e-8",
          abs(rep.total_energy - scf_rep.total_energy) < 1e-8)

    van = solve(problem, SolverConfig(method="scgled_vanilla", t_max=100000,
                                      init="seeded_random", seed=0))
    reports["scgled_vanilla"] = van
    check("plain-update solver recovers |V*| within 1e-3",
          van.converged and np.all(np.abs(np.abs(van.v_star.ravel()) - np.abs(ref["v1"])) < ref["v1_tol"]))

    hyb = solve(problem, SolverConfig(method="hybrid", t_max=1000, scf_accel="vanilla"))
    reports["hybrid"] = hyb
    check("hybrid pipeline converges and matches the fixed-point energy within 1e-8",
          hyb.converged and abs(hyb.total_energy - scf_rep.total_energy) < 1e-8)

    if args.report_out:
        doc = {name: reports[name].to_dict() for name in sorted(reports)}
        Path(args.report_out).write_text(
            json.dumps(doc, indent=2, default=_json_default) + "\n")

    n_fail = sum(1 for _, ok in checks if not ok)
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return 0 if n_fail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sceig",
        description="Solvers for self-consistent nonlinear generalized eigenproblems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem file")
    p_solve.add_argument("problem")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--report-out", default=None)
    p_solve.add_argument("--trace-out", default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="run a grid over a directory of problems")
    p_bench.add_argument("directory")
    p_bench.add_argument("--grid", default="default")
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--curves-out", default=None)
    p_bench.set_defaults(func=cmd_bench)

    p_sweep = sub.add_parser("sweep-if", help="sweep the F update interval at fixed budget")
    p_sweep.add_argument("problem")
    p_sweep.add_argument("--t", type=int, default=5000)
    p_sweep.add_argument("--if-values", default="10,50,500")
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep_if)

    p_toy = sub.add_parser("verify-toy", help="check the built-in instance against "
                                              "its known solution")
    p_toy.add_argument("--report-out", default=None)
    p_toy.set_defaults(func=cmd_verify_toy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SceigError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
