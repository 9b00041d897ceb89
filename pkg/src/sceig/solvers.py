"""End-to-end solver drivers.

Four methods are provided:

* ``scgled_vanilla`` -- Oja updates with a fresh F' every iteration.
* ``scgled``         -- momentum-accelerated utility-gradient updates with
                        interval-controlled F refreshes and optional
                        damping / DIIS conditioning.
* ``scf``            -- the classical fixed-point iteration with a full
                        diagonalization per cycle.
* ``hybrid``         -- a gradient phase whose result seeds the fixed-point
                        phase.

One solver run is strictly single-threaded and deterministic: identical
problem bytes and config produce identical report numerics (wall times
excepted). Runs over distinct problems may execute concurrently; they
share only immutable ProblemInstances.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .exceptions import BadOccupation, Diverged, RankDeficient, VanishingColumn
from .linalg import gram_schmidt_qr, sym_eig
from .problem import ProblemInstance, validate_problem
from .steppers import StepperState, eigengame_gradient, momentum_normalize_step, oja_step

__all__ = [
    "SolverConfig",
    "TraceRecord",
    "ConvergenceReport",
    "initial_guess_identity",
    "initial_guess_hcore",
    "scgled_vanilla",
    "scgled",
    "scf",
    "hybrid",
    "solve",
]

METHODS = ("scgled_vanilla", "scgled", "scf", "hybrid")
ACCEL_MODES = ("vanilla", "damping", "diis")
INIT_MODES = ("identity_block", "seeded_random")

# Reports flagged converged must satisfy this self-consistency residual.
RESIDUAL_GATE = 1e-5


@dataclass
class SolverConfig:
    """Hyperparameters for all solver methods.

    ``i_f`` is the F-update interval of the gradient phase, ``t_max`` its
    total iteration budget T. ``accel`` selects F conditioning: plain
    replacement, convex damping, or damping with a DIIS tail over the last
    ``diis_tail_fraction`` of the budget.
    """

    method: str = "scgled"
    eta: float = 1e-2
    alpha: float = 0.2
    beta: float = 0.9
    i_f: int = 50
    t_max: int = 5000
    accel: str = "damping"
    scf_accel: str | None = None
    diis_tail_fraction: float = 0.1
    energy_tol: float = 1e-10
    density_tol: float = 1e-8
    scf_max_iters: int = 200
    init: str = "identity_block"
    seed: int = 0
    checkpoint_every: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.accel not in ACCEL_MODES:
            raise ValueError(f"unknown accel mode {self.accel!r}")
        if self.scf_accel is not None and self.scf_accel not in ACCEL_MODES:
            raise ValueError(f"unknown scf accel mode {self.scf_accel!r}")
        if self.init not in INIT_MODES:
            raise ValueError(f"unknown init mode {self.init!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must be in [0, 1)")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.i_f < 1:
            raise ValueError("i_f must be a positive integer")
        if self.t_max < 0:
            raise ValueError("t_max must be non-negative")
        # A zero budget is allowed (report echoes the guess); otherwise the
        # F-update interval must fit inside the budget.
        if self.t_max >= 1 and self.i_f > self.t_max:
            raise ValueError("i_f must not exceed t_max")
        if not 0.0 <= self.diis_tail_fraction <= 1.0:
            raise ValueError("diis_tail_fraction must be in [0, 1]")
        if self.energy_tol <= 0.0 or self.density_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.scf_max_iters < 1:
            raise ValueError("scf_max_iters must be positive")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be positive")

    @property
    def effective_checkpoint_every(self) -> int:
        return self.checkpoint_every if self.checkpoint_every is not None else self.i_f


@dataclass
class TraceRecord:
    """One convergence-log row; iterations are strictly increasing."""

    iteration: int
    total_energy: float
    residual: float
    density_change: float
    wall_time_s: float


@dataclass
class ConvergenceReport:
    """Final solver output plus counters and the checkpoint trace."""

    method: str
    label: str | None
    v_star: np.ndarray
    eigenvalues: np.ndarray
    total_energy: float
    energy_error: float | None
    residual: float
    converged: bool
    iterations_used: int
    scf_iterations_used: int
    wall_time_s: float
    warnings: list[str] = field(default_factory=list)
    trace: list[TraceRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "label": self.label,
            "v_star": [[float(x) for x in row] for row in self.v_star],
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "total_energy": float(self.total_energy),
            "energy_error": None if self.energy_error is None else float(self.energy_error),
            "residual": float(self.residual),
            "converged": bool(self.converged),
            "iterations_used": int(self.iterations_used),
            "scf_iterations_used": int(self.scf_iterations_used),
            "wall_time_s": float(self.wall_time_s),
            "warnings": list(self.warnings),
            "trace": [
                {
                    "iteration": r.iteration,
                    "total_energy": r.total_energy,
                    "residual": r.residual,
                    "density_change": r.density_change,
                    "wall_time_s": r.wall_time_s,
                }
                for r in self.trace
            ],
        }


def initial_guess_identity(n: int, k: int) -> np.ndarray:
    """Deterministic trial block [I; 0]: top k x k identity, zeros below."""
    if not 1 <= k <= n:
        raise BadOccupation(k, n)
    v = np.zeros((n, k))
    v[:k, :k] = np.eye(k)
    return v


def initial_guess_hcore(problem: ProblemInstance) -> np.ndarray:
    """Solve the linear problem H V = S V Lambda for the k lowest pairs.

    Ignores the interaction tensor entirely; the returned columns are
    S-orthonormal. When the tensor is zero this guess is already the exact
    solution.
    """
    problem = validate_problem(problem)
    x = problem.orthogonalizer()
    eig = sym_eig(x.to_orthonormal(problem.core_hamiltonian))
    return x.back_transform(eig.eigenvectors[:, : problem.k])


def _initial_v_prime(problem: ProblemInstance, config: SolverConfig) -> np.ndarray:
    if config.init == "identity_block":
        return initial_guess_identity(problem.n_basis, problem.k)
    rng = np.random.default_rng(config.seed)
    v = rng.uniform(-1.0, 1.0, size=(problem.n_basis, problem.k))
    return gram_schmidt_qr(v)


def _s_normalize_columns(v: np.ndarray, s: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(v * (s @ v), axis=0))
    return v / norms


def _evaluation_vectors(v_prime: np.ndarray, x) -> np.ndarray:
    """Back-transform an orthonormalized copy of V' for energy evaluation."""
    try:
        q = gram_schmidt_qr(v_prime)
    except RankDeficient:
        q = v_prime
    return x.back_transform(q)


def _snapshot(problem, v, nuclear, wall, iteration, prev_p):
    p = fock.density(v)
    f_raw = fock.fock_matrix(problem, p)
    energy = fock.electronic_energy(p, problem.core_hamiltonian, f_raw) + nuclear
    lam = np.sum(v * (f_raw @ v), axis=0)
    r = f_raw @ v - (problem.overlap @ v) * lam
    res = float(np.linalg.norm(r))
    dp = 0.0 if prev_p is None else float(np.max(np.abs(p - prev_p)))
    return TraceRecord(iteration, energy, res, dp, wall), p


def _finalize(problem, method, v, *, converged, iterations_used,
              scf_iterations_used, warnings, trace, t0):
    """Common report assembly: S-renormalize, Rayleigh quotients, residual."""
    v = _s_normalize_columns(v, problem.overlap)
    f_final = fock.fock_matrix(problem, fock.density(v))
    lam = np.sum(v * (f_final @ v), axis=0)
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    res = fock.residual(problem, v)
    energy = (
        fock.electronic_energy(fock.density(v), problem.core_hamiltonian, f_final)
        + problem.nuclear_repulsion
    )
    if converged and res >= RESIDUAL_GATE:
        warnings.append(
            f"convergence criterion met but self-consistency residual "
            f"{res:.3e} exceeds {RESIDUAL_GATE:.0e}; reporting not converged"
        )
        converged = False
    if converged and np.any(lam >= 0.0):
        warnings.append("not all converged eigenvalues are negative")
    energy_error = None
    if problem.reference_energy is not None:
        energy_error = energy - problem.reference_energy
    return ConvergenceReport(
        method=method,
        label=problem.label,
        v_star=v,
        eigenvalues=lam,
        total_energy=energy,
        energy_error=energy_error,
        residual=res,
        converged=converged,
        iterations_used=iterations_used,
        scf_iterations_used=scf_iterations_used,
        wall_time_s=time.perf_counter() - t0,
        warnings=warnings,
        trace=trace,
    )


def _post_run_converged(problem, config, v_star) -> bool:
    """Strict endpoint test: one fixed-point cycle moves the total energy
    by less than energy_tol."""
    x = problem.orthogonalizer()
    p0 = fock.density(v_star)
    f0 = fock.fock_matrix(problem, p0)
    e0 = fock.electronic_energy(p0, problem.core_hamiltonian, f0)
    eig = sym_eig(x.to_orthonormal(f0))
    v1 = x.back_transform(eig.eigenvectors[:, : problem.k])
    p1 = fock.density(v1)
    f1 = fock.fock_matrix(problem, p1)
    e1 = fock.electronic_energy(p1, problem.core_hamiltonian, f1)
    return abs(e1 - e0) < config.energy_tol


def scgled_vanilla(problem: ProblemInstance, config: SolverConfig) -> ConvergenceReport:
    """Oja iteration with a fresh F' every step.

    Stops when the per-step movement ||V'_new - V'||_F drops below
    density_tol, or after t_max iterations.
    """
    problem = validate_problem(problem)
    t0 = time.perf_counter()
    x = problem.orthogonalizer()
    vp = _initial_v_prime(problem, config)
    cadence = config.effective_checkpoint_every
    trace: list[TraceRecord] = []
    warnings: list[str] = []
    prev_p = None
    stopped_early = False
    steps = 0
    for t in range(config.t_max):
        v = x.back_transform(vp)
        if not np.all(np.isfinite(v)):
            raise Diverged("trial vectors became non-finite", trace)
        if t % cadence == 0:
            rec, prev_p = _snapshot(
                problem, _evaluation_vectors(vp, x), problem.nuclear_repulsion,
                time.perf_counter() - t0, t, prev_p,
            )
            trace.append(rec)
        f_prime = x.to_orthonormal(fock.fock_matrix(problem, fock.density(v)))
        try:
            vp_new = oja_step(-f_prime, vp, config.eta)
        except RankDeficient as exc:
            raise Diverged(f"orthonormalization failed: {exc}", trace) from exc
        movement = float(np.linalg.norm(vp_new - vp))
        vp = vp_new
        steps = t + 1
        if movement < config.density_tol:
            stopped_early = True
            break
    rec, prev_p = _snapshot(
        problem, _evaluation_vectors(vp, x), problem.nuclear_repulsion,
        time.perf_counter() - t0, steps, prev_p,
    )
    if not trace or trace[-1].iteration < steps:
        trace.append(rec)
    # The movement criterion alone cannot tell the lowest-k fixed point
    # from a higher one; the single-cycle energy probe can.
    converged = (
        stopped_early
        and config.t_max > 0
        and _post_run_converged(
            problem, config, _s_normalize_columns(x.back_transform(vp), problem.overlap)
        )
    )
    return _finalize(
        problem, "scgled_vanilla", x.back_transform(vp),
        converged=converged, iterations_used=steps, scf_iterations_used=0,
        warnings=warnings, trace=trace, t0=t0,
    )


def scgled(problem: ProblemInstance, config: SolverConfig) -> ConvergenceReport:
    """Momentum-accelerated gradient iteration with interval F refreshes.

    Runs exactly t_max iterations. Every i_f-th iteration the matrix F is
    rebuilt from the current trial vectors and conditioned per the accel
    mode; with ``accel="diis"`` the first (1 - diis_tail_fraction) of the
    budget uses damping and the final fraction uses DIIS extrapolation.
    Convergence is judged after the run by a single fixed-point cycle.
    """
    problem = validate_problem(problem)
    t0 = time.perf_counter()
    x = problem.orthogonalizer()
    state = StepperState(
        v_prime=_initial_v_prime(problem, config),
        momentum=np.zeros((problem.n_basis, problem.k)),
        eta=config.eta,
        beta=config.beta,
    )
    fstate = fock.FockState(
        f_damped=problem.core_hamiltonian.copy(), alpha=config.alpha, mode=config.accel
    )
    diis_start = config.t_max - int(config.diis_tail_fraction * config.t_max)
    cadence = config.effective_checkpoint_every
    trace: list[TraceRecord] = []
    warnings: list[str] = []
    degenerate_events = 0
    prev_p = None
    neg_f_prime = None
    m_norm = 0.0
    for t in range(config.t_max):
        if t % config.i_f == 0:
            v = x.back_transform(state.v_prime)
            if not np.all(np.isfinite(v)):
                raise Diverged("trial vectors became non-finite", trace)
            p = fock.density(v)
            f_raw = fock.fock_matrix(problem, p)
            if config.accel == "vanilla":
                fstate.f_damped = f_raw
            elif config.accel == "damping" or t < diis_start:
                fock.damp(fstate, f_raw)
            else:
                fock.diis_extrapolate(fstate, f_raw, p, problem.overlap, x)
            f_prime = x.to_orthonormal(fstate.f_damped)
            neg_f_prime = -f_prime
            m_norm = float(np.linalg.norm(f_prime))
        if t % cadence == 0:
            rec, prev_p = _snapshot(
                problem, _evaluation_vectors(state.v_prime, x),
                problem.nuclear_repulsion, time.perf_counter() - t0, t, prev_p,
            )
            trace.append(rec)
        grad, bad_cols = eigengame_gradient(neg_f_prime, state.v_prime, m_norm)
        degenerate_events += len(bad_cols)
        try:
            momentum_normalize_step(state, grad)
        except VanishingColumn as exc:
            raise Diverged(f"gradient iteration diverged: {exc}", trace) from exc
    if config.t_max > 0:
        rec, prev_p = _snapshot(
            problem, _evaluation_vectors(state.v_prime, x),
            problem.nuclear_repulsion, time.perf_counter() - t0, config.t_max, prev_p,
        )
        if not trace or trace[-1].iteration < config.t_max:
            trace.append(rec)
    if degenerate_events:
        warnings.append(f"degenerate utility denominators dropped {degenerate_events} times")
    if fstate.diis_singular_count:
        warnings.append(f"DIIS system singular {fstate.diis_singular_count} times; used raw F")
    v_star = x.back_transform(state.v_prime)
    converged = config.t_max > 0 and _post_run_converged(
        problem, config, _s_normalize_columns(v_star, problem.overlap)
    )
    return _finalize(
        problem, "scgled", v_star,
        converged=converged, iterations_used=config.t_max, scf_iterations_used=0,
        warnings=warnings, trace=trace, t0=t0,
    )


def scf(problem: ProblemInstance, initial_v: np.ndarray, config: SolverConfig) -> ConvergenceReport:
    """Classical fixed-point iteration with a full diagonalization per cycle.

    Each cycle builds F from the current density, conditions it per the
    accel mode, diagonalizes X^T F X, and rebuilds the density from the k
    lowest eigenvectors. Stops when BOTH the max-abs density change is
    below density_tol AND the total-energy change is below energy_tol.
    Hitting scf_max_iters is not an exception: the report is returned with
    ``converged=False``.
    """
    problem = validate_problem(problem)
    accel = config.scf_accel if config.scf_accel is not None else config.accel
    t0 = time.perf_counter()
    x = problem.orthogonalizer()
    v = np.asarray(initial_v, dtype=float)
    p = fock.density(v)
    f_raw = fock.fock_matrix(problem, p)
    energy = (
        fock.electronic_energy(p, problem.core_hamiltonian, f_raw)
        + problem.nuclear_repulsion
    )
    fstate = fock.FockState(
        f_damped=problem.core_hamiltonian.copy(), alpha=config.alpha, mode=accel
    )
    trace: list[TraceRecord] = []
    warnings: list[str] = []
    rec, _ = _snapshot(problem, _s_normalize_columns(v, problem.overlap),
                       problem.nuclear_repulsion, time.perf_counter() - t0, 0, None)
    trace.append(rec)
    converged = False
    gap_warned = False
    iters = 0
    for it in range(1, config.scf_max_iters + 1):
        if accel == "vanilla":
            f_use = f_raw
        elif accel == "damping":
            f_use = fock.damp(fstate, f_raw).f_damped
        else:
            f_use = fock.diis_extrapolate(fstate, f_raw, p, problem.overlap, x).f_damped
        eig = sym_eig(x.to_orthonormal(f_use))
        k = problem.k
        if not gap_warned and k < problem.n_basis:
            gap = float(eig.eigenvalues[k] - eig.eigenvalues[k - 1])
            if gap < 1e-8:
                warnings.append(
                    f"near-degenerate level gap {gap:.3e} at the occupation edge; "
                    f"lowest-index tie-break applied"
                )
                gap_warned = True
        v = x.back_transform(eig.eigenvectors[:, :k])
        p_new = fock.density(v)
        f_raw = fock.fock_matrix(problem, p_new)
        energy_new = (
            fock.electronic_energy(p_new, problem.core_hamiltonian, f_raw)
            + problem.nuclear_repulsion
        )
        dp = float(np.max(np.abs(p_new - p)))
        de = abs(energy_new - energy)
        p, energy = p_new, energy_new
        iters = it
        lam = np.sum(v * (f_raw @ v), axis=0)
        r = f_raw @ v - (problem.overlap @ v) * lam
        trace.append(TraceRecord(it, energy, float(np.linalg.norm(r)), dp,
                                 time.perf_counter() - t0))
        if dp < config.density_tol and de < config.energy_tol:
            converged = True
            break
    if fstate.diis_singular_count:
        warnings.append(f"DIIS system singular {fstate.diis_singular_count} times; used raw F")
    return _finalize(
        problem, "scf", v,
        converged=converged, iterations_used=0, scf_iterations_used=iters,
        warnings=warnings, trace=trace, t0=t0,
    )


def hybrid(problem: ProblemInstance, config: SolverConfig) -> ConvergenceReport:
    """Gradient phase followed by the fixed-point phase it seeds.

    A diverging gradient phase is not fatal: the fixed-point phase falls
    back to the linear-problem guess with a warning, so a benchmark sweep
    always receives a report.
    """
    problem = validate_problem(problem)
    t0 = time.perf_counter()
    warnings: list[str] = []
    trace: list[TraceRecord] = []
    phase1_iters = 0
    try:
        phase1 = scgled(problem, config)
        v_init = phase1.v_star
        phase1_iters = phase1.iterations_used
        warnings.extend(phase1.warnings)
        trace.extend(phase1.trace)
    except Diverged as exc:
        warnings.append(f"gradient phase diverged ({exc}); fell back to the linear guess")
        v_init = initial_guess_hcore(problem)
    report = scf(problem, v_init, config)
    offset = config.t_max
    merged = trace + [
        TraceRecord(r.iteration + offset, r.total_energy, r.residual,
                    r.density_change, r.wall_time_s)
        for r in report.trace
    ]
    report.method = "hybrid"
    report.iterations_used = phase1_iters
    report.warnings = warnings + report.warnings
    report.trace = merged
    report.wall_time_s = time.perf_counter() - t0
    return report


def solve(problem: ProblemInstance, config: SolverConfig) -> ConvergenceReport:
    """Dispatch on ``config.method``.

    The ``init`` setting seeds the gradient methods; the pure fixed-point
    method always starts from the linear-problem guess.
    """
    if config.method == "scgled_vanilla":
        return scgled_vanilla(problem, config)
    if config.method == "scgled":
        return scgled(problem, config)
    if config.method == "scf":
        problem = validate_problem(problem)
        return scf(problem, initial_guess_hcore(problem), config)
    return hybrid(problem, config)
