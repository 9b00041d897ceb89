"""Solver toolkit for self-consistent nonlinear generalized eigenvalue
problems F(V) V = S V Lambda, where the matrix F depends on its own k
lowest eigenvectors through F(V) = H + U_eff(2 V V^T).
"""

from . import exceptions
from .fock import (
    FockState,
    damp,
    density,
    diis_extrapolate,
    electronic_energy,
    fock_matrix,
    hartree_fock_potential,
    residual,
    u_eff_hf,
)
from .linalg import (
    EigenDecomposition,
    Orthogonalizer,
    canonical_orthogonalizer,
    gram_schmidt_qr,
    sym_eig,
)
from .probfile import parse_problem, write_problem
from .problem import ProblemInstance, eri_element, validate_problem
from .solvers import (
    ConvergenceReport,
    SolverConfig,
    TraceRecord,
    hybrid,
    initial_guess_hcore,
    initial_guess_identity,
    scf,
    scgled,
    scgled_vanilla,
    solve,
)
from .steppers import StepperState, eigengame_gradient, momentum_normalize_step, oja_step
from .toy import toy_problem

__version__ = "0.1.0"

__all__ = [
    "exceptions",
    "ProblemInstance",
    "validate_problem",
    "eri_element",
    "EigenDecomposition",
    "Orthogonalizer",
    "sym_eig",
    "canonical_orthogonalizer",
    "gram_schmidt_qr",
    "FockState",
    "density",
    "u_eff_hf",
    "hartree_fock_potential",
    "fock_matrix",
    "damp",
    "diis_extrapolate",
    "electronic_energy",
    "residual",
    "StepperState",
    "oja_step",
    "eigengame_gradient",
    "momentum_normalize_step",
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
    "parse_problem",
    "write_problem",
    "toy_problem",
]
