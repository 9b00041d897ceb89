"""Construction and conditioning of the self-consistent matrix F.

Covers the density P(V) = 2 V V^T, the Hartree-Fock effective potential
(Coulomb minus half exchange), Fock assembly F = H + U_eff(P), convex
damping, DIIS extrapolation, the closed-shell energy, and the
self-consistency residual ||F(V) V - S V Lambda||_F.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch
from .linalg import Orthogonalizer
from .problem import ProblemInstance

__all__ = [
    "FockState",
    "density",
    "u_eff_hf",
    "hartree_fock_potential",
    "fock_matrix",
    "damp",
    "diis_extrapolate",
    "electronic_energy",
    "residual",
]

DIIS_HISTORY_CAP = 8


def density(v: np.ndarray) -> np.ndarray:
    """Closed-shell density P = 2 V V^T; symmetric by construction."""
    v = np.asarray(v, dtype=float)
    return 2.0 * (v @ v.T)


def u_eff_hf(p: np.ndarray, problem: ProblemInstance) -> np.ndarray:
    """Effective potential: Coulomb term minus half the exchange term.

    [U]_uv = sum_{ls} P_ls E[u,v,l,s] - 1/2 sum_{ls} P_ls E[u,l,s,v].
    Linear in P; symmetric output whenever P is symmetric and the tensor
    passes its symmetry validation.
    """
    p = np.asarray(p, dtype=float)
    n = problem.n_basis
    if p.shape != (n, n):
        raise DimensionMismatch("density", (n, n), p.shape)
    coulomb = np.einsum("ls,uvls->uv", p, problem.eri)
    exchange = np.einsum("ls,ulsv->uv", p, problem.eri)
    return coulomb - 0.5 * exchange


def hartree_fock_potential(problem: ProblemInstance):
    """The effective potential as a pluggable matrix -> matrix map."""

    def u_eff(p: np.ndarray) -> np.ndarray:
        return u_eff_hf(p, problem)

    return u_eff


def fock_matrix(problem: ProblemInstance, p: np.ndarray) -> np.ndarray:
    """F(P) = H + U_eff(P). With P = 0 this is exactly H."""
    return problem.core_hamiltonian + u_eff_hf(p, problem)


@dataclass
class FockState:
    """Conditioning state owned by a single solver run.

    ``f_damped`` starts at H, so the first damped update mixes toward H.
    ``mode`` selects how ``f_damped`` is advanced: plain replacement
    (vanilla), convex mixing (damping), or least-squares extrapolation
    over the history (diis).
    """

    f_damped: np.ndarray
    alpha: float = 0.2
    mode: str = "damping"
    f_prime: np.ndarray | None = None
    diis_history: deque = field(default_factory=lambda: deque(maxlen=DIIS_HISTORY_CAP))
    diis_singular_count: int = 0


def damp(state: FockState, f_new: np.ndarray) -> FockState:
    """Convex mixing f <- (1 - alpha) f + alpha f_new, in place."""
    state.f_damped = (1.0 - state.alpha) * state.f_damped + state.alpha * f_new
    return state


def diis_extrapolate(
    state: FockState,
    f_new: np.ndarray,
    p: np.ndarray,
    s: np.ndarray,
    x: Orthogonalizer,
) -> FockState:
    """Extrapolate F from the stored history by the commutator-error scheme.

    The error matrix is e = X^T (F P S - S P F) X, which vanishes at
    self-consistency. Coefficients solve the bordered least-squares system
    with the sum-to-one constraint; a singular system is not an error and
    falls back to the plain ``f_new`` while counting the event.
    """
    err = x.x_transpose @ (f_new @ p @ s - s @ p @ f_new) @ x.x
    state.diis_history.append((f_new.copy(), err))
    if len(state.diis_history) == 1:
        state.f_damped = f_new.copy()
        return state

    coeffs = diis_coefficients([e for _, e in state.diis_history])
    if coeffs is None:
        state.diis_singular_count += 1
        state.f_damped = f_new.copy()
        return state

    f = np.zeros_like(f_new)
    for c, (fi, _) in zip(coeffs, state.diis_history):
        f += c * fi
    state.f_damped = f
    return state


def diis_coefficients(errors) -> np.ndarray | None:
    """Solve the bordered least-squares system for the mixing weights.

    Weights sum to one by the Lagrange constraint. Returns None when the
    system is singular or produces non-finite values.
    """
    m = len(errors)
    b = np.empty((m + 1, m + 1))
    for i, ei in enumerate(errors):
        for j, ej in enumerate(errors):
            b[i, j] = float(np.sum(ei * ej))
    b[m, :m] = -1.0
    b[:m, m] = -1.0
    b[m, m] = 0.0
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        sol = np.linalg.solve(b, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return sol[:m]


def electronic_energy(p: np.ndarray, h: np.ndarray, f: np.ndarray) -> float:
    """Closed-shell electronic energy 1/2 sum_uv P_uv (H_uv + F_uv)."""
    p = np.asarray(p, dtype=float)
    if not (p.shape == h.shape == f.shape):
        raise DimensionMismatch("energy operands", p.shape, (h.shape, f.shape))
    return 0.5 * float(np.sum(p * (h + f)))


def residual(problem: ProblemInstance, v: np.ndarray) -> float:
    """Self-consistency residual ||F(V) V - S V Lambda||_F.

    Lambda holds the Rayleigh quotients v_i^T F(V) v_i; the caller must
    supply S-normalized columns (v^T S v = 1).
    """
    v = np.asarray(v, dtype=float)
    f = fock_matrix(problem, density(v))
    lam = np.sum(v * (f @ v), axis=0)
    r = f @ v - (problem.overlap @ v) * lam
    return float(np.linalg.norm(r))
