"""One-step gradient-like eigendecomposition updates.

Two steppers are provided: the Oja rule (add eta*M*v, re-orthonormalize by
Gram-Schmidt) and the decentralized utility-gradient rule in which every
column's gradient is computed from the same snapshot of all columns. Both
estimate the top-k LARGEST eigenvectors of the matrix they are given;
solvers pass -F' to obtain the smallest of F'.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import VanishingColumn
from .linalg import gram_schmidt_qr

__all__ = [
    "StepperState",
    "oja_step",
    "eigengame_gradient",
    "momentum_normalize_step",
]

# |v_j^T M v_j| below this fraction of ||M||_F is treated as a degenerate
# utility: the corresponding deflation term is dropped and reported.
DEGENERATE_UTILITY_REL_TOL = 1e-12

VANISHING_NORM_FLOOR = 1e-30


@dataclass
class StepperState:
    """Trial vectors and momentum buffer for the gradient iteration."""

    v_prime: np.ndarray
    momentum: np.ndarray
    eta: float
    beta: float


def oja_step(m_matrix: np.ndarray, v: np.ndarray, eta: float) -> np.ndarray:
    """One Oja update: orthonormalize(V + eta * M V)."""
    return gram_schmidt_qr(v + eta * (m_matrix @ v))


def eigengame_gradient(
    m_matrix: np.ndarray, v: np.ndarray, m_norm: float | None = None
) -> tuple[np.ndarray, list[int]]:
    """Riemannian utility gradients for all columns from one snapshot.

    grad_i = 2 M [v_i - sum_{j<i} (v_i^T M v_j)/(v_j^T M v_j) v_j],
    projected to the tangent space: grad_i - <grad_i, v_i> v_i.

    Returns the N x k gradient matrix and the list of column indices whose
    utility denominator was degenerate (those deflation terms are dropped;
    callers count them as warnings). ``m_norm`` may pass in a precomputed
    Frobenius norm of M.
    """
    mv = m_matrix @ v
    g = v.T @ mv
    d = np.diag(g).copy()
    if m_norm is None:
        m_norm = float(np.linalg.norm(m_matrix))
    degenerate = np.abs(d) < DEGENERATE_UTILITY_REL_TOL * m_norm
    bad_cols = [int(j) for j in np.nonzero(degenerate)[0]]
    d_safe = np.where(degenerate, 1.0, d)
    # w[i, j] = g_ij / g_jj for j < i; column j dropped when degenerate.
    w = np.tril(g / d_safe[None, :], -1)
    if bad_cols:
        w[:, degenerate] = 0.0
    grad = 2.0 * (mv - mv @ w.T)
    grad_r = grad - v * np.sum(grad * v, axis=0)
    return grad_r, bad_cols


def momentum_normalize_step(state: StepperState, grad: np.ndarray) -> StepperState:
    """Momentum update, position update, then per-column normalization.

    m <- beta m + eta grad;  v <- v + m;  v_i <- v_i / ||v_i||.
    The momentum buffer is not rescaled by the normalization.
    """
    state.momentum = state.beta * state.momentum + state.eta * grad
    state.v_prime = state.v_prime + state.momentum
    norms = np.linalg.norm(state.v_prime, axis=0)
    tiny = np.nonzero(norms < VANISHING_NORM_FLOOR)[0]
    if tiny.size:
        col = int(tiny[0])
        raise VanishingColumn(col, float(norms[col]))
    state.v_prime = state.v_prime / norms
    return state
