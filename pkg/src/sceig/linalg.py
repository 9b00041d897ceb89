"""Dense symmetric eigensolver, Gram-Schmidt orthonormalization, and the
canonical orthogonalizer X with X^T S X = I.

All routines are pure functions of their inputs and bitwise deterministic:
fixed sweep order, fixed summation order, and a fixed eigenvector sign
convention (the entry of largest magnitude in each eigenvector is made
non-negative, ties broken by lowest index).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NoConvergence, NotPositiveDefinite, RankDeficient

__all__ = [
    "EigenDecomposition",
    "Orthogonalizer",
    "sym_eig",
    "canonical_orthogonalizer",
    "gram_schmidt_qr",
]

# Eigenvalues of the metric at or below this floor make diag(s^{-1/2}) unusable.
POSITIVITY_FLOOR = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum of a symmetric matrix, eigenvalues ascending.

    Column ``eigenvectors[:, i]`` is paired with ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class Orthogonalizer:
    """Transform X with X^T S X = I for the overlap matrix S it was built from."""

    x: np.ndarray
    x_transpose: np.ndarray

    def to_orthonormal(self, f: np.ndarray) -> np.ndarray:
        """Map a matrix into the orthonormal basis: X^T F X."""
        return self.x_transpose @ f @ self.x

    def back_transform(self, v_prime: np.ndarray) -> np.ndarray:
        """Map trial vectors back to the original basis: V = X V'."""
        return self.x @ v_prime


def _apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    # argmax returns the lowest index among equal magnitudes.
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0.0, -1.0, 1.0)
    return vectors * signs


def sym_eig(m: np.ndarray, max_sweeps: int = 40) -> EigenDecomposition:
    """Eigendecompose a real symmetric matrix by cyclic Jacobi rotations.

    The input is symmetrized internally as (M + M^T)/2. Eigenvalues are
    returned in ascending order with the deterministic sign convention
    applied to each eigenvector.

    Raises
    ------
    NoConvergence
        If the off-diagonal norm has not dropped below the convergence
        threshold after ``max_sweeps`` full sweeps.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    a = 0.5 * (m + m.T)
    v = np.eye(n)
    if n == 1:
        return EigenDecomposition(a[0].copy(), v)

    scale = np.linalg.norm(a)
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), v)
    off_tol = 1e-14 * scale

    def off_norm(mat):
        o = mat - np.diag(np.diag(mat))
        return np.linalg.norm(o)

    converged = False
    for _ in range(max_sweeps):
        if off_norm(a) <= off_tol:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # Stable rotation angle (Golub & Van Loan style).
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, p] = c * c * app - 2.0 * s * c * apq + s * s * aqq
                a[q, q] = s * s * app + 2.0 * s * c * apq + c * c * aqq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        converged = off_norm(a) <= off_tol
    if not converged:
        final_off = off_norm(a)
        raise NoConvergence(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
            f"(off-diagonal norm {final_off:.3e})",
            diagnostic=final_off,
        )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = _apply_sign_convention(v[:, order])
    return EigenDecomposition(eigenvalues, vectors)


def canonical_orthogonalizer(
    s: np.ndarray, eig: EigenDecomposition | None = None
) -> Orthogonalizer:
    """Build X = U diag(s^{-1/2}) from the spectrum of the overlap matrix.

    ``eig`` may pass in a previously computed decomposition of ``s`` (the
    problem validator caches one) to avoid repeating the eigensolve.
    """
    if eig is None:
        eig = sym_eig(np.asarray(s, dtype=float))
    smallest = float(eig.eigenvalues[0])
    if smallest <= POSITIVITY_FLOOR:
        raise NotPositiveDefinite(smallest)
    x = eig.eigenvectors * (eig.eigenvalues**-0.5)
    return Orthogonalizer(x=x, x_transpose=x.T.copy())


def gram_schmidt_qr(v: np.ndarray) -> np.ndarray:
    """Orthonormalize the columns of ``v`` by classical Gram-Schmidt.

    Column i of the output depends only on input columns 0..i, and spans
    are preserved. A second pass is run when the first loses orthogonality
    beyond 1e-10, which restores it without breaking the sequential
    dependency structure.

    Raises
    ------
    RankDeficient
        If a column's residual norm after projection falls below 1e-12.
    """
    v = np.asarray(v, dtype=float)

    def one_pass(cols):
        q = np.empty_like(cols)
        for i in range(cols.shape[1]):
            u = cols[:, i].copy()
            for j in range(i):
                u -= (q[:, j] @ cols[:, i]) * q[:, j]
            norm = np.linalg.norm(u)
            if norm < 1e-12:
                raise RankDeficient(i, float(norm))
            q[:, i] = u / norm
        return q

    q = one_pass(v)
    gram = q.T @ q
    if np.max(np.abs(gram - np.eye(q.shape[1]))) > 1e-10:
        q = one_pass(q)
    return q
