"""Problem data for the self-consistent generalized eigenproblem.

A problem instance carries the metric S, the constant one-body matrix H,
the four-index interaction tensor E that defines the effective potential,
and the occupation count k. Instances are immutable once validated and can
be shared read-only across concurrent solver runs.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import (
    AsymmetricInput,
    BadOccupation,
    BadTensorSymmetry,
    DimensionMismatch,
    IndexOutOfRange,
    NotPositiveDefinite,
)

__all__ = ["ProblemInstance", "validate_problem", "eri_element"]

SYMMETRY_TOL = 1e-10
TENSOR_TOL = 1e-8

# Index permutations under which a real-orbital interaction tensor is
# invariant: swap within the first pair, within the second pair, and
# exchange of the two pairs.
_TENSOR_PERMS = (
    (1, 0, 2, 3),
    (0, 1, 3, 2),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 0, 1),
    (2, 3, 1, 0),
    (3, 2, 1, 0),
)


@dataclass(frozen=True)
class ProblemInstance:
    """One self-consistent eigenproblem: F(V) V = S V Lambda with
    F(V) = H + U_eff(2 V V^T) and U_eff defined by the tensor ``eri``.

    ``nuclear_repulsion`` is a constant additive energy offset; it never
    enters the eigenproblem itself.
    """

    n_basis: int
    k: int
    overlap: np.ndarray
    core_hamiltonian: np.ndarray
    eri: np.ndarray
    nuclear_repulsion: float = 0.0
    reference_energy: float | None = None
    label: str | None = None
    validated: bool = field(default=False, compare=False)
    s_eig: linalg.EigenDecomposition | None = field(
        default=None, repr=False, compare=False
    )

    def orthogonalizer(self) -> linalg.Orthogonalizer:
        """Canonical orthogonalizer for this instance's overlap matrix."""
        return linalg.canonical_orthogonalizer(self.overlap, eig=self.s_eig)


def _check_shape(name: str, arr: np.ndarray, expected: tuple):
    if arr.shape != expected:
        raise DimensionMismatch(name, expected, arr.shape)


def _symmetry_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.T))) if m.size else 0.0


def validate_problem(candidate: ProblemInstance) -> ProblemInstance:
    """Check every structural invariant and return a validated instance.

    Validating an already-validated instance returns it unchanged. Tensor
    symmetry violations up to 1e-8 are repaired by averaging over the
    8-fold orbit (with a warning); larger violations are hard errors. The
    eigendecomposition of S is computed once here and cached on the
    instance for the orthogonalizer.
    """
    if candidate.validated:
        return candidate

    n = candidate.n_basis
    if n < 1:
        raise DimensionMismatch("n_basis", "positive integer", n)
    if not (1 <= candidate.k <= n):
        raise BadOccupation(candidate.k, n)

    s = np.ascontiguousarray(candidate.overlap, dtype=float)
    h = np.ascontiguousarray(candidate.core_hamiltonian, dtype=float)
    eri = np.ascontiguousarray(candidate.eri, dtype=float)
    _check_shape("overlap", s, (n, n))
    _check_shape("core_hamiltonian", h, (n, n))
    _check_shape("eri", eri, (n, n, n, n))

    dev = _symmetry_deviation(s)
    if dev > SYMMETRY_TOL:
        raise AsymmetricInput("overlap", dev)
    dev = _symmetry_deviation(h)
    if dev > SYMMETRY_TOL:
        raise AsymmetricInput("core_hamiltonian", dev)

    s_eig = linalg.sym_eig(s)
    smallest = float(s_eig.eigenvalues[0])
    if smallest <= linalg.POSITIVITY_FLOOR:
        raise NotPositiveDefinite(smallest)

    worst = 0.0
    worst_idx = (0, 0, 0, 0)
    for perm in _TENSOR_PERMS:
        diff = np.abs(eri - eri.transpose(perm))
        d = float(diff.max()) if diff.size else 0.0
        if d > worst:
            worst = d
            worst_idx = tuple(int(i) for i in np.unravel_index(diff.argmax(), diff.shape))
    if worst > TENSOR_TOL:
        raise BadTensorSymmetry(worst_idx, worst)
    if worst > 0.0:
        warnings.warn(
            f"tensor symmetry deviation {worst:.3e} repaired by orbit averaging",
            stacklevel=2,
        )
        # Averaging sequentially over the three generating swaps gives the
        # uniform orbit mean and, because a+b == b+a exactly, a tensor that
        # is bitwise symmetric (so re-validation never warns again).
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            eri = 0.5 * (eri + eri.transpose(perm))
        eri = np.ascontiguousarray(eri)

    for arr in (s, h, eri):
        arr.setflags(write=False)

    return ProblemInstance(
        n_basis=n,
        k=candidate.k,
        overlap=s,
        core_hamiltonian=h,
        eri=eri,
        nuclear_repulsion=float(candidate.nuclear_repulsion),
        reference_energy=candidate.reference_energy,
        label=candidate.label,
        validated=True,
        s_eig=s_eig,
    )


def eri_element(p: ProblemInstance, u: int, v: int, lam: int, sig: int) -> float:
    """Read one tensor element E[u, v, lam, sig] from dense storage."""
    n = p.n_basis
    for idx in (u, v, lam, sig):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"index {idx} outside [0, {n})")
    return float(p.eri[u, v, lam, sig])
