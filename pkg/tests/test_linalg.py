import numpy as np
import pytest

from sceig.exceptions import NoConvergence, NotPositiveDefinite, RankDeficient
from sceig.linalg import canonical_orthogonalizer, gram_schmidt_qr, sym_eig

from conftest import make_problem
from oracles import generalized_eig, subspace_projector_distance


def random_symmetric(seed, n, scale=1.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) * scale
    return 0.5 * (a + a.T)


# --- sym_eig -----------------------------------------------------------------

def test_sym_eig_diagonal():
    eig = sym_eig(np.diag([2.0, 1.0]))
    assert np.allclose(eig.eigenvalues, [1.0, 2.0], atol=1e-14)
    assert np.allclose(eig.eigenvectors, np.array([[0.0, 1.0], [1.0, 0.0]]), atol=1e-14)


def test_sym_eig_reconstruction():
    m = random_symmetric(3, 6)
    eig = sym_eig(m)
    rebuilt = eig.eigenvectors @ np.diag(eig.eigenvalues) @ eig.eigenvectors.T
    assert np.max(np.abs(rebuilt - m)) < 1e-8


def test_sym_eig_residual_and_orthonormality():
    m = random_symmetric(5, 9, scale=4.0)
    eig = sym_eig(m)
    fro = np.linalg.norm(m)
    for i in range(9):
        res = m @ eig.eigenvectors[:, i] - eig.eigenvalues[i] * eig.eigenvectors[:, i]
        assert np.linalg.norm(res) < 1e-8 * fro
    gram = eig.eigenvectors.T @ eig.eigenvectors
    assert np.max(np.abs(gram - np.eye(9))) < 1e-10


def test_sym_eig_trace_and_frobenius_invariants():
    m = random_symmetric(11, 7, scale=2.5)
    eig = sym_eig(m)
    fro = np.linalg.norm(m)
    assert abs(np.trace(m) - eig.eigenvalues.sum()) < 1e-8 * max(fro, 1.0)
    assert abs(fro**2 - np.sum(eig.eigenvalues**2)) < 1e-8 * fro**2


def test_sym_eig_matches_lapack_spectrum():
    m = random_symmetric(13, 8)
    mine = sym_eig(m).eigenvalues
    theirs = np.linalg.eigvalsh(m)
    assert np.max(np.abs(mine - theirs)) < 1e-10 * max(1.0, np.linalg.norm(m))


def test_sym_eig_sign_convention():
    m = random_symmetric(17, 6)
    eig = sym_eig(m)
    for i in range(6):
        col = eig.eigenvectors[:, i]
        assert col[np.argmax(np.abs(col))] >= 0.0


def test_sym_eig_deterministic_bits():
    m = random_symmetric(19, 8)
    a = sym_eig(m)
    b = sym_eig(m.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_sym_eig_internal_symmetrization():
    m = random_symmetric(23, 5)
    bumped = m.copy()
    bumped[0, 1] += 4e-9  # symmetrized internally as (M + M^T)/2
    eig = sym_eig(bumped)
    ref = sym_eig(0.5 * (bumped + bumped.T))
    assert np.array_equal(eig.eigenvalues, ref.eigenvalues)


def test_sym_eig_no_convergence():
    m = random_symmetric(29, 10, scale=3.0)
    with pytest.raises(NoConvergence) as err:
        sym_eig(m, max_sweeps=0)
    assert err.value.diagnostic > 0.0


def test_sym_eig_degenerate_subspace_projector():
    # Eigenvalue 1 is doubly degenerate; compare subspaces, not vectors.
    rng = np.random.default_rng(31)
    q = np.linalg.qr(rng.normal(size=(4, 4)))[0]
    m = q @ np.diag([1.0, 1.0, 2.0, 3.0]) @ q.T
    eig = sym_eig(m)
    w, v = generalized_eig(m, np.eye(4))
    assert subspace_projector_distance(eig.eigenvectors[:, :2], v[:, :2]) < 1e-8


def test_sym_eig_zero_and_single():
    eig = sym_eig(np.zeros((3, 3)))
    assert np.array_equal(eig.eigenvalues, np.zeros(3))
    eig1 = sym_eig(np.array([[4.0]]))
    assert eig1.eigenvalues[0] == 4.0 and eig1.eigenvectors[0, 0] == 1.0


# --- canonical_orthogonalizer -------------------------------------------------

def test_orthogonalizer_identity():
    x = canonical_orthogonalizer(np.eye(3))
    assert np.allclose(x.x, np.eye(3), atol=1e-14)


def test_orthogonalizer_toy(toy):
    x = canonical_orthogonalizer(np.asarray(toy.overlap))
    assert np.max(np.abs(x.x.T @ toy.overlap @ x.x - np.eye(2))) < 1e-12


def test_orthogonalizer_random_spd():
    rng = np.random.default_rng(37)
    a = rng.normal(size=(5, 5))
    s = a @ a.T + np.eye(5)
    x = canonical_orthogonalizer(s)
    assert np.max(np.abs(x.x.T @ s @ x.x - np.eye(5))) < 1e-10


def test_orthogonalizer_rejects_singular():
    s = np.ones((2, 2))
    with pytest.raises(NotPositiveDefinite):
        canonical_orthogonalizer(s)


def test_orthogonalizer_agrees_with_generalized_oracle():
    # Composing X with the standard eigensolver must reproduce the
    # generalized eigenvalues computed by an independent solver.
    for seed, n in [(41, 4), (43, 6), (47, 8)]:
        p = make_problem(seed, n, 1)
        x = canonical_orthogonalizer(np.asarray(p.overlap))
        mine = sym_eig(x.x.T @ p.core_hamiltonian @ x.x).eigenvalues
        theirs = generalized_eig(np.asarray(p.core_hamiltonian),
                                 np.asarray(p.overlap))[0]
        assert np.max(np.abs(mine - theirs)) < 1e-8


# --- gram_schmidt_qr ----------------------------------------------------------

def test_gram_schmidt_idempotent_on_orthonormal():
    rng = np.random.default_rng(53)
    q = np.linalg.qr(rng.normal(size=(6, 3)))[0]
    out = gram_schmidt_qr(q)
    assert np.max(np.abs(out - q)) < 1e-12


def test_gram_schmidt_hand_case():
    v = np.array([[1.0, 1.0], [0.0, 1.0]])
    out = gram_schmidt_qr(v)
    assert np.allclose(out, np.eye(2), atol=1e-14)


def test_gram_schmidt_random_properties():
    rng = np.random.default_rng(59)
    v = rng.normal(size=(8, 3))
    q = gram_schmidt_qr(v)
    assert np.max(np.abs(q.T @ q - np.eye(3))) < 1e-10
    assert subspace_projector_distance(q, v) < 1e-8


def test_gram_schmidt_sequential_dependency():
    # Column i depends only on input columns 0..i.
    rng = np.random.default_rng(61)
    v = rng.normal(size=(7, 3))
    full = gram_schmidt_qr(v)
    partial = gram_schmidt_qr(v[:, :2])
    assert np.allclose(full[:, :2], partial, atol=1e-12)


def test_gram_schmidt_rank_deficient():
    v = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(RankDeficient) as err:
        gram_schmidt_qr(v)
    assert err.value.column == 1


def test_gram_schmidt_fixed_point_at_eigenbasis():
    # If M v_i = lambda_i v_i then orthonormalize(V + eta M V) returns V
    # up to per-column sign.
    m = random_symmetric(67, 6)
    eig = sym_eig(m)
    v = eig.eigenvectors[:, :3]
    out = gram_schmidt_qr(v + 0.05 * (m @ v))
    assert np.max(np.abs(np.abs(out) - np.abs(v))) < 1e-12
    for i in range(3):
        assert abs(abs(out[:, i] @ v[:, i]) - 1.0) < 1e-12
