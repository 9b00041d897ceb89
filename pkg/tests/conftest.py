import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sceig.problem import ProblemInstance, validate_problem
from sceig.toy import toy_problem


@pytest.fixture(scope="session")
def toy():
    return toy_problem()


def make_problem(seed: int, n: int, k: int, interaction: float = 0.0,
                 label: str | None = None) -> ProblemInstance:
    """Synthetic validated instance: well-conditioned SPD metric, negative
    definite one-body matrix, and an optional rank-3 interaction tensor
    with the full 8-fold symmetry (zero when ``interaction`` is 0).
    """
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    s = a @ a.T / n + np.eye(n)
    b = rng.normal(size=(n, n))
    h = -(b @ b.T) / n - np.eye(n)
    eri = np.zeros((n, n, n, n))
    if interaction:
        for _ in range(3):
            c = rng.normal(size=(n, n))
            c = 0.5 * (c + c.T)
            w = rng.uniform(0.2, 1.0)
            eri += w * np.einsum("uv,ls->uvls", c, c)
        eri *= interaction / 3.0
    return validate_problem(ProblemInstance(
        n_basis=n, k=k, overlap=s, core_hamiltonian=h, eri=eri,
        label=label or f"synthetic-{seed}-{n}-{k}",
    ))


def linear_problem(seed: int, n: int, k: int) -> ProblemInstance:
    """Instance with a zero interaction tensor (no self-consistency)."""
    return make_problem(seed, n, k, interaction=0.0)
