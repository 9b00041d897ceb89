"""Built-in two-basis-function instance with a known exact solution.

This is the minimal self-consistent eigenproblem used by ``verify-toy``
and the golden tests: a two-center, two-function closed-shell system with
one occupied orbital. Its converged solution, the matrix it induces, and
both generalized eigenpairs are known to four decimals and recorded in
``REFERENCE`` below.
"""

import numpy as np

from .problem import ProblemInstance, validate_problem

__all__ = ["toy_problem", "REFERENCE"]


def toy_problem() -> ProblemInstance:
    """Validated instance of the built-in two-function problem."""
    s = np.array([[1.0, 0.6593], [0.6593, 1.0]])
    h = np.array([[-1.1204, -0.9584], [-0.9584, -1.1204]])
    e = np.empty((2, 2, 2, 2))
    e[0, 0] = [[0.7746, 0.4441], [0.4441, 0.5697]]
    e[0, 1] = [[0.4441, 0.2970], [0.2970, 0.4441]]
    e[1, 0] = [[0.4441, 0.2970], [0.2970, 0.4441]]
    e[1, 1] = [[0.5697, 0.4441], [0.4441, 0.7746]]
    return validate_problem(
        ProblemInstance(
            n_basis=2,
            k=1,
            overlap=s,
            core_hamiltonian=h,
            eri=e,
            nuclear_repulsion=0.0,
            label="toy",
        )
    )


# Known solution of the instance above (four-decimal references with the
# tolerances the verification harness applies to each quantity).
REFERENCE = {
    "v1": np.array([0.5489, 0.5489]),
    "v1_tol": 1e-3,
    "lambda1": -0.5782,
    "lambda1_tol": 5e-4,
    "v2": np.array([1.2115, -1.2115]),
    "v2_tol": 5e-4,
    "lambda2": 0.6703,
    "lambda2_tol": 5e-4,
    "fock_at_solution": np.array([[-0.3655, -0.5939], [-0.5939, -0.3655]]),
    "fock_tol": 2e-4,
}
