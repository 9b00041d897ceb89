"""Exception types shared across the package."""


class SceigError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SceigError):
    """An array does not have the shape required by the operation."""

    def __init__(self, name: str, expected, actual):
        self.name = name
        self.expected = expected
        self.actual = actual
        super().__init__(f"{name}: expected {expected}, got {actual}")


class AsymmetricInput(SceigError):
    """A matrix that must be symmetric is not, beyond tolerance."""

    def __init__(self, name: str, max_deviation: float):
        self.name = name
        self.max_deviation = max_deviation
        super().__init__(f"{name} is not symmetric: max |M - M^T| = {max_deviation:.3e}")


class NotPositiveDefinite(SceigError):
    """The metric matrix has an eigenvalue at or below the strict-positivity floor."""

    def __init__(self, smallest_eigenvalue: float):
        self.smallest_eigenvalue = smallest_eigenvalue
        super().__init__(
            f"overlap matrix is not positive definite: smallest eigenvalue = "
            f"{smallest_eigenvalue:.6e}"
        )


class BadTensorSymmetry(SceigError):
    """The two-electron tensor violates its 8-fold index symmetry beyond repair."""

    def __init__(self, indices: tuple, deviation: float):
        self.indices = indices
        self.deviation = deviation
        super().__init__(
            f"tensor symmetry violated at indices {indices}: deviation {deviation:.3e}"
        )


class BadOccupation(SceigError):
    """The occupation count k is outside [1, N]."""

    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"occupation k={k} out of range [1, {n}]")


class IndexOutOfRange(SceigError):
    """A tensor index lies outside [0, N)."""


class NoConvergence(SceigError):
    """An iterative kernel exhausted its iteration budget."""

    def __init__(self, message: str, diagnostic: float | None = None):
        self.diagnostic = diagnostic
        super().__init__(message)


class RankDeficient(SceigError):
    """Orthonormalization hit a numerically dependent column."""

    def __init__(self, column: int, residual_norm: float):
        self.column = column
        self.residual_norm = residual_norm
        super().__init__(
            f"column {column} numerically dependent on earlier columns "
            f"(residual norm {residual_norm:.3e})"
        )


class VanishingColumn(SceigError):
    """A trial-vector column collapsed to zero norm; the iteration is diverging."""

    def __init__(self, column: int, norm: float):
        self.column = column
        self.norm = norm
        super().__init__(f"column {column} vanished (norm {norm:.3e})")


class Diverged(SceigError):
    """A solver run produced non-finite values or vanishing columns."""

    def __init__(self, message: str, trace=None):
        self.trace = list(trace) if trace is not None else []
        super().__init__(message)


class ParseError(SceigError):
    """A problem document could not be parsed."""


class EmptyInput(SceigError):
    """An aggregation was asked to summarize zero rows."""
