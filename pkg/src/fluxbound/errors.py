"""Exception types shared across the package."""

__all__ = [
    "UnsupportedDegreeError",
    "CoefficientError",
    "AssemblyError",
    "IncompatibleSpacesError",
    "MissingExactSolutionError",
    "SolverError",
]


class UnsupportedDegreeError(ValueError):
    """Requested quadrature exactness degree is outside the supported range."""


class CoefficientError(ValueError):
    """Coefficient matrix is singular or its symmetric part is not positive definite."""


class AssemblyError(ValueError):
    """Triplet indices out of range or incompatible assembly inputs."""


class IncompatibleSpacesError(ValueError):
    """Operands live on different meshes or spaces."""


class MissingExactSolutionError(ValueError):
    """Operation needs an exact solution the problem does not carry."""


class SolverError(RuntimeError):
    """Iterative solver failed to reach the requested residual.

    Carries the final relative residual and the iteration count.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
