"""Problem data for -div(A grad u) = f with homogeneous Dirichlet data.

A is a constant real 2x2 matrix whose symmetric part A_sym = (A + A^T)/2
must be positive definite.  The derived quantities used by the error
bound are

  * B = (I + A^T A^{-1})^{-1}, the weight appearing in the duality term,
  * lambda_low, the smallest eigenvalue of A_sym (the best constant c
    with (A xi, xi) >= c |xi|^2), and
  * C_F, the Friedrichs constant of the domain rectangle, the sharp
    constant in ||w|| <= C_F ||grad w|| over H^1_0.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CoefficientError

__all__ = [
    "CoefficientModel",
    "ProblemSpec",
    "compute_B",
    "compute_lambda_low",
    "friedrichs_constant",
    "csb_inequality_check",
    "example1_problem",
]


def _as_coeff_matrix(matrix):
    a = np.array(matrix, dtype=float)
    if a.shape != (2, 2):
        raise CoefficientError(f"coefficient matrix must be 2x2, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise CoefficientError("coefficient matrix has non-finite entries")
    return a


def compute_lambda_low(matrix):
    """Smallest eigenvalue of the symmetric part (A + A^T)/2, closed form."""
    a = _as_coeff_matrix(matrix)
    sym = 0.5 * (a + a.T)
    half_trace = 0.5 * (sym[0, 0] + sym[1, 1])
    radius = np.hypot(0.5 * (sym[0, 0] - sym[1, 1]), sym[0, 1])
    lam = half_trace - radius
    if lam <= 0.0:
        raise CoefficientError(
            f"symmetric part of {a.tolist()} is not positive definite "
            f"(smallest eigenvalue {lam:.6g})")
    return float(lam)


def compute_B(matrix):
    """The duality weight B = (I + A^T A^{-1})^{-1}."""
    a = _as_coeff_matrix(matrix)
    compute_lambda_low(a)   # positive definite symmetric part implies A invertible
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    a_inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det
    return np.linalg.inv(np.eye(2) + a.T @ a_inv)


class CoefficientModel:
    """Constant 2x2 diffusion matrix with its derived constants.

    lambda_override replaces the computed smallest eigenvalue of the
    symmetric part; any positive value keeps the bound valid as long as
    (A xi, xi) >= lambda |xi|^2 actually holds for it.
    """

    def __init__(self, matrix, lambda_override=None):
        a = _as_coeff_matrix(matrix)
        lam = compute_lambda_low(a)
        if lambda_override is not None:
            if lambda_override <= 0:
                raise CoefficientError(
                    f"lambda_override must be positive, got {lambda_override}")
            lam = float(lambda_override)
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        self.a = a
        self.a_inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det
        self.a_sym = 0.5 * (a + a.T)
        self.b = np.linalg.inv(np.eye(2) + a.T @ self.a_inv)
        self.lambda_low = lam
        self.lambda_override = lambda_override
        self.is_symmetric = bool(np.allclose(a, a.T, rtol=0.0, atol=1e-14))
        for arr in (self.a, self.a_inv, self.a_sym, self.b):
            arr.flags.writeable = False

    def __repr__(self):
        return (f"CoefficientModel(matrix={self.a.tolist()}, "
                f"lambda_low={self.lambda_low:.6g})")


def friedrichs_constant(x_range, y_range):
    """Sharp Friedrichs constant of a rectangle.

    Equals 1/sqrt(first Dirichlet-Laplace eigenvalue), i.e.
    1 / (pi * sqrt(1/Lx^2 + 1/Ly^2)).
    """
    lx = float(x_range[1]) - float(x_range[0])
    ly = float(y_range[1]) - float(y_range[0])
    if lx <= 0 or ly <= 0:
        raise ValueError(f"rectangle sides must be positive, got {lx} x {ly}")
    return 1.0 / (np.pi * np.sqrt(1.0 / lx**2 + 1.0 / ly**2))


def csb_inequality_check(coefficients, y, q):
    """Ratio (y, q) / [2 (A y, y)^{1/2} (A^{-1} B q, B q)^{1/2}].

    The generalized Cauchy-Schwarz bound guarantees the ratio is <= 1
    for every pair of vectors; it quantifies how much of the bound's
    slack comes from the matrix weighting.
    """
    model = coefficients if isinstance(coefficients, CoefficientModel) \
        else CoefficientModel(coefficients)
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=float)
    lhs = float(y @ q)
    bq = model.b @ q
    rhs = 2.0 * np.sqrt(float(y @ model.a @ y)) * np.sqrt(float(bq @ model.a_inv @ bq))
    if rhs == 0.0:
        return 0.0
    return lhs / rhs


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Diffusion problem on an axis-aligned rectangle.

    f, exact_u and exact_grad_u are vectorized callables of (x, y)
    arrays; exact_grad_u returns the gradient stacked on the last axis.
    c_f defaults to the sharp Friedrichs constant of the rectangle.
    """

    x_range: tuple
    y_range: tuple
    coefficients: CoefficientModel
    f: Callable
    exact_u: Optional[Callable] = None
    exact_grad_u: Optional[Callable] = None
    c_f: Optional[float] = field(default=None)

    def __post_init__(self):
        if self.c_f is None:
            object.__setattr__(self, "c_f",
                               friedrichs_constant(self.x_range, self.y_range))
        if self.c_f <= 0:
            raise ValueError(f"Friedrichs constant must be positive, got {self.c_f}")

    @property
    def has_exact_solution(self):
        return self.exact_u is not None and self.exact_grad_u is not None


def example1_problem(k1=1, k2=1, matrix=None, lambda_override=None):
    """Manufactured problem on the unit square.

    Exact solution u = sin(k1 pi x) sin(k2 pi y) with the default
    coefficient matrix [[2, 1], [0, 3]]; the forcing term is the exact
    -div(A grad u):

        f = pi^2 [(a k1^2 + d k2^2) sin sin - (b + c) k1 k2 cos cos].
    """
    if not (isinstance(k1, (int, np.integer)) and isinstance(k2, (int, np.integer))):
        raise ValueError(f"wave numbers must be integers, got {k1!r}, {k2!r}")
    if k1 < 1 or k2 < 1:
        raise ValueError(f"wave numbers must be >= 1, got k1={k1}, k2={k2}")
    if matrix is None:
        matrix = [[2.0, 1.0], [0.0, 3.0]]
    model = CoefficientModel(matrix, lambda_override=lambda_override)
    (a, b), (c, d) = model.a
    if k1 != k2:
        warnings.warn(
            f"k1={k1} != k2={k2}: the forcing term weights the diagonal "
            f"coefficients as a*k1^2 + d*k2^2; simplified forms collapsing "
            f"this to (a+d)*k1^2 hold only for k1 == k2", stacklevel=2)

    w1, w2 = k1 * np.pi, k2 * np.pi
    sin_coef = np.pi**2 * (a * k1 * k1 + d * k2 * k2)
    cos_coef = np.pi**2 * (b + c) * k1 * k2

    def f(x, y):
        return (sin_coef * np.sin(w1 * x) * np.sin(w2 * y)
                - cos_coef * np.cos(w1 * x) * np.cos(w2 * y))

    def exact_u(x, y):
        return np.sin(w1 * x) * np.sin(w2 * y)

    def exact_grad_u(x, y):
        return np.stack([w1 * np.cos(w1 * x) * np.sin(w2 * y),
                         w2 * np.sin(w1 * x) * np.cos(w2 * y)], axis=-1)

    return ProblemSpec(x_range=(0.0, 1.0), y_range=(0.0, 1.0),
                       coefficients=model, f=f,
                       exact_u=exact_u, exact_grad_u=exact_grad_u)
