"""Quadrature rules on the reference triangle {x >= 0, y >= 0, x + y <= 1}.

Rules for exactness degree 1 and 2 are the classical centroid and
three-point rules.  Higher degrees are generated from tensor Gauss-Legendre
rules through the collapsed-coordinate (conical product) substitution

    int_T f = int_0^1 (1 - x) int_0^1 f(x, t (1 - x)) dt dx

and then averaged over the six affine symmetries of the triangle.  Group
averaging preserves polynomial exactness, keeps every weight positive, and
avoids transcribing long coefficient tables.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedDegreeError

__all__ = ["QuadRule", "rule_for_degree", "gauss01", "MAX_DEGREE"]

MAX_DEGREE = 12


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Positive-weight rule; weights sum to the reference area 1/2."""

    points: np.ndarray   # (n, 2) reference coordinates, strictly inside
    weights: np.ndarray  # (n,)
    degree: int          # guaranteed polynomial exactness degree

    def __post_init__(self):
        self.points.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self):
        return self.weights.shape[0]


def gauss01(n):
    """n-point Gauss-Legendre rule mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _conical_rule(degree):
    # x-direction carries the extra (1 - x) area factor, so it needs one
    # more degree of exactness than the y-direction
    mx = (degree + 3) // 2
    my = (degree + 2) // 2
    x, wx = gauss01(mx)
    t, wt = gauss01(my)
    pts = np.empty((mx * my, 2))
    pts[:, 0] = np.repeat(x, my)
    pts[:, 1] = np.tile(t, mx) * (1.0 - pts[:, 0])
    w = (np.repeat(wx * (1.0 - x), my) * np.tile(wt, mx))
    return pts, w


def _symmetrize(points, weights):
    # images of (x, y) under the six barycentric permutations
    x, y = points[:, 0], points[:, 1]
    z = 1.0 - x - y
    images = [(x, y), (y, x), (x, z), (z, x), (y, z), (z, y)]
    pts = np.concatenate([np.column_stack(im) for im in images], axis=0)
    w = np.tile(weights / 6.0, 6)

    # merge points that coincide up to roundoff; the representative is the
    # group mean so the merge error stays at machine level
    order = np.lexsort((np.round(pts[:, 1], 12), np.round(pts[:, 0], 12)))
    pts, w = pts[order], w[order]
    key = np.round(pts, 12)
    new_group = np.ones(len(w), dtype=bool)
    new_group[1:] = np.any(key[1:] != key[:-1], axis=1)
    starts = np.flatnonzero(new_group)
    counts = np.diff(np.append(starts, len(w)))
    merged_w = np.add.reduceat(w, starts)
    merged_pts = np.add.reduceat(pts, starts, axis=0) / counts[:, None]
    return merged_pts, merged_w


@lru_cache(maxsize=None)
def rule_for_degree(degree):
    """Smallest available rule exact for all polynomials of the given degree.

    Supported degrees are 1 through 12.
    """
    degree = int(degree)
    if degree < 1 or degree > MAX_DEGREE:
        raise UnsupportedDegreeError(
            f"quadrature degree must be within [1, {MAX_DEGREE}], got {degree}")
    if degree == 1:
        pts = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        w = np.array([0.5])
    elif degree == 2:
        pts = np.array([
            [2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0],
            [1.0 / 6.0, 1.0 / 6.0],
        ])
        w = np.full(3, 1.0 / 6.0)
    else:
        pts, w = _symmetrize(*_conical_rule(degree))
    return QuadRule(points=pts, weights=w, degree=degree)
