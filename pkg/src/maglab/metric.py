"""Magnitude of finite metric spaces via weightings.

A finite metric space is held as a symmetric distance matrix.  At scale R the
similarity matrix is Z = exp(-R * dist); a weighting is a solution of
Z w = 1 and the magnitude is sum(w).  Scale enters only through the exponent,
which is the same as rescaling all distances by R.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.spatial import distance

from .errors import ArgumentError, SolveError

#: distances are validated (symmetry, triangle inequality) to this slack
METRIC_TOL = 1e-12
#: relative residual tolerance for accepted weightings
RESIDUAL_RTOL = 1e-10
#: condition-number estimate above which a solve is declared singular
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Point labels plus an N x N distance matrix.

    ``points`` may carry coordinates (arrays) or any hashable labels; only the
    distance matrix enters the computations.  Validation checks symmetry, a
    zero diagonal, strictly positive off-diagonal entries and (optionally) the
    triangle inequality.
    """

    points: tuple
    dist: np.ndarray = field(repr=False)

    def __init__(self, points, dist, *, check_triangle=True):
        dist = np.asarray(dist, dtype=float)
        n = len(points)
        if dist.shape != (n, n):
            raise ArgumentError(f"distance matrix shape {dist.shape} does not match {n} points")
        if not np.allclose(dist, dist.T, atol=METRIC_TOL, rtol=0.0):
            raise ArgumentError("distance matrix is not symmetric")
        if np.any(np.abs(np.diag(dist)) > METRIC_TOL):
            raise ArgumentError("distance matrix has a nonzero diagonal")
        off = dist[~np.eye(n, dtype=bool)]
        if off.size and off.min() <= 0.0:
            raise ArgumentError("duplicate or negatively separated points (nonpositive off-diagonal)")
        if check_triangle and n >= 3:
            # d(i,k) <= d(i,j) + d(j,k) for all j; vectorized over j
            slack = dist[:, None, :] - (dist[:, :, None] + dist[None, :, :])
            if slack.max() > METRIC_TOL:
                raise ArgumentError("triangle inequality violated beyond tolerance")
        dist = dist.copy()
        dist.flags.writeable = False
        object.__setattr__(self, "points", tuple(points))
        object.__setattr__(self, "dist", dist)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_coordinates(cls, coords, *, labels=None):
        """Euclidean space on the rows of ``coords`` (shape (N, n))."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        dist = distance.squareform(distance.pdist(coords))
        pts = labels if labels is not None else [tuple(row) for row in coords]
        # Euclidean distances satisfy the triangle inequality by construction
        return cls(pts, dist, check_triangle=False)

    def rescaled(self, factor):
        """Same space with all distances multiplied by ``factor`` > 0."""
        if factor <= 0:
            raise ArgumentError("rescale factor must be positive")
        return FiniteMetricSpace(self.points, self.dist * factor, check_triangle=False)


@dataclass(frozen=True)
class Weighting:
    """Weight vector w with Z w = 1 at a fixed scale, plus its residual."""

    weights: np.ndarray
    scale: float
    residual: float


def similarity_matrix(space: FiniteMetricSpace, scale) -> np.ndarray:
    """Z with entries exp(-scale * d(x, y)); symmetric with unit diagonal."""
    if scale <= 0:
        raise ArgumentError("scale must be positive")
    return np.exp(-scale * space.dist)


def _solve_similarity(z, rhs):
    """Solve Z x = rhs, preferring a Cholesky factorization.

    Z is positive definite for Euclidean inputs; for general user data fall
    back to a pivoted LU solve with one step of iterative refinement.
    Raises SolveError when the condition estimate exceeds CONDITION_LIMIT.
    """
    try:
        cho = sla.cho_factor(z, check_finite=False)
        x = sla.cho_solve(cho, rhs, check_finite=False)
    except sla.LinAlgError:
        lu, piv = sla.lu_factor(z, check_finite=False)
        cond = np.linalg.cond(z, 1)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SolveError(
                f"similarity matrix numerically singular (cond ~ {cond:.3e})",
                condition=cond,
            )
        x = sla.lu_solve((lu, piv), rhs, check_finite=False)
        x += sla.lu_solve((lu, piv), rhs - z @ x, check_finite=False)
        return x
    # Cholesky succeeded; still reject hopelessly ill-conditioned systems
    diag = np.abs(np.diag(cho[0]))
    cond_est = (diag.max() / diag.min()) ** 2 if diag.min() > 0 else np.inf
    if cond_est > CONDITION_LIMIT:
        raise SolveError(
            f"similarity matrix numerically singular (cond ~ {cond_est:.3e})",
            condition=cond_est,
        )
    # one refinement step keeps the residual at the round-off floor
    x += sla.cho_solve(cho, rhs - z @ x, check_finite=False)
    return x


def weighting(space: FiniteMetricSpace, scale) -> Weighting:
    """Solve Z w = 1 and record the max-norm residual."""
    z = similarity_matrix(space, scale)
    ones = np.ones(len(space))
    w = _solve_similarity(z, ones)
    residual = float(np.abs(z @ w - 1.0).max())
    if residual > RESIDUAL_RTOL * max(1, len(space)):
        raise SolveError(f"weighting residual {residual:.3e} above tolerance")
    return Weighting(weights=w, scale=float(scale), residual=residual)


def magnitude(space: FiniteMetricSpace, scale) -> float:
    """Sum of the weights at the given scale."""
    return float(weighting(space, scale).weights.sum())


def is_positive_definite(space: FiniteMetricSpace, scale):
    """Whether Z is positive definite, with a smallest-eigenvalue estimate.

    Returns (flag, lambda_min).  The flag is decided by attempting a Cholesky
    factorization; the eigenvalue estimate comes from a symmetric eigensolve
    of the (small, dense) matrix.
    """
    z = similarity_matrix(space, scale)
    lam_min = float(sla.eigvalsh(z, subset_by_index=[0, 0])[0])
    try:
        sla.cho_factor(z, check_finite=False)
    except sla.LinAlgError:
        return False, lam_min
    return True, lam_min


def magnitude_sweep(space: FiniteMetricSpace, scales):
    """Magnitude at each scale of an iterable; returns an array."""
    return np.array([magnitude(space, s) for s in scales])


def load_point_file(path_or_lines):
    """Read a point set from text.

    Either one point per line (whitespace/comma separated coordinates,
    Euclidean metric) or an explicit matrix block introduced by a header
    line ``matrix N`` followed by N rows of N entries.
    """
    if isinstance(path_or_lines, (str, bytes)):
        with open(path_or_lines) as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(path_or_lines)
    rows = [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ArgumentError("empty point file")
    first = rows[0].split()
    if first and first[0].lower() == "matrix":
        n = int(first[1])
        if len(rows) - 1 < n:
            raise ArgumentError(f"matrix block promises {n} rows, found {len(rows) - 1}")
        mat = np.array([[float(v) for v in r.replace(",", " ").split()] for r in rows[1 : n + 1]])
        if mat.shape != (n, n):
            raise ArgumentError("matrix block has wrong shape")
        return FiniteMetricSpace(list(range(n)), mat)
    coords = np.array([[float(v) for v in r.replace(",", " ").split()] for r in rows])
    return FiniteMetricSpace.from_coordinates(coords)
