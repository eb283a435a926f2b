"""Gaussian affinity kernels and bandwidth calibration to a target second eigenvalue."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh

from .exceptions import CalibrationError, InputError

# Bandwidth search parameters: initial bracket is the median pairwise distance
# scaled by BRACKET_SPAN on each side, each side expands tenfold at most
# MAX_EXPANSIONS times, and a non-monotone bracket falls back to a log-spaced
# grid scan of GRID_POINTS before bisecting.
BRACKET_SPAN = 1e2
MAX_EXPANSIONS = 4
GRID_POINTS = 64
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class PointCloud:
    """Finite sample of d-dimensional points, one point per row."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise InputError("points must be a 2-d array of shape (n, d)")
        if pts.shape[0] < 2:
            raise InputError("a point cloud needs at least two points")
        if pts.shape[1] < 1:
            raise InputError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise InputError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric, strictly positive affinity matrix for one parameter instance."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise InputError("kernel must be a square matrix")
        if vals.shape[0] < 2:
            raise InputError("kernel must be at least 2x2")
        if not np.all(np.isfinite(vals)):
            raise InputError("kernel entries must be finite")
        if not np.array_equal(vals, vals.T):
            raise InputError("kernel must be exactly symmetric")
        # strictly positive in exact arithmetic; far pairs at tiny bandwidths
        # underflow to zero in floats, so only signs and the diagonal are checked
        if np.any(vals < 0.0):
            raise InputError("kernel entries must be positive")
        if not np.all(np.diag(vals) > 0.0):
            raise InputError("kernel diagonal must be strictly positive")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def squared_distances(points: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances, exactly symmetric and exactly zero
    for duplicated points (accumulated per coordinate, no dot-product shortcut)."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    sq = np.zeros((n, n))
    for k in range(pts.shape[1]):
        diff = pts[:, k, None] - pts[None, :, k]
        sq += diff * diff
    return sq


def gaussian_kernel(cloud: PointCloud, epsilon: float) -> KernelMatrix:
    """Gaussian affinity exp(-|x_i - x_j|^2 / epsilon^2).

    The diagonal is exactly 1 and is the row maximum; entries lie in (0, 1].
    """
    if not epsilon > 0.0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    sq = squared_distances(cloud.points)
    vals = np.exp(-sq / (epsilon * epsilon))
    np.fill_diagonal(vals, 1.0)
    return KernelMatrix(vals)


def _second_eigenvalue(kernel_values: np.ndarray) -> float:
    """Second-largest eigenvalue of D^{-1/2} K D^{-1/2} for a positive kernel."""
    deg = kernel_values.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    sym = kernel_values * np.outer(inv_sqrt, inv_sqrt)
    n = sym.shape[0]
    try:
        vals = eigvalsh(sym, subset_by_index=(n - 2, n - 1))
        return float(vals[0])
    except np.linalg.LinAlgError:
        # the subset driver can fail on tightly clustered spectra; the full
        # divide-and-conquer solve is slower but does not
        return float(np.linalg.eigvalsh(sym)[-2])


def calibrate_epsilon(
    cloud: PointCloud,
    target_lambda2: float,
    tol: float = 1e-3,
) -> float:
    """Find a Gaussian bandwidth whose diffusion matrix has the requested second eigenvalue.

    Bisects on log(epsilon). The second eigenvalue runs from 1 (epsilon -> 0,
    kernel collapses to the identity) down to 0 (epsilon -> infinity, kernel
    collapses to all-ones), so the search assumes a non-increasing trend and
    falls back to a 64-point log-spaced grid scan when the expanded bracket
    does not straddle the target.

    Raises CalibrationError, reporting the achieved eigenvalue range, when no
    bandwidth inside the bracket limits crosses the target.
    """
    if not 0.0 < target_lambda2 < 1.0:
        raise InputError(f"target second eigenvalue must lie in (0, 1), got {target_lambda2}")
    if not tol > 0.0:
        raise InputError(f"tol must be positive, got {tol}")

    sq = squared_distances(cloud.points)
    pos = sq[np.triu_indices(cloud.n, k=1)]
    pos = pos[pos > 0.0]
    if pos.size == 0:
        raise CalibrationError(
            "all points coincide; the second eigenvalue is constant", achieved_range=None
        )
    median_dist = float(np.sqrt(np.median(pos)))

    def lam2(eps: float) -> float:
        vals = np.exp(-sq / (eps * eps))
        np.fill_diagonal(vals, 1.0)
        return _second_eigenvalue(vals)

    lo = median_dist / BRACKET_SPAN
    hi = median_dist * BRACKET_SPAN
    f_lo = lam2(lo)
    f_hi = lam2(hi)
    # want lam2(lo) >= target >= lam2(hi); each side may expand tenfold four times
    for _ in range(MAX_EXPANSIONS):
        if f_lo >= target_lambda2:
            break
        lo /= 10.0
        f_lo = lam2(lo)
    for _ in range(MAX_EXPANSIONS):
        if f_hi <= target_lambda2:
            break
        hi *= 10.0
        f_hi = lam2(hi)

    if not (f_lo >= target_lambda2 >= f_hi):
        # non-monotone or out-of-reach bracket: scan before giving up
        grid = np.exp(np.linspace(np.log(lo), np.log(hi), GRID_POINTS))
        scans = np.array([lam2(e) for e in grid])
        crossing = None
        for k in range(GRID_POINTS - 1):
            a, b = scans[k], scans[k + 1]
            if (a - target_lambda2) * (b - target_lambda2) <= 0.0:
                crossing = k
                break
        if crossing is None:
            achieved = (float(scans.min()), float(scans.max()))
            raise CalibrationError(
                "second eigenvalue never crosses "
                f"{target_lambda2}: achieved range {achieved}",
                achieved_range=achieved,
            )
        lo, hi = float(grid[crossing]), float(grid[crossing + 1])
        f_lo, f_hi = float(scans[crossing]), float(scans[crossing + 1])

    best_eps, best_gap = lo, abs(f_lo - target_lambda2)
    if abs(f_hi - target_lambda2) < best_gap:
        best_eps, best_gap = hi, abs(f_hi - target_lambda2)
    for _ in range(MAX_BISECTIONS):
        if best_gap <= tol:
            return best_eps
        mid = float(np.sqrt(lo * hi))
        f_mid = lam2(mid)
        gap = abs(f_mid - target_lambda2)
        if gap < best_gap:
            best_eps, best_gap = mid, gap
        if (f_lo - target_lambda2) * (f_mid - target_lambda2) <= 0.0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    if best_gap <= tol:
        return best_eps
    raise CalibrationError(
        f"bisection stalled at |lambda2 - {target_lambda2}| = {best_gap:.3e}",
        achieved_range=(min(f_lo, f_hi), max(f_lo, f_hi)),
    )
