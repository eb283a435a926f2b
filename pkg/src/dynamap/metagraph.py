"""Second-level diffusion analysis: graph-of-graphs and historical embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    CorrespondenceError,
    DegeneracyError,
    InputError,
    NumericalError,
)
from .kernels import KernelMatrix
from .operators import DiffusionMatrix, SpectralDecomposition, diffusion_matrix, spectral_decomposition

MEDIAN = "median"

EXPONENTIAL = "exponential"
INNER_PRODUCT = "inner_product"

NEGATIVE_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class MetaGraph:
    """Gaussian kernel over a family of graphs built from global diffusion distances."""

    kernel: np.ndarray
    epsilon: float
    t: int

    @property
    def size(self) -> int:
        return self.kernel.shape[0]


@dataclass(frozen=True)
class HistoricalGraph:
    """Kernel over all (point, parameter) pairs; index = parameter * n + point."""

    kernel: np.ndarray
    epsilon: float | None
    t: int
    n: int
    n_params: int


@dataclass(frozen=True)
class Trajectory:
    """One point's sequence of embedded coordinates across the parameter family."""

    point: int
    coords: np.ndarray

    def __len__(self) -> int:
        return self.coords.shape[0]


def meta_kernel(family_distances: np.ndarray, epsilon: float | str = MEDIAN, t: int = 1) -> MetaGraph:
    """Gaussian weights exp(-dist^2 / epsilon^2) over a family's global distances.

    epsilon=MEDIAN resolves the bandwidth to the median off-diagonal distance.
    """
    dist = np.asarray(family_distances, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise InputError("family distance matrix must be square")
    if np.max(np.abs(dist - dist.T)) > 1e-10:
        raise InputError("family distance matrix must be symmetric")
    if np.max(np.abs(np.diag(dist))) > 1e-12:
        raise InputError("family distance matrix must have a zero diagonal")
    if isinstance(epsilon, str):
        if epsilon != MEDIAN:
            raise InputError(f"epsilon must be a positive number or '{MEDIAN}'")
        offdiag = dist[np.triu_indices(dist.shape[0], k=1)]
        eps = float(np.median(offdiag)) if offdiag.size else 0.0
        if eps <= 0.0:
            raise DegeneracyError("median bandwidth degenerate: all family distances are zero")
    else:
        eps = float(epsilon)
        if eps <= 0.0:
            raise InputError(f"epsilon must be positive, got {epsilon}")
    kern = np.exp(-(dist * dist) / (eps * eps))
    # mirror the upper triangle: roundoff asymmetry in the input distances
    # must not leak into the kernel
    kern = np.triu(kern, 1)
    kern = kern + kern.T
    np.fill_diagonal(kern, 1.0)
    return MetaGraph(kernel=kern, epsilon=eps, t=int(t))


def _timescaled_coords(dec: SpectralDecomposition, s: float) -> np.ndarray:
    """Coordinates lambda^s psi; real (non-integer) powers demand nonnegative spectra."""
    lam = dec.eigenvalues
    if float(s) <= 0.0:
        raise InputError(f"diffusion time must be positive, got {s}")
    if float(s).is_integer():
        scale = lam ** int(s)
    else:
        if float(lam.min()) < -NEGATIVE_EIGENVALUE_TOL:
            raise NumericalError(
                f"eigenvalue {lam.min():.3e} is negative beyond roundoff; "
                "cannot apply a real power"
            )
        scale = np.clip(lam, 0.0, None) ** float(s)
    return dec.eigenfunctions * scale[None, :]


def meta_embedding(
    meta: MetaGraph,
    s: float,
    dims: int,
    drop_trivial: bool = False,
) -> np.ndarray:
    """Diffusion coordinates of the graph-of-graphs at meta diffusion time s.

    By default the trivial top eigenpair is kept (its coordinate is nearly
    constant); drop_trivial skips it and uses the next `dims` pairs.
    """
    if not 1 <= dims <= meta.size:
        raise InputError(f"dims must lie in [1, {meta.size}], got {dims}")
    rank = dims + 1 if drop_trivial else dims
    if rank > meta.size:
        raise InputError("dropping the trivial pair needs dims + 1 <= family size")
    dec = meta_decomposition(meta, rank)
    coords = _timescaled_coords(dec, s)
    return coords[:, 1:] if drop_trivial else coords


def meta_decomposition(meta: MetaGraph, rank: int) -> SpectralDecomposition:
    """Spectral decomposition of the meta diffusion matrix."""
    return spectral_decomposition(diffusion_matrix(KernelMatrix(meta.kernel)), rank)


def _pairwise_sq_distance_block(pow_a: np.ndarray, pow_b: np.ndarray, n: int) -> np.ndarray:
    """Squared cross distances between every row of two t-step diffusion matrices."""
    sq_a = np.einsum("ik,ik->i", pow_a, pow_a)
    sq_b = np.einsum("ik,ik->i", pow_b, pow_b)
    cross = pow_a @ pow_b  # symmetric factors, so this is the row inner product
    d2 = n * (sq_a[:, None] + sq_b[None, :] - 2.0 * cross)
    return np.maximum(d2, 0.0)


def historical_kernel(
    family: Sequence[DiffusionMatrix],
    t: int,
    epsilon: float | None = None,
    variant: str = EXPONENTIAL,
) -> HistoricalGraph:
    """Kernel over all (point, parameter) pairs of a family sharing one sample set.

    EXPONENTIAL uses exp(-D / epsilon) with the distance itself (not squared)
    in the exponent; INNER_PRODUCT uses the empirical inner products of the
    t-step diffusion rows, (1/n) sum_u (n A_a^t[x,u]) (n A_b^t[y,u]).
    """
    if not family:
        raise InputError("family must be nonempty")
    n = family[0].n
    if any(mat.n != n for mat in family):
        raise CorrespondenceError("family members must share the sample set")
    if variant not in (EXPONENTIAL, INNER_PRODUCT):
        raise InputError(f"unknown variant {variant!r}")
    if variant == EXPONENTIAL:
        if epsilon is None or not epsilon > 0.0:
            raise InputError("the exponential variant needs a positive epsilon")
    t = int(t)
    if t < 1:
        raise InputError(f"diffusion time must be a positive integer, got {t}")

    powers = [np.linalg.matrix_power(mat.values, t) for mat in family]
    count = len(family)
    big = np.zeros((count * n, count * n))
    for a in range(count):
        for b in range(a, count):
            if variant == INNER_PRODUCT:
                block = n * (powers[a] @ powers[b])
            else:
                d2 = _pairwise_sq_distance_block(powers[a], powers[b], n)
                block = np.exp(-np.sqrt(d2) / epsilon)
            big[a * n : (a + 1) * n, b * n : (b + 1) * n] = block
    if variant == EXPONENTIAL:
        np.fill_diagonal(big, 1.0)
    # mirror the upper triangle so the assembled kernel is symmetric bitwise
    big = np.triu(big)
    big = big + np.triu(big, 1).T
    return HistoricalGraph(
        kernel=big, epsilon=epsilon, t=t, n=n, n_params=count
    )


def historical_embedding(
    hist: HistoricalGraph,
    s: float,
    dims: int,
) -> tuple[np.ndarray, list[Trajectory]]:
    """Diffusion map of the historical graph plus one trajectory per point.

    Trajectory coordinates are ordered by parameter; row alpha of a trajectory
    is the embedded image of the point at the family's alpha-th parameter.
    """
    total = hist.n * hist.n_params
    if not 1 <= dims <= total:
        raise InputError(f"dims must lie in [1, {total}], got {dims}")
    dec = spectral_decomposition(diffusion_matrix(KernelMatrix(hist.kernel)), dims)
    coords = _timescaled_coords(dec, s)
    trajectories = [
        Trajectory(point=x, coords=coords[x :: hist.n, :].copy())
        for x in range(hist.n)
    ]
    return coords, trajectories
