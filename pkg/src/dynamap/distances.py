"""Cross-parameter diffusion distances: pointwise, asymptotic, global, and subgraph.

Spectral routes work on :class:`~dynamap.operators.SpectralDecomposition` pairs
plus their Gram matrix; direct routes work on matrix powers alone and serve as
independent oracles for the spectral formulas.

Empirical scaling: with the empirical measure (weight 1/n per sample) the
t-step kernel evaluated at sample points equals n * A^t, so the quadrature of
the squared row difference carries a single factor n; this is the scaling
under which the sampled distance converges to its population value. Sampled
global distances need no scaling at all: the 1/n^2 quadrature of the double
integral cancels the n^2 from the kernel evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    ConnectivityError,
    CorrespondenceError,
    InputError,
    NumericalError,
)
from .operators import DiffusionMatrix, SpectralDecomposition, kernel_power_row

GRAM_ENTRY_SLACK = 1e-8
NEGATIVE_SQ_TOL = 1e-12
CONNECTIVITY_GAP = 1e-9
# three-term squared distances below this fraction of their scale are
# recomputed difference-first, where cancellation cannot occur
STABLE_REL = 1e-9


@dataclass(frozen=True)
class GramMatrix:
    """Empirical inner products G[i,j] = (1/n) sum_x psi_a^(i)(x) psi_b^(j)(x).

    Entries lie in [-1, 1] up to roundoff; at full rank G is orthogonal.
    """

    values: np.ndarray
    n: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise InputError("gram matrix must be 2-d")
        if np.max(np.abs(vals)) > 1.0 + GRAM_ENTRY_SLACK:
            raise NumericalError("gram entries exceed [-1, 1] beyond roundoff")
        object.__setattr__(self, "values", vals)


def gram_matrix(dec_a: SpectralDecomposition, dec_b: SpectralDecomposition) -> GramMatrix:
    """Cross-parameter Gram matrix of two decompositions over the same sample set."""
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(
            f"decompositions must share the sample set: n={dec_a.n} vs n={dec_b.n}"
        )
    vals = dec_a.eigenfunctions.T @ dec_b.eigenfunctions / dec_a.n
    return GramMatrix(values=vals, n=dec_a.n)


def _clamp_sq(d2: float) -> float:
    # squared distances are nonnegative in exact arithmetic; only roundoff
    # negatives within NEGATIVE_SQ_TOL are forgiven
    if d2 < 0.0:
        if d2 < -NEGATIVE_SQ_TOL:
            raise NumericalError(f"squared distance {d2:.3e} below roundoff tolerance")
        return 0.0
    return d2


def _clamp_sq_array(d2: np.ndarray) -> np.ndarray:
    low = float(d2.min()) if d2.size else 0.0
    if low < -NEGATIVE_SQ_TOL:
        raise NumericalError(f"squared distance {low:.3e} below roundoff tolerance")
    return np.maximum(d2, 0.0)


def _check_t(t) -> int:
    if not (isinstance(t, (int, np.integer)) and t >= 1):
        raise InputError(f"diffusion time must be a positive integer, got {t}")
    return int(t)


def _check_connected(dec: SpectralDecomposition) -> None:
    if dec.rank < 2:
        raise InputError("connectivity check needs at least two eigenpairs")
    if dec.eigenvalues[1] > 1.0 - CONNECTIVITY_GAP:
        raise ConnectivityError(
            f"second eigenvalue {dec.eigenvalues[1]:.12g} too close to 1; "
            "graph is disconnected or nearly so"
        )


def _refined_sq(dec_a, dec_b, wa: np.ndarray, wb: np.ndarray) -> float:
    """Cancellation-free squared distance: evaluate the two expanded diffusion
    rows at the samples, subtract first, then take the empirical norm."""
    diff = dec_a.eigenfunctions @ wa - dec_b.eigenfunctions @ wb
    return float(diff @ diff) / dec_a.n


def diffusion_distance(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
    gram: GramMatrix,
    i: int,
    j: int,
    t: int,
) -> float:
    """Diffusion distance at time t between point i under kernel a and point j under kernel b.

    Three-term spectral form of the squared distance:
    sum_k la_k^2t pa_k(i)^2 + sum_l lb_l^2t pb_l(j)^2
    - 2 sum_{k,l} la_k^t lb_l^t pa_k(i) pb_l(j) G[k,l].
    Near-zero values, where the three terms cancel, are recomputed
    difference-first so the result is accurate in absolute terms.
    """
    t = _check_t(t)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    wa = dec_a.eigenvalues**t * dec_a.eigenfunctions[i]
    wb = dec_b.eigenvalues**t * dec_b.eigenfunctions[j]
    scale = float(wa @ wa + wb @ wb)
    d2 = float(scale - 2.0 * wa @ gram.values @ wb)
    if d2 < STABLE_REL * scale:
        d2 = _refined_sq(dec_a, dec_b, wa, wb)
    return float(np.sqrt(_clamp_sq(d2)))


def diffusion_distance_map(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
    gram: GramMatrix,
    t: int,
) -> np.ndarray:
    """Corresponding-point distances D(x_i under a, x_i under b) for every sample i."""
    t = _check_t(t)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    wa = dec_a.eigenfunctions * dec_a.eigenvalues[None, :] ** t
    wb = dec_b.eigenfunctions * dec_b.eigenvalues[None, :] ** t
    scale = np.einsum("ik,ik->i", wa, wa) + np.einsum("ik,ik->i", wb, wb)
    d2 = scale - 2.0 * np.einsum("ik,ik->i", wa @ gram.values, wb)
    flagged = np.nonzero(d2 < STABLE_REL * scale)[0]
    for i in flagged:
        d2[i] = _refined_sq(dec_a, dec_b, wa[i], wb[i])
    return np.sqrt(_clamp_sq_array(d2))


def diffusion_distance_matrix(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
    gram: GramMatrix,
    t: int,
) -> np.ndarray:
    """All-pairs distances D(x_i under a, y_j under b) as an n x n array."""
    t = _check_t(t)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    wa = dec_a.eigenfunctions * dec_a.eigenvalues[None, :] ** t
    wb = dec_b.eigenfunctions * dec_b.eigenvalues[None, :] ** t
    sq_a = np.einsum("ik,ik->i", wa, wa)
    sq_b = np.einsum("ik,ik->i", wb, wb)
    scale = sq_a[:, None] + sq_b[None, :]
    d2 = scale - 2.0 * (wa @ gram.values) @ wb.T
    for i, j in zip(*np.nonzero(d2 < STABLE_REL * scale)):
        d2[i, j] = _refined_sq(dec_a, dec_b, wa[i], wb[j])
    return np.sqrt(_clamp_sq_array(d2))


def direct_diffusion_distance(
    mat_a: DiffusionMatrix,
    mat_b: DiffusionMatrix,
    i: int,
    j: int,
    t: int,
) -> float:
    """Oracle route: D^2 = n * sum_k (A_a^t[i,k] - A_b^t[j,k])^2 via matrix powers only."""
    t = _check_t(t)
    if mat_a.n != mat_b.n:
        raise CorrespondenceError(f"size mismatch: n={mat_a.n} vs n={mat_b.n}")
    row_a = kernel_power_row(mat_a, t, i)
    row_b = kernel_power_row(mat_b, t, j)
    diff = row_a - row_b
    return float(np.sqrt(_clamp_sq(mat_a.n * float(diff @ diff))))


def asymptotic_diffusion_distance(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
    i: int,
    j: int,
) -> float:
    """Large-t limit of the diffusion distance for connected graphs.

    Only the top eigenfunctions (normalized square roots of the densities)
    enter, so the limit needs no further diagonalization:
    D^2 = (pa(i) - pb(j))^2 + pa(i) pb(j) * mean_x (pa(x) - pb(x))^2,
    the pointwise density gap plus a term carrying the global density change.
    """
    _check_connected(dec_a)
    _check_connected(dec_b)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    top_a = dec_a.eigenfunctions[:, 0]
    top_b = dec_b.eigenfunctions[:, 0]
    spread = float(np.mean((top_a - top_b) ** 2))
    pa = float(top_a[i])
    pb = float(top_b[j])
    d2 = (pa - pb) ** 2 + pa * pb * spread
    return float(np.sqrt(_clamp_sq(d2)))


def asymptotic_distance_map(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
) -> np.ndarray:
    """Corresponding-point large-t distances for every sample."""
    _check_connected(dec_a)
    _check_connected(dec_b)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    top_a = dec_a.eigenfunctions[:, 0]
    top_b = dec_b.eigenfunctions[:, 0]
    spread = float(np.mean((top_a - top_b) ** 2))
    d2 = (top_a - top_b) ** 2 + top_a * top_b * spread
    return np.sqrt(_clamp_sq_array(d2))


def global_diffusion_distance(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
    gram: GramMatrix,
    t: int,
) -> float:
    """Whole-graph distance from the spectra and the cross Gram matrix.

    At full rank the paired form sum_{i,j} (la_i^t - lb_j^t)^2 G[i,j]^2 is
    exact. Truncated decompositions add the Bessel defects of the Gram rows
    and columns, which reproduces the equivalent three-term form
    sum la^2t + sum lb^2t - 2 sum la^t lb^t G^2 without cancellation; the
    value degrades gracefully as the discarded tail only shrinks the sums.
    """
    t = _check_t(t)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    la = dec_a.eigenvalues**t
    lb = dec_b.eigenvalues**t
    gsq = gram.values**2
    d2 = float(((la[:, None] - lb[None, :]) ** 2 * gsq).sum())
    # Bessel defects below roundoff are complete rows, not truncation
    row_defect = 1.0 - gsq.sum(axis=1)
    col_defect = 1.0 - gsq.sum(axis=0)
    row_defect[row_defect < 1e-12] = 0.0
    col_defect[col_defect < 1e-12] = 0.0
    d2 += float(la**2 @ row_defect + lb**2 @ col_defect)
    return float(np.sqrt(_clamp_sq(d2)))


def direct_global_distance(mat_a: DiffusionMatrix, mat_b: DiffusionMatrix, t: int) -> float:
    """Oracle route: Frobenius norm of A_a^t - A_b^t by direct matrix powers.

    The 1/n^2 empirical quadrature of the double integral cancels the n^2 from
    evaluating the t-step kernels at sample points, so no scaling is needed.
    """
    t = _check_t(t)
    if mat_a.n != mat_b.n:
        raise CorrespondenceError(f"size mismatch: n={mat_a.n} vs n={mat_b.n}")
    pow_a = np.linalg.matrix_power(mat_a.values, t)
    pow_b = np.linalg.matrix_power(mat_b.values, t)
    return float(np.linalg.norm(pow_a - pow_b, ord="fro"))


def asymptotic_global_distance(
    dec_a: SpectralDecomposition,
    dec_b: SpectralDecomposition,
) -> float:
    """Large-t limit sqrt(2 (1 - g^2)) with g the inner product of the top eigenfunctions."""
    _check_connected(dec_a)
    _check_connected(dec_b)
    if dec_a.n != dec_b.n:
        raise CorrespondenceError(f"size mismatch: n={dec_a.n} vs n={dec_b.n}")
    g = float(dec_a.eigenfunctions[:, 0] @ dec_b.eigenfunctions[:, 0]) / dec_a.n
    return float(np.sqrt(_clamp_sq(2.0 * (1.0 - g * g))))


def global_distance_matrix(decs: Sequence[SpectralDecomposition], t: int) -> np.ndarray:
    """Pairwise global distances for a family, symmetric with an exactly zero diagonal."""
    t = _check_t(t)
    count = len(decs)
    out = np.zeros((count, count))
    for a in range(count):
        for b in range(a + 1, count):
            dist = global_diffusion_distance(decs[a], decs[b], gram_matrix(decs[a], decs[b]), t)
            out[a, b] = dist
            out[b, a] = dist
    return out


def subgraph_diffusion_distance(
    mat_a: DiffusionMatrix,
    mat_b: DiffusionMatrix,
    common_indices_a: Sequence[int],
    common_indices_b: Sequence[int],
    i: int,
    j: int,
    t: int,
) -> float:
    """Diffusion distance restricted to a shared vertex set S of two graphs.

    The two index lists identify the same points S in each graph's ordering;
    the graphs may have different sizes. Quadrature uses the renormalized
    empirical measure on S (weight 1/|S| per point), so S = X with equal sizes
    recovers the standard distance.
    """
    t = _check_t(t)
    idx_a = np.asarray(common_indices_a, dtype=int)
    idx_b = np.asarray(common_indices_b, dtype=int)
    if idx_a.size == 0:
        raise InputError("common vertex set S must be nonempty")
    if idx_a.shape != idx_b.shape or idx_a.ndim != 1:
        raise InputError("the two index lists must be 1-d and of equal length")
    row_a = mat_a.n * kernel_power_row(mat_a, t, i)
    row_b = mat_b.n * kernel_power_row(mat_b, t, j)
    diff = row_a[idx_a] - row_b[idx_b]
    return float(np.sqrt(_clamp_sq(float(diff @ diff) / idx_a.size)))
