"""Diffusion maps, Gram-matrix rotations between embeddings, and common embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distances import diffusion_distance_matrix, gram_matrix
from .exceptions import CorrespondenceError, InputError
from .operators import SpectralDecomposition, apply_sign_convention, truncate

BASIS_ORTHONORMALITY_TOL = 1e-8


@dataclass(frozen=True)
class DiffusionEmbedding:
    """Per-point diffusion coordinates coords[x, i] = lambda_i^t psi_i(x)."""

    coords: np.ndarray
    t: int
    param: int | None = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def rank(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class RotationOperator:
    """Change-of-basis matrix taking a source embedding into a target basis.

    At full rank the operator is an isometry; truncated operators expose the
    defect instead of silently renormalizing.
    """

    values: np.ndarray
    target: int | None = None
    source: int | None = None

    @property
    def isometry_defect(self) -> float:
        k = self.values.shape[1]
        return float(np.max(np.abs(self.values.T @ self.values - np.eye(k))))

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.values @ np.asarray(vector, dtype=float)

    def rotate(self, embedding: DiffusionEmbedding) -> DiffusionEmbedding:
        return DiffusionEmbedding(
            coords=embedding.coords @ self.values.T,
            t=embedding.t,
            param=embedding.param,
        )


def diffusion_map(dec: SpectralDecomposition, t: int, param: int | None = None) -> DiffusionEmbedding:
    """Embed every sample as (lambda_i^t psi_i(x))_i."""
    if not (isinstance(t, (int, np.integer)) and t >= 1):
        raise InputError(f"diffusion time must be a positive integer, got {t}")
    coords = dec.eigenfunctions * dec.eigenvalues[None, :] ** int(t)
    return DiffusionEmbedding(coords=coords, t=int(t), param=param)


def rotation(
    dec_target: SpectralDecomposition,
    dec_source: SpectralDecomposition,
    target: int | None = None,
    source: int | None = None,
) -> RotationOperator:
    """Rotation from the source eigenbasis into the target eigenbasis.

    The matrix is the cross Gram matrix with roles fixed: row i holds the
    inner products of target eigenfunction i against every source
    eigenfunction, so applying it expresses a source-coordinates vector in
    target coordinates.
    """
    if dec_target.n != dec_source.n:
        raise CorrespondenceError(
            f"size mismatch: n={dec_target.n} vs n={dec_source.n}"
        )
    vals = gram_matrix(dec_target, dec_source).values
    return RotationOperator(values=vals, target=target, source=source)


def common_embedding(
    family: Sequence[SpectralDecomposition],
    gamma: int,
    t: int,
) -> list[DiffusionEmbedding]:
    """Rotate every member's diffusion map into the base member's coordinates.

    After rotation, Euclidean distances between any two members' rows realize
    the cross-parameter diffusion distance (exactly at full rank).
    """
    if not 0 <= gamma < len(family):
        raise InputError(f"base index {gamma} out of range for family of {len(family)}")
    base = family[gamma]
    out = []
    for idx, dec in enumerate(family):
        if dec.n != base.n:
            raise CorrespondenceError("family members must share the sample set")
        emb = diffusion_map(dec, t, param=idx)
        out.append(rotation(base, dec, target=gamma, source=idx).rotate(emb))
    return out


def truncation_residuals(
    family: Sequence[SpectralDecomposition],
    gamma: int,
    t: int,
    rank: int,
    probe: int = 16,
    seed: int = 0,
) -> np.ndarray:
    """Per-member residual of a rank-truncated common embedding on a probe set.

    For each member, reports the largest discrepancy between the truncated
    rotated Euclidean distance and the exact full-rank diffusion distance over
    probe point pairs against the base member. A small residual certifies that
    the base parameter retained enough eigenfunctions.
    """
    truncated = [truncate(dec, rank) for dec in family]
    rotated = common_embedding(truncated, gamma, t)
    rng = np.random.default_rng(seed)
    n = family[gamma].n
    take = min(probe, n)
    rows = rng.choice(n, size=take, replace=False)
    cols = rng.choice(n, size=take, replace=False)
    base_rot = rotated[gamma]
    residuals = np.zeros(len(family))
    for idx, dec in enumerate(family):
        exact = diffusion_distance_matrix(
            dec, family[gamma], gram_matrix(dec, family[gamma]), t
        )[np.ix_(rows, cols)]
        diff = rotated[idx].coords[rows, None, :] - base_rot.coords[None, cols, :]
        approx = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        residuals[idx] = float(np.max(np.abs(approx - exact)))
    return residuals


def canonical_subgraph_basis(size: int) -> np.ndarray:
    """Indicator basis scaled by sqrt(size); orthonormal under the 1/size measure."""
    if size < 1:
        raise InputError("basis size must be positive")
    return np.sqrt(size) * np.eye(size)


def reference_subgraph_basis(
    dec_ref: SpectralDecomposition,
    s_indices: Sequence[int],
) -> np.ndarray:
    """Reference eigenfunctions restricted to S and re-orthonormalized.

    Restriction breaks orthonormality, so the columns are re-orthonormalized
    (QR) under the renormalized empirical measure on S and sign-fixed for
    reproducibility.
    """
    idx = np.asarray(s_indices, dtype=int)
    if idx.size == 0:
        raise InputError("common vertex set S must be nonempty")
    if dec_ref.rank < idx.size:
        raise InputError(
            f"reference decomposition must carry at least |S|={idx.size} eigenfunctions"
        )
    restricted = dec_ref.eigenfunctions[idx, : idx.size]
    q, _ = np.linalg.qr(restricted)
    return apply_sign_convention(np.sqrt(idx.size) * q)


def subgraph_rotation(
    dec: SpectralDecomposition,
    s_indices: Sequence[int],
    basis: np.ndarray,
) -> RotationOperator:
    """Rotation of a member's embedding onto an orthonormal basis of the shared set S.

    R[i, j] = (1/|S|) sum_{s in S} e_i(s) psi_j(s), with basis column i holding
    e_i evaluated on S. Rotated embeddings of two graphs then realize the
    subgraph diffusion distance at full available rank.
    """
    idx = np.asarray(s_indices, dtype=int)
    if idx.size == 0:
        raise InputError("common vertex set S must be nonempty")
    basis = np.asarray(basis, dtype=float)
    if basis.shape != (idx.size, idx.size):
        raise InputError(f"basis must be {idx.size} x {idx.size}, got {basis.shape}")
    defect = np.max(np.abs(basis.T @ basis / idx.size - np.eye(idx.size)))
    if defect > BASIS_ORTHONORMALITY_TOL:
        raise InputError(
            f"basis not orthonormal under the empirical measure on S (defect {defect:.3e})"
        )
    vals = basis.T @ dec.eigenfunctions[idx, :] / idx.size
    return RotationOperator(values=vals)
