"""Symmetric diffusion matrices, graph Laplacians, and truncated spectral decompositions.

Eigenfunctions are normalized against the empirical measure (1/n per sample):
(1/n) * psi.T @ psi = I. With this scaling the spectral distance formulas in
:mod:`dynamap.distances` apply verbatim to sampled data.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DegeneracyError, InputError, NumericalError
from .kernels import KernelMatrix

EIGENVALUE_SLACK = 1e-10
ORTHONORMALITY_TOL = 1e-8
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class DiffusionMatrix:
    """Degree-symmetrized kernel K[i,j] / sqrt(d_i d_j) plus the sampled density d/n."""

    values: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise InputError("diffusion matrix must be square")
        if not np.array_equal(vals, vals.T):
            raise InputError("diffusion matrix must be exactly symmetric")
        if dens.shape != (vals.shape[0],):
            raise InputError("density must be an n-vector")
        if not np.all(dens > 0.0):
            raise DegeneracyError("density must be strictly positive")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "density", dens)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Top eigenpairs of a diffusion matrix, eigenfunctions empirically orthonormal.

    eigenvalues are descending in (-1, 1]; eigenfunctions hold psi^(i) as
    column i, scaled by sqrt(n) relative to unit-Euclidean-norm eigenvectors so
    that (1/n) sum_x psi^(i)(x) psi^(j)(x) = delta_ij.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        psi = np.asarray(self.eigenfunctions, dtype=float)
        if lam.ndim != 1 or psi.ndim != 2 or psi.shape[1] != lam.shape[0]:
            raise InputError("need k eigenvalues and an n x k eigenfunction matrix")
        if np.any(np.diff(lam) > 0.0):
            raise InputError("eigenvalues must be in descending order")
        if lam[0] > 1.0 + EIGENVALUE_SLACK or lam[-1] <= -1.0 - EIGENVALUE_SLACK:
            raise InputError("eigenvalues must lie in (-1, 1]")
        n = psi.shape[0]
        gram = psi.T @ psi / n
        if np.max(np.abs(gram - np.eye(lam.shape[0]))) > ORTHONORMALITY_TOL:
            raise InputError("eigenfunctions must be empirically orthonormal")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenfunctions", psi)

    @property
    def n(self) -> int:
        return self.eigenfunctions.shape[0]

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]


def diffusion_matrix(kernel: KernelMatrix) -> DiffusionMatrix:
    """Build A[i,j] = k[i,j] / sqrt(d_i d_j) with d_i the row sums of the kernel.

    The per-sample 1/n factors of the empirical kernel and degree matrices
    cancel, so A is scale-free in n; its spectral radius is 1.
    """
    deg = kernel.values.sum(axis=1)
    if not np.all(deg > 0.0):
        raise DegeneracyError("kernel has a zero row degree; input is corrupt")
    inv_sqrt = 1.0 / np.sqrt(deg)
    vals = kernel.values * np.outer(inv_sqrt, inv_sqrt)
    return DiffusionMatrix(values=vals, density=deg / kernel.n)


def transition_matrix(kernel: KernelMatrix) -> np.ndarray:
    """Row-stochastic transition matrix D^{-1} K; shares eigenvalues with the
    symmetric diffusion matrix (reference surface only, no map path)."""
    deg = kernel.values.sum(axis=1)
    if not np.all(deg > 0.0):
        raise DegeneracyError("kernel has a zero row degree; input is corrupt")
    return kernel.values / deg[:, None]


def graph_laplacian(matrix: DiffusionMatrix) -> np.ndarray:
    """Graph Laplacian (I - A) / 2; eigenvalues (1 - eig(A)) / 2 lie in [0, 1]."""
    n = matrix.n
    return 0.5 * (np.eye(n) - matrix.values)


def apply_sign_convention(psi: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive.

    Ties resolve to the lowest index, making decompositions reproducible.
    """
    out = psi.copy()
    for col in range(out.shape[1]):
        pivot = int(np.argmax(np.abs(out[:, col])))
        if out[pivot, col] < 0.0:
            out[:, col] = -out[:, col]
    return out


def spectral_decomposition(matrix: DiffusionMatrix, rank: int) -> SpectralDecomposition:
    """Top-`rank` eigenpairs of a diffusion matrix under empirical normalization.

    Dense symmetric solve of the full spectrum, then truncation; eigenvalues
    are verified to lie within roundoff of (-1, 1] and clipped to [-1, 1].
    """
    n = matrix.n
    if not 1 <= rank <= n:
        raise InputError(f"rank must lie in [1, {n}], got {rank}")
    try:
        lam, vec = np.linalg.eigh(matrix.values)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc
    lam = lam[::-1]
    vec = vec[:, ::-1]
    if lam[0] > 1.0 + EIGENVALUE_SLACK or lam[-1] <= -1.0 - EIGENVALUE_SLACK:
        raise NumericalError(
            f"eigenvalues outside (-1, 1]: range [{lam[-1]:.17g}, {lam[0]:.17g}]"
        )
    lam = np.clip(lam[:rank], -1.0, 1.0)
    vec = vec[:, :rank]
    residual = np.max(np.abs(matrix.values @ vec - vec * lam[None, :]))
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    psi = apply_sign_convention(np.sqrt(n) * vec)
    return SpectralDecomposition(eigenvalues=lam, eigenfunctions=psi)


def truncate(dec: SpectralDecomposition, rank: int) -> SpectralDecomposition:
    """Keep the top `rank` eigenpairs of an existing decomposition."""
    if not 1 <= rank <= dec.rank:
        raise InputError(f"rank must lie in [1, {dec.rank}], got {rank}")
    return replace(
        dec,
        eigenvalues=dec.eigenvalues[:rank],
        eigenfunctions=dec.eigenfunctions[:, :rank],
    )


def kernel_power_row(matrix: DiffusionMatrix, t: int, i: int) -> np.ndarray:
    """Row i of A^t by repeated multiplication; the oracle path, no eigensolve."""
    if not (isinstance(t, (int, np.integer)) and t >= 1):
        raise InputError(f"t must be a positive integer, got {t}")
    if not 0 <= i < matrix.n:
        raise InputError(f"row index {i} out of range for n={matrix.n}")
    row = matrix.values[i].copy()
    for _ in range(t - 1):
        row = row @ matrix.values
    return row
