import numpy as np
import pytest

from dynamap import (
    PointCloud,
    diffusion_matrix,
    gaussian_kernel,
    spectral_decomposition,
)
from dynamap.kernels import KernelMatrix


def random_kernel(n, rng):
    """Random symmetric kernel with entries in (0, 1] and unit diagonal."""
    vals = rng.uniform(0.05, 1.0, (n, n))
    vals = np.triu(vals, 1)
    vals = vals + vals.T
    np.fill_diagonal(vals, 1.0)
    return KernelMatrix(vals)


def random_instance(n, seed, rank=None):
    """(DiffusionMatrix, SpectralDecomposition) from a random kernel."""
    rng = np.random.default_rng(seed)
    mat = diffusion_matrix(random_kernel(n, rng))
    return mat, spectral_decomposition(mat, rank if rank is not None else n)


def gaussian_instance(n, seed, d=3, epsilon=1.5, rank=None):
    """(DiffusionMatrix, SpectralDecomposition) from Gaussian-kernel points."""
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.normal(size=(n, d)))
    mat = diffusion_matrix(gaussian_kernel(cloud, epsilon))
    return mat, spectral_decomposition(mat, rank if rank is not None else n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
