import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynamap import (
    CalibrationError,
    InputError,
    PointCloud,
    calibrate_epsilon,
    diffusion_matrix,
    gaussian_kernel,
    sample_torus,
    spectral_decomposition,
)
from dynamap.datasets import TorusSpec
from dynamap.kernels import KernelMatrix, squared_distances


def test_point_cloud_validation():
    with pytest.raises(InputError):
        PointCloud(np.array([[0.0, 1.0]]))  # single point
    with pytest.raises(InputError):
        PointCloud(np.array([[0.0], [np.inf]]))
    with pytest.raises(InputError):
        PointCloud(np.array([0.0, 1.0]))  # not 2-d
    cloud = PointCloud(np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]))
    assert cloud.n == 3 and cloud.d == 2


def test_kernel_matrix_rejects_bad_input():
    with pytest.raises(InputError):
        KernelMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))  # asymmetric
    with pytest.raises(InputError):
        KernelMatrix(np.array([[1.0, -0.1], [-0.1, 1.0]]))  # negative entry
    with pytest.raises(InputError):
        KernelMatrix(np.array([[0.0, 0.5], [0.5, 1.0]]))  # zero diagonal
    with pytest.raises(InputError):
        KernelMatrix(np.ones((2, 3)))
    # exact zeros off the diagonal are tolerated: they are bandwidth underflow
    KernelMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_gaussian_huge_bandwidth_is_all_ones():
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.normal(size=(7, 3)))
    sq = squared_distances(cloud.points)
    eps = 1e12 * math.sqrt(sq.max())
    kern = gaussian_kernel(cloud, eps)
    assert np.max(np.abs(kern.values - 1.0)) < 1e-9


def test_gaussian_identical_points_exact_one():
    cloud = PointCloud(np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]))
    kern = gaussian_kernel(cloud, 1e-3)
    assert kern.values[0, 1] == 1.0


def test_gaussian_two_points_hand_value():
    cloud = PointCloud(np.array([[0.0], [1.0]]))
    kern = gaussian_kernel(cloud, 1.0)
    assert kern.values[0, 1] == pytest.approx(0.36787944117144233, abs=0)


def test_gaussian_rejects_nonpositive_epsilon():
    cloud = PointCloud(np.array([[0.0], [1.0]]))
    with pytest.raises(InputError):
        gaussian_kernel(cloud, 0.0)


@settings(max_examples=20, deadline=None, derandomize=True)
@given(st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_gaussian_symmetry_and_range(seed, eps):
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.normal(size=(6, 2)))
    kern = gaussian_kernel(cloud, eps)
    assert np.array_equal(kern.values, kern.values.T)
    assert np.all(kern.values > 0.0) and np.all(kern.values <= 1.0)
    assert np.all(np.diag(kern.values) == 1.0)
    # the diagonal is the row maximum
    assert np.all(kern.values.max(axis=1) == 1.0)


def test_gaussian_entries_decrease_with_smaller_epsilon():
    rng = np.random.default_rng(3)
    cloud = PointCloud(rng.normal(size=(5, 3)))
    wide = gaussian_kernel(cloud, 2.0).values
    narrow = gaussian_kernel(cloud, 1.0).values
    off = ~np.eye(5, dtype=bool)
    assert np.all(narrow[off] <= wide[off])


def _lambda2_via_full_path(cloud, eps):
    dec = spectral_decomposition(diffusion_matrix(gaussian_kernel(cloud, eps)), 2)
    return dec.eigenvalues[1]


def test_calibrate_three_point_line():
    cloud = PointCloud(np.array([[0.0], [1.0], [2.0]]))
    eps = calibrate_epsilon(cloud, 0.5, tol=1e-3)
    # independent recheck through the full decomposition path
    assert abs(_lambda2_via_full_path(cloud, eps) - 0.5) <= 1e-3


def test_calibrate_torus_sample():
    cloud = sample_torus(TorusSpec(), 300, seed=4)
    eps = calibrate_epsilon(cloud, 0.5, tol=1e-3)
    assert abs(_lambda2_via_full_path(cloud, eps) - 0.5) <= 1e-3


def test_calibrate_high_target():
    rng = np.random.default_rng(9)
    cloud = PointCloud(rng.uniform(size=(120, 8)))
    eps = calibrate_epsilon(cloud, 0.97, tol=1e-3)
    assert abs(_lambda2_via_full_path(cloud, eps) - 0.97) <= 1e-3


def test_calibrate_rejects_bad_target():
    cloud = PointCloud(np.array([[0.0], [1.0]]))
    with pytest.raises(InputError):
        calibrate_epsilon(cloud, 1.5)
    with pytest.raises(InputError):
        calibrate_epsilon(cloud, 0.5, tol=0.0)


def test_calibrate_coincident_points_fails_with_range():
    cloud = PointCloud(np.zeros((4, 2)))
    with pytest.raises(CalibrationError):
        calibrate_epsilon(cloud, 0.5)


def test_calibrate_grid_scan_fallback(monkeypatch):
    # rig a non-monotone profile: the target is crossed only inside a bump
    # that bracket expansion cannot straddle, forcing the grid scan
    import dynamap.kernels as kernels_mod

    def rigged(values):
        k12 = values[0, 1]
        eps = math.sqrt(-1.0 / math.log(k12)) if 0.0 < k12 < 1.0 else 1e6
        return 0.8 * math.exp(-((math.log(eps)) ** 2))  # peak 0.8 at eps = 1

    monkeypatch.setattr(kernels_mod, "_second_eigenvalue", rigged)
    cloud = PointCloud(np.array([[0.0], [1.0]]))
    eps = calibrate_epsilon(cloud, 0.5, tol=1e-3)
    assert abs(rigged(gaussian_kernel(cloud, eps).values) - 0.5) <= 1e-3

    # a target above the bump's peak is unreachable: error reports the range
    with pytest.raises(CalibrationError) as info:
        calibrate_epsilon(cloud, 0.9, tol=1e-3)
    assert info.value.achieved_range is not None
    assert info.value.achieved_range[1] <= 0.8 + 1e-12


def test_lambda2_trend_in_epsilon():
    # second eigenvalue runs from ~1 (tiny bandwidth) down to ~0 (huge bandwidth)
    rng = np.random.default_rng(11)
    cloud = PointCloud(rng.normal(size=(40, 3)))
    values = [_lambda2_via_full_path(cloud, eps) for eps in (0.05, 0.5, 2.0, 8.0, 50.0)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert values[0] > 0.9 and values[-1] < 0.1
