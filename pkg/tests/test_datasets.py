import math

import numpy as np
import pytest

from dynamap import (
    InputError,
    SensorSpec,
    TorusSpec,
    diffusion_matrix,
    gaussian_kernel,
    gram_matrix,
    pinched_torus_family,
    sample_torus,
    spectral_decomposition,
    standard_map_orbits,
    synthetic_cube_family,
)
from dynamap.datasets import PINCH_ANGLES, PINCH_STRENGTHS, lateral_radius
from dynamap.distances import diffusion_distance_map

TWO_PI = 2.0 * math.pi


def test_unpinched_points_satisfy_torus_equation():
    spec = TorusSpec()
    cloud = sample_torus(spec, 500, seed=1)
    x, y, z = cloud.points.T
    lateral_sq = (np.sqrt(x**2 + y**2) - spec.central_radius) ** 2 + z**2
    np.testing.assert_allclose(lateral_sq, spec.lateral_radius**2, atol=1e-12)


def test_degenerate_pinch_is_bitwise_identical():
    plain = sample_torus(TorusSpec(), 200, seed=2)
    degenerate = sample_torus(
        TorusSpec(pinch_angle=math.pi, pinch_radius=2.0), 200, seed=2
    )
    np.testing.assert_array_equal(plain.points, degenerate.points)


def test_pinch_profile_analytic_values():
    spec = TorusSpec(pinch_angle=math.pi, pinch_radius=1.0, pinch_half_width=math.pi / 4)
    assert lateral_radius(spec, np.array([math.pi]))[0] == 1.0
    # window edges recover the full lateral radius; outside stays flat
    for u in (math.pi - math.pi / 4, math.pi + math.pi / 4, 0.0, math.pi / 2):
        assert lateral_radius(spec, np.array([u]))[0] == 2.0
    # dense scan: the minimum over the window is the pinch radius
    grid = np.linspace(0.0, TWO_PI, 20001)
    rho = lateral_radius(spec, grid)
    assert rho.min() == pytest.approx(1.0, abs=1e-3)
    # sampled points near the pinch have small lateral distance
    cloud = sample_torus(spec, 4000, seed=3)
    x, y, z = cloud.points.T
    lateral = np.sqrt((np.sqrt(x**2 + y**2) - spec.central_radius) ** 2 + z**2)
    assert lateral.min() >= 1.0 - 1e-12
    assert lateral.min() == pytest.approx(1.0, abs=0.05)


def test_pinch_wraps_around_zero():
    spec = TorusSpec(pinch_angle=0.1, pinch_radius=1.0, pinch_half_width=math.pi / 4)
    just_below = lateral_radius(spec, np.array([TWO_PI - 0.05]))[0]
    assert just_below < 2.0  # the window straddles the angular origin


def test_family_layout_and_shared_samples():
    clouds, labels = pinched_torus_family(seed=4, n=150)
    assert len(clouds) == 31 and len(labels) == 31
    assert labels[0] is None
    got = {label for label in labels[1:]}
    expected = {(a, r) for a in PINCH_ANGLES for r in PINCH_STRENGTHS}
    assert got == expected
    base = sample_torus(TorusSpec(), 150, seed=4)
    np.testing.assert_array_equal(clouds[0].points, base.points)
    # points outside every pinch window are shared bitwise across the family
    u = np.arctan2(clouds[0].points[:, 1], clouds[0].points[:, 0]) % TWO_PI
    safe = np.ones(150, dtype=bool)
    for angle in PINCH_ANGLES:
        delta = np.mod(u - angle + math.pi, TWO_PI) - math.pi
        safe &= np.abs(delta) >= math.pi / 4
    assert safe.sum() > 0
    for cloud in clouds[1:]:
        np.testing.assert_array_equal(cloud.points[safe], clouds[0].points[safe])


def test_family_determinism():
    first, _ = pinched_torus_family(seed=5, n=60)
    second, _ = pinched_torus_family(seed=5, n=60)
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.points, b.points)


def test_standard_map_zero_alpha_keeps_momentum():
    orbits = standard_map_orbits(0.0, grid=3, steps=20)
    assert len(orbits) == 9
    for orbit in orbits:
        assert orbit.shape == (21, 2)
        assert np.all(orbit[:, 0] == orbit[0, 0])


def test_standard_map_closed_form_orbit():
    orbits = standard_map_orbits(0.0, grid=2, steps=10)
    # grid ticks are {0, pi}: pick the orbit starting at p=pi, theta=0
    target = [o for o in orbits if o[0, 0] == math.pi and o[0, 1] == 0.0]
    assert len(target) == 1
    orbit = target[0]
    for step in range(11):
        assert orbit[step, 1] == pytest.approx((math.pi * step) % TWO_PI, abs=1e-9)


def test_standard_map_range_and_validation():
    orbits = standard_map_orbits(1.7, grid=4, steps=30)
    stacked = np.vstack(orbits)
    assert np.all(stacked >= 0.0) and np.all(stacked < TWO_PI)
    with pytest.raises(InputError):
        standard_map_orbits(-1.0, grid=2, steps=2)
    with pytest.raises(InputError):
        standard_map_orbits(0.5, grid=0, steps=2)


def test_cube_identity_sensors_identical_epochs():
    sensors = [SensorSpec(band_count=16), SensorSpec(band_count=16)]
    family = synthetic_cube_family(
        scene_seed=6, sensors=sensors, plant_change=False, shape=(8, 8), bands=16
    )
    np.testing.assert_array_equal(family.clouds[0].points, family.clouds[1].points)
    assert not family.change_mask.any()
    assert family.change_epoch is None
    assert family.snr_db == [float("inf")] * 2
    # identical epochs embed identically: all cross-epoch distances are zero
    decs = []
    for cloud in family.clouds:
        mat = diffusion_matrix(gaussian_kernel(cloud, 1.0))
        decs.append(spectral_decomposition(mat, 8))
    gram = gram_matrix(decs[0], decs[1])
    np.testing.assert_allclose(
        diffusion_distance_map(decs[0], decs[1], gram, 2), np.zeros(64), atol=1e-12
    )


def test_cube_mixed_band_counts_are_usable():
    sensors = [
        SensorSpec(band_count=c, seed=100 + k, noise_sigma=0.01)
        for k, (c) in enumerate((30, 40, 60, 70, 50))
    ]
    family = synthetic_cube_family(
        scene_seed=7, sensors=sensors, plant_change=True, shape=(8, 8), bands=124
    )
    assert [cloud.d for cloud in family.clouds] == [30, 40, 60, 70, 50]
    assert family.change_epoch == 4


def test_cube_mask_size_and_position():
    sensors = [SensorSpec(band_count=30, seed=1), SensorSpec(band_count=40, seed=2)]
    family = synthetic_cube_family(
        scene_seed=8, sensors=sensors, plant_change=True, shape=(32, 32), block_size=5
    )
    assert family.change_mask.sum() == 25
    grid = family.change_mask.reshape(32, 32)
    rows, cols = np.nonzero(grid)
    assert rows.max() - rows.min() == 4 and cols.max() - cols.min() == 4


def test_cube_snr_matches_independent_recompute():
    sensors = [
        SensorSpec(band_count=20, seed=11, noise_sigma=0.05),
        SensorSpec(band_count=25, seed=12, noise_sigma=0.05),
    ]
    noisy = synthetic_cube_family(
        scene_seed=9, sensors=sensors, plant_change=False, shape=(8, 8), bands=32
    )
    clean_sensors = [
        SensorSpec(band_count=s.band_count, seed=s.seed, noise_sigma=0.0) for s in sensors
    ]
    clean = synthetic_cube_family(
        scene_seed=9, sensors=clean_sensors, plant_change=False, shape=(8, 8), bands=32
    )
    for k in range(2):
        signal = clean.clouds[k].points
        noise = noisy.clouds[k].points - signal
        expected = 10.0 * np.log10(np.mean(signal**2) / np.mean(noise**2))
        assert noisy.snr_db[k] == pytest.approx(expected, abs=1e-9)


def test_cube_determinism_and_validation():
    sensors = [SensorSpec(band_count=10, seed=3), SensorSpec(band_count=12, seed=4)]
    first = synthetic_cube_family(10, sensors, True, shape=(8, 8), bands=16)
    second = synthetic_cube_family(10, sensors, True, shape=(8, 8), bands=16)
    for a, b in zip(first.clouds, second.clouds):
        np.testing.assert_array_equal(a.points, b.points)
    with pytest.raises(InputError):
        synthetic_cube_family(10, [SensorSpec(band_count=10)], True)
    with pytest.raises(InputError):
        synthetic_cube_family(
            10,
            [SensorSpec(band_count=40), SensorSpec(band_count=10)],
            False,
            bands=32,
        )


def test_torus_spec_validation():
    with pytest.raises(InputError):
        TorusSpec(pinch_radius=3.0)  # pinch radius above lateral radius
    with pytest.raises(InputError):
        TorusSpec(central_radius=1.0)  # lateral radius above central radius
    with pytest.raises(InputError):
        TorusSpec(pinch_half_width=4.0)


def test_sensor_spec_validation():
    with pytest.raises(InputError):
        SensorSpec(band_count=0)
    with pytest.raises(InputError):
        SensorSpec(band_count=5, noise_sigma=-0.1)
