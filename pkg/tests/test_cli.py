import numpy as np
import pytest

from dynamap.cli import main
from dynamap.matio import (
    read_matrix,
    read_matrix_bin,
    read_matrix_csv,
    write_matrix_bin,
    write_matrix_csv,
)

from conftest import random_kernel


def _write_kernels(tmp_path, n, seeds, fmt="csv"):
    paths = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        path = tmp_path / f"kern_{seed}.{fmt}"
        values = random_kernel(n, rng).values
        if fmt == "csv":
            write_matrix_csv(path, values)
        else:
            write_matrix_bin(path, values)
        paths.append(path)
    return paths


def test_matrix_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.normal(size=(4, 7))
    csv_path = tmp_path / "m.csv"
    bin_path = tmp_path / "m.bin"
    write_matrix_csv(csv_path, values)
    write_matrix_bin(bin_path, values)
    np.testing.assert_array_equal(read_matrix_csv(csv_path), values)
    np.testing.assert_array_equal(read_matrix_bin(bin_path), values)
    # format sniffing
    np.testing.assert_array_equal(read_matrix(csv_path), values)
    np.testing.assert_array_equal(read_matrix(bin_path), values)


def test_embed_single_input(tmp_path):
    (kern,) = _write_kernels(tmp_path, 5, [1])
    out = tmp_path / "out"
    code = main(["embed", "--input", str(kern), "--output-dir", str(out),
                 "--rank", "2", "--t", "1"])
    assert code == 0
    coords = read_matrix(out / "embedding_0.csv")
    assert coords.shape == (5, 2)


def test_embed_identical_inputs_common_base(tmp_path):
    paths = _write_kernels(tmp_path, 5, [2, 2])
    out = tmp_path / "out"
    code = main([
        "embed", "--input", str(paths[0]), "--input", str(paths[1]),
        "--output-dir", str(out), "--t", "1", "--common-base", "0",
    ])
    assert code == 0
    first = read_matrix(out / "common_0.csv")
    second = read_matrix(out / "common_1.csv")
    np.testing.assert_allclose(first, second, atol=1e-12)


def test_embed_matches_distance_command(tmp_path):
    paths = _write_kernels(tmp_path, 6, [3, 4, 5])
    out_embed = tmp_path / "embed"
    out_dist = tmp_path / "dist"
    assert main([
        "embed", *sum((["--input", str(p)] for p in paths), []),
        "--output-dir", str(out_embed), "--t", "2", "--common-base", "0",
    ]) == 0
    assert main([
        "distance", "--input", str(paths[1]), "--input", str(paths[2]),
        "--output-dir", str(out_dist), "--t", "2", "--full-matrix",
    ]) == 0
    rot_b = read_matrix(out_embed / "common_1.csv")
    rot_c = read_matrix(out_embed / "common_2.csv")
    dists = read_matrix(out_dist / "distance_matrix.csv")
    for i in range(6):
        for j in range(6):
            norm = np.linalg.norm(rot_b[i] - rot_c[j])
            assert norm == pytest.approx(dists[i, j], abs=1e-8)


def test_distance_identical_inputs_zero_map(tmp_path):
    paths = _write_kernels(tmp_path, 5, [6, 6])
    out = tmp_path / "out"
    assert main([
        "distance", "--input", str(paths[0]), "--input", str(paths[1]),
        "--output-dir", str(out), "--t", "3",
    ]) == 0
    np.testing.assert_array_equal(read_matrix(out / "distance_map.csv"), np.zeros((5, 1)))


def test_distance_asymptotic_matches_large_t(tmp_path):
    paths = _write_kernels(tmp_path, 6, [7, 8])
    out_inf = tmp_path / "inf"
    out_400 = tmp_path / "t400"
    common = ["--input", str(paths[0]), "--input", str(paths[1])]
    assert main(["distance", *common, "--output-dir", str(out_inf), "--t", "inf"]) == 0
    assert main(["distance", *common, "--output-dir", str(out_400), "--t", "400"]) == 0
    inf_map = read_matrix(out_inf / "distance_map.csv")
    t400_map = read_matrix(out_400 / "distance_map.csv")
    assert np.max(np.abs(inf_map - t400_map)) <= 1e-4


def test_global_identical_inputs(tmp_path):
    paths = _write_kernels(tmp_path, 5, [9, 9])
    out = tmp_path / "out"
    assert main([
        "global", "--input", str(paths[0]), "--input", str(paths[1]),
        "--output-dir", str(out), "--t", "2",
    ]) == 0
    np.testing.assert_allclose(read_matrix(out / "global_distances.csv"),
                               np.zeros((2, 2)), atol=1e-12)


def test_metagraph_outputs(tmp_path):
    paths = _write_kernels(tmp_path, 6, [10, 11, 12])
    out = tmp_path / "out"
    assert main([
        "metagraph", *sum((["--input", str(p)] for p in paths), []),
        "--output-dir", str(out), "--t", "2", "--epsilon-median", "--dims", "2",
    ]) == 0
    kernel = read_matrix(out / "meta_kernel.csv")
    np.testing.assert_array_equal(np.diag(kernel), np.ones(3))
    coords = read_matrix(out / "meta_coords.csv")
    assert coords.shape == (3, 2)


def test_failed_command_removes_partial_outputs(tmp_path):
    # the out-of-range base is rejected only after the per-parameter
    # embeddings were already written; failure must remove them
    paths = _write_kernels(tmp_path, 5, [13, 13])
    out = tmp_path / "out"
    code = main([
        "embed", "--input", str(paths[0]), "--input", str(paths[1]),
        "--output-dir", str(out), "--t", "1", "--common-base", "7",
    ])
    assert code == 1
    assert list(out.iterdir()) == []


def test_distance_usage_errors(tmp_path):
    paths = _write_kernels(tmp_path, 5, [14])
    out = tmp_path / "out"
    assert main([
        "distance", "--input", str(paths[0]), "--output-dir", str(out), "--t", "2",
    ]) == 1
    mixed = _write_kernels(tmp_path, 6, [15])
    assert main([
        "distance", "--input", str(paths[0]), "--input", str(mixed[0]),
        "--output-dir", str(out), "--t", "2",
    ]) == 1
    assert not out.exists() or list(out.iterdir()) == []


def test_binary_format_pipeline(tmp_path):
    paths = _write_kernels(tmp_path, 5, [16], fmt="bin")
    out = tmp_path / "out"
    assert main([
        "embed", "--input", str(paths[0]), "--output-dir", str(out),
        "--rank", "3", "--t", "1", "--format", "bin",
    ]) == 0
    coords = read_matrix(out / "embedding_0.bin")
    assert coords.shape == (5, 3)


def test_config_file_precedence(tmp_path):
    (kern,) = _write_kernels(tmp_path, 6, [17])
    config = tmp_path / "run.cfg"
    config.write_text("rank = 2\nt = 1\n# comment line\n", encoding="utf-8")
    out_cfg = tmp_path / "cfg"
    assert main([
        "embed", "--input", str(kern), "--output-dir", str(out_cfg),
        "--config", str(config),
    ]) == 0
    assert read_matrix(out_cfg / "embedding_0.csv").shape == (6, 2)
    # a flag beats the config file
    out_flag = tmp_path / "flag"
    assert main([
        "embed", "--input", str(kern), "--output-dir", str(out_flag),
        "--config", str(config), "--rank", "4",
    ]) == 0
    assert read_matrix(out_flag / "embedding_0.csv").shape == (6, 4)


def test_gen_data_torus_and_determinism(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert main([
            "gen-data", "--dataset", "torus", "--n", "40", "--seed", "5",
            "--output-dir", str(out),
        ]) == 0
    first = (out_a / "torus.csv").read_bytes()
    second = (out_b / "torus.csv").read_bytes()
    assert first == second
    assert read_matrix(out_a / "torus.csv").shape == (40, 3)


def test_gen_data_standard_map(tmp_path):
    out = tmp_path / "out"
    assert main([
        "gen-data", "--dataset", "standard-map", "--grid", "3", "--steps", "5",
        "--alpha", "0.0", "--output-dir", str(out),
    ]) == 0
    table = read_matrix(out / "standard_map.csv")
    assert table.shape == (9 * 6, 4)
    # alpha=0 conserves momentum within every orbit
    for orbit_id in range(9):
        rows = table[table[:, 0] == orbit_id]
        assert np.all(rows[:, 2] == rows[0, 2])


def test_gen_data_cube(tmp_path):
    out = tmp_path / "out"
    assert main([
        "gen-data", "--dataset", "cube", "--side", "8", "--block-size", "3",
        "--band-counts", "10,12", "--seed", "2", "--output-dir", str(out),
    ]) == 0
    mask = read_matrix(out / "cube_mask.csv")
    assert mask.sum() == 9
    assert read_matrix(out / "cube_epoch_0.csv").shape == (64, 10)
    assert read_matrix(out / "cube_epoch_1.csv").shape == (64, 12)


def test_torus_experiment_command(tmp_path):
    out = tmp_path / "out"
    assert main([
        "torus-experiment", "--n", "120", "--seed", "3", "--output-dir", str(out),
    ]) == 0
    coords = read_matrix(out / "torus_meta_coords.csv")
    labels = read_matrix(out / "torus_labels.csv")
    dists = read_matrix(out / "torus_global_distances.csv")
    assert coords.shape == (31, 3) and labels.shape == (31, 2)
    assert dists.shape == (31, 31)
    assert np.isnan(labels[0]).all() and not np.isnan(labels[1:]).any()
    svg = (out / "torus_meta.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 31
    summary = (out / "torus_summary.txt").read_text()
    assert "meta_lambda2" in summary and "angle_accuracy" in summary


def test_convergence_command(tmp_path):
    out = tmp_path / "out"
    assert main([
        "convergence", "--n-grid", "30,60", "--trials", "10", "--reference-n", "240",
        "--t", "1", "--seed", "5", "--output-dir", str(out),
    ]) == 0
    rows = read_matrix(out / "convergence_report.csv")
    assert rows.shape == (2, 5)
    assert "pointwise slope" in (out / "convergence_summary.txt").read_text()


def test_change_detect_command(tmp_path):
    out = tmp_path / "out"
    assert main([
        "change-detect", "--side", "8", "--band-counts", "8,10", "--block-size", "3",
        "--noise-sigma", "0.0", "--target-lambda2", "0.9", "--seed", "4",
        "--output-dir", str(out),
    ]) == 0
    scores = read_matrix(out / "change_scores.csv")
    mask = read_matrix(out / "change_mask.csv")
    assert scores.shape == (64, 1) and mask.sum() == 9
    assert "hits_in_top_50" in (out / "change_summary.txt").read_text()


def test_points_input_kind(tmp_path):
    rng = np.random.default_rng(20)
    pts = tmp_path / "points.csv"
    write_matrix_csv(pts, rng.normal(size=(30, 3)))
    out = tmp_path / "out"
    assert main([
        "embed", "--input", str(pts), "--input-kind", "points",
        "--epsilon", "1.5", "--rank", "3", "--t", "1", "--output-dir", str(out),
    ]) == 0
    assert read_matrix(out / "embedding_0.csv").shape == (30, 3)
