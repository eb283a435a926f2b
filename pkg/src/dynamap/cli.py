"""Command-line front end: dataset generation, embeddings, distances, experiments.

Commands: embed, distance, global, metagraph, torus-experiment, convergence,
change-detect, gen-data. Option precedence is flags > config file (key=value
lines) > built-in defaults. Every command is deterministic given --seed, exits
zero only when all outputs were written and verified, and removes partial
outputs on failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments
from .datasets import (
    SensorSpec,
    TorusSpec,
    pinched_torus_family,
    sample_torus,
    standard_map_orbits,
    synthetic_cube_family,
)
from .distances import (
    asymptotic_distance_map,
    asymptotic_global_distance,
    diffusion_distance_map,
    diffusion_distance_matrix,
    global_distance_matrix,
    gram_matrix,
)
from .embeddings import common_embedding, diffusion_map
from .exceptions import DynamapError, InputError
from .kernels import KernelMatrix, PointCloud, calibrate_epsilon, gaussian_kernel
from .matio import FORMATS, read_matrix, write_matrix
from .metagraph import MEDIAN, meta_embedding, meta_kernel
from .operators import diffusion_matrix, spectral_decomposition
from .sampling import report_rows, report_summary
from .svgplot import write_scatter_svg

DEFAULTS = {
    "t": 1,
    "s": 1.92,
    "dims": 3,
    "target_lambda2": 0.5,
    "tol": 1e-3,
    "seed": 0,
    "format": "csv",
    "input_kind": "kernel",
    "n": 1000,
    "trials": 20,
    "reference_n": 4000,
    "n_grid": "100,200,400,800",
    "band_counts": "30,50,70",
    "noise_sigma": 0.01,
    "block_size": 5,
    "side": 32,
    "grid": 12,
    "steps": 100,
    "alpha": 0.4,
    "dataset": "torus",
}


@dataclass
class RunConfig:
    """Resolved options for one command invocation."""

    command: str
    inputs: list[Path]
    output_dir: Path
    fmt: str
    seed: int
    t: int | float
    s: float
    rank: int | None
    dims: int
    target_lambda2: float
    tol: float
    epsilon: float | str | None
    common_base: int | None
    input_kind: str
    full_matrix: bool
    extras: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.fmt not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}")
        if self.t != math.inf and (not float(self.t).is_integer() or self.t < 1):
            raise InputError(f"t must be a positive integer or 'inf', got {self.t}")
        if not self.s > 0.0:
            raise InputError(f"s must be positive, got {self.s}")
        if self.rank is not None and self.rank < 1:
            raise InputError(f"rank must be positive, got {self.rank}")
        if self.dims < 1:
            raise InputError(f"dims must be positive, got {self.dims}")
        if not 0.0 < self.target_lambda2 < 1.0:
            raise InputError("target second eigenvalue must lie in (0, 1)")
        if not self.tol > 0.0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if isinstance(self.epsilon, float) and not self.epsilon > 0.0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.input_kind not in ("kernel", "points"):
            raise InputError("input kind must be 'kernel' or 'points'")


class OutputTracker:
    """Records written files so a failed command can remove partial outputs."""

    def __init__(self, output_dir: Path, fmt: str):
        self.output_dir = output_dir
        self.fmt = fmt
        self.written: list[Path] = []

    def path(self, stem: str, suffix: str | None = None) -> Path:
        suffix = suffix if suffix is not None else f".{self.fmt}"
        return self.output_dir / f"{stem}{suffix}"

    def matrix(self, stem: str, values: np.ndarray) -> Path:
        target = self.path(stem)
        write_matrix(target, values, self.fmt)
        self.written.append(target)
        return target

    def text(self, stem: str, content: str, suffix: str = ".txt") -> Path:
        target = self.path(stem, suffix)
        target.write_text(content, encoding="utf-8")
        self.written.append(target)
        return target

    def verify(self) -> None:
        for target in self.written:
            if not target.is_file() or target.stat().st_size == 0:
                raise DynamapError(f"output {target} missing or empty")
            if target.suffix in (".csv", ".bin"):
                read_matrix(target)  # round-trip check

    def cleanup(self) -> None:
        for target in self.written:
            target.unlink(missing_ok=True)


def _load_config_file(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"config line without '=': {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args, config: dict[str, str], name: str, cast, fallback):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        try:
            return cast(config[name])
        except ValueError as exc:
            raise InputError(f"bad config value for {name}: {config[name]!r}") from exc
    return fallback


def _parse_t(raw) -> int | float:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("inf", "infinity", "asymptotic"):
        return math.inf
    try:
        return int(text)
    except ValueError as exc:
        raise InputError(f"t must be a positive integer or 'inf', got {raw!r}") from exc


def _parse_epsilon(raw) -> float | str:
    text = str(raw).strip().lower()
    if text == MEDIAN:
        return MEDIAN
    try:
        return float(text)
    except ValueError as exc:
        raise InputError(f"epsilon must be a number or '{MEDIAN}', got {raw!r}") from exc


def _int_list(raw: str) -> list[int]:
    try:
        return [int(tok) for tok in str(raw).replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated integer list, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynamap",
        description="Diffusion maps for data whose kernel changes over a parameter space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", action="append", default=None, help="input matrix (repeatable)")
        p.add_argument("--output-dir", default=None, help="directory for outputs")
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--t", default=None, help="diffusion time (positive integer or 'inf')")
        p.add_argument("--s", type=float, default=None, help="meta diffusion time")
        p.add_argument("--rank", type=int, default=None, help="retained eigenpairs (default: full)")
        p.add_argument("--dims", type=int, default=None, help="embedding dimensions")
        p.add_argument("--target-lambda2", type=float, default=None, help="calibration target")
        p.add_argument("--tol", type=float, default=None, help="calibration tolerance")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--epsilon", default=None, help="fixed bandwidth")
        group.add_argument(
            "--epsilon-median",
            action="store_true",
            help="median-distance bandwidth for the meta kernel",
        )
        p.add_argument("--common-base", type=int, default=None, help="base member for rotations")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=FORMATS, default=None)
        p.add_argument(
            "--input-kind",
            choices=("kernel", "points"),
            default=None,
            help="inputs are kernel matrices (default) or point clouds",
        )
        p.add_argument("--full-matrix", action="store_true", help="emit all-pairs distances")

    for name in (
        "embed",
        "distance",
        "global",
        "metagraph",
        "torus-experiment",
        "convergence",
        "change-detect",
        "gen-data",
    ):
        cmd = sub.add_parser(name)
        add_shared(cmd)
        if name == "convergence":
            cmd.add_argument("--n-grid", default=None, help="comma-separated sample sizes")
            cmd.add_argument("--trials", type=int, default=None)
            cmd.add_argument("--reference-n", type=int, default=None)
        if name in ("torus-experiment", "gen-data"):
            cmd.add_argument("--n", type=int, default=None, help="samples per torus")
        if name in ("change-detect", "gen-data"):
            cmd.add_argument("--band-counts", default=None, help="comma-separated bands per epoch")
            cmd.add_argument("--noise-sigma", type=float, default=None)
            cmd.add_argument("--block-size", type=int, default=None)
            cmd.add_argument("--side", type=int, default=None, help="pixel grid side length")
        if name == "gen-data":
            cmd.add_argument(
                "--dataset",
                choices=("torus", "torus-family", "standard-map", "cube"),
                default=None,
            )
            cmd.add_argument("--grid", type=int, default=None, help="standard-map lattice side")
            cmd.add_argument("--steps", type=int, default=None, help="standard-map iterations")
            cmd.add_argument("--alpha", type=float, default=None, help="standard-map nonlinearity")
    return parser


def _make_config(args) -> RunConfig:
    config = _load_config_file(args.config)
    epsilon = None
    if getattr(args, "epsilon_median", False):
        epsilon = MEDIAN
    elif args.epsilon is not None:
        epsilon = _parse_epsilon(args.epsilon)
    elif "epsilon" in config:
        epsilon = _parse_epsilon(config["epsilon"])

    inputs = args.input
    if inputs is None and "input" in config:
        inputs = [tok for tok in config["input"].split() if tok]
    output_dir = _resolve(args, config, "output_dir", str, ".")

    # the torus pipeline follows its own protocol default of t=2
    t_default = 2 if args.command == "torus-experiment" else DEFAULTS["t"]
    cfg = RunConfig(
        command=args.command,
        inputs=[Path(p) for p in (inputs or [])],
        output_dir=Path(output_dir),
        fmt=_resolve(args, config, "format", str, DEFAULTS["format"]),
        seed=_resolve(args, config, "seed", int, DEFAULTS["seed"]),
        t=_parse_t(_resolve(args, config, "t", _parse_t, t_default)),
        s=_resolve(args, config, "s", float, DEFAULTS["s"]),
        rank=_resolve(args, config, "rank", int, None),
        dims=_resolve(args, config, "dims", int, DEFAULTS["dims"]),
        target_lambda2=_resolve(
            args, config, "target_lambda2", float, DEFAULTS["target_lambda2"]
        ),
        tol=_resolve(args, config, "tol", float, DEFAULTS["tol"]),
        epsilon=epsilon,
        common_base=_resolve(args, config, "common_base", int, None),
        input_kind=_resolve(args, config, "input_kind", str, DEFAULTS["input_kind"]),
        full_matrix=bool(getattr(args, "full_matrix", False)),
    )
    for key in (
        "n",
        "trials",
        "reference_n",
        "noise_sigma",
        "block_size",
        "side",
        "grid",
        "steps",
        "alpha",
    ):
        cast = float if key in ("noise_sigma", "alpha") else int
        cfg.extras[key] = _resolve(args, config, key, cast, DEFAULTS[key])
    cfg.extras["n_grid"] = _int_list(_resolve(args, config, "n_grid", str, DEFAULTS["n_grid"]))
    cfg.extras["band_counts"] = _int_list(
        _resolve(args, config, "band_counts", str, DEFAULTS["band_counts"])
    )
    cfg.extras["dataset"] = _resolve(args, config, "dataset", str, DEFAULTS["dataset"])
    cfg.validate()
    return cfg


def _load_decompositions(cfg: RunConfig, minimum: int):
    """Read inputs, build kernels if needed, and decompose each one."""
    if len(cfg.inputs) < minimum:
        raise InputError(f"{cfg.command} needs at least {minimum} --input file(s)")
    decs = []
    size = None
    for path in cfg.inputs:
        values = read_matrix(path)
        if cfg.input_kind == "points":
            cloud = PointCloud(values)
            if isinstance(cfg.epsilon, float):
                eps = cfg.epsilon
            else:
                eps = calibrate_epsilon(cloud, cfg.target_lambda2, cfg.tol)
            kernel = gaussian_kernel(cloud, eps)
        else:
            kernel = KernelMatrix(values)
        if size is None:
            size = kernel.n
        elif kernel.n != size:
            raise InputError(f"{path}: size {kernel.n} does not match {size}")
        rank = cfg.rank if cfg.rank is not None else kernel.n
        if rank > kernel.n:
            raise InputError(f"rank {rank} exceeds input size {kernel.n}")
        decs.append(spectral_decomposition(diffusion_matrix(kernel), rank))
    return decs


def cmd_embed(cfg: RunConfig, out: OutputTracker) -> None:
    decs = _load_decompositions(cfg, minimum=1)
    t = int(cfg.t) if cfg.t != math.inf else None
    if t is None:
        raise InputError("embed needs a finite diffusion time")
    for idx, dec in enumerate(decs):
        out.matrix(f"embedding_{idx}", diffusion_map(dec, t).coords)
    if cfg.common_base is not None:
        rotated = common_embedding(decs, cfg.common_base, t)
        for idx, emb in enumerate(rotated):
            out.matrix(f"common_{idx}", emb.coords)


def cmd_distance(cfg: RunConfig, out: OutputTracker) -> None:
    decs = _load_decompositions(cfg, minimum=2)
    if len(decs) != 2:
        raise InputError("distance compares exactly two inputs")
    dec_a, dec_b = decs
    if cfg.t == math.inf:
        if cfg.full_matrix:
            raise InputError("asymptotic distances are emitted per corresponding point")
        out.matrix("distance_map", asymptotic_distance_map(dec_a, dec_b))
        return
    gram = gram_matrix(dec_a, dec_b)
    t = int(cfg.t)
    if cfg.full_matrix:
        out.matrix("distance_matrix", diffusion_distance_matrix(dec_a, dec_b, gram, t))
    else:
        out.matrix("distance_map", diffusion_distance_map(dec_a, dec_b, gram, t))


def cmd_global(cfg: RunConfig, out: OutputTracker) -> None:
    decs = _load_decompositions(cfg, minimum=2)
    t = int(cfg.t) if cfg.t != math.inf else None
    if t is None:
        count = len(decs)
        dists = np.zeros((count, count))
        for a in range(count):
            for b in range(a + 1, count):
                dists[a, b] = dists[b, a] = asymptotic_global_distance(decs[a], decs[b])
    else:
        dists = global_distance_matrix(decs, t)
    out.matrix("global_distances", dists)


def cmd_metagraph(cfg: RunConfig, out: OutputTracker) -> None:
    decs = _load_decompositions(cfg, minimum=2)
    if cfg.t == math.inf:
        raise InputError("metagraph needs a finite diffusion time")
    t = int(cfg.t)
    dists = global_distance_matrix(decs, t)
    epsilon = cfg.epsilon if cfg.epsilon is not None else MEDIAN
    meta = meta_kernel(dists, epsilon=epsilon, t=t)
    coords = meta_embedding(meta, cfg.s, min(cfg.dims, meta.size))
    out.matrix("global_distances", dists)
    out.matrix("meta_kernel", meta.kernel)
    out.matrix("meta_coords", coords)


def cmd_torus_experiment(cfg: RunConfig, out: OutputTracker) -> None:
    if cfg.t == math.inf:
        raise InputError("the torus experiment needs a finite diffusion time")
    result = experiments.torus_experiment(
        n=cfg.extras["n"],
        seed=cfg.seed,
        target_lambda2=cfg.target_lambda2,
        tol=cfg.tol,
        rank=cfg.rank if cfg.rank is not None else 10,
        t=int(cfg.t),
        s=cfg.s,
        dims=cfg.dims,
        epsilon=cfg.epsilon if cfg.epsilon is not None else MEDIAN,
    )
    labels = np.array(
        [
            (math.nan, math.nan) if label is None else label
            for label in result.labels
        ]
    )
    out.matrix("torus_global_distances", result.global_distances)
    out.matrix("torus_meta_coords", result.coords)
    out.matrix("torus_labels", labels)
    groups = np.where(np.isnan(labels[:, 0]), 0, 1 + np.searchsorted(
        np.unique(labels[~np.isnan(labels[:, 0]), 0]), labels[:, 0]
    ))
    if result.coords.shape[1] >= 3:
        x, y = result.coords[:, 1], result.coords[:, 2]
    else:
        x, y = result.coords[:, 0], result.coords[:, -1]
    svg_path = out.path("torus_meta", ".svg")
    write_scatter_svg(svg_path, x, y, groups=groups, title="graph of graphs")
    out.written.append(svg_path)
    inversions = experiments.monotonicity_inversions(result)
    accuracy = experiments.angle_classification_accuracy(result)
    out.text(
        "torus_summary",
        "\n".join(
            [
                f"meta_lambda2 {result.meta_lambda2:.6f}",
                f"meta_epsilon {result.meta.epsilon:.6f}",
                f"angle_accuracy {accuracy:.4f}",
                *(
                    f"inversions angle={angle:.6f} {count}"
                    for angle, count in inversions.items()
                ),
            ]
        ),
    )


def cmd_convergence(cfg: RunConfig, out: OutputTracker) -> None:
    if cfg.t == math.inf:
        raise InputError("the convergence study needs a finite diffusion time")
    report = experiments.torus_pair_study(
        n_grid=cfg.extras["n_grid"],
        trials=cfg.extras["trials"],
        reference_n=cfg.extras["reference_n"],
        t=int(cfg.t),
        seed=cfg.seed,
        target_lambda2=cfg.target_lambda2,
    )
    out.matrix("convergence_report", report_rows(report))
    out.text("convergence_summary", report_summary(report))


def cmd_change_detect(cfg: RunConfig, out: OutputTracker) -> None:
    result = experiments.change_detection_experiment(
        scene_seed=cfg.seed,
        band_counts=cfg.extras["band_counts"],
        noise_sigma=cfg.extras["noise_sigma"],
        shape=(cfg.extras["side"], cfg.extras["side"]),
        block_size=cfg.extras["block_size"],
        target_lambda2=cfg.target_lambda2,
        tol=cfg.tol,
    )
    out.matrix("change_scores", result.scores)
    out.matrix("change_mask", result.change_mask.astype(float))
    planted = int(result.change_mask.sum())
    hits = result.hits_in_top(50)
    out.text(
        "change_summary",
        "\n".join(
            [
                f"change_epoch {result.change_epoch}",
                f"planted {planted}",
                f"hits_in_top_50 {hits}",
                *(f"snr_db epoch={k} {snr:.3f}" for k, snr in enumerate(result.snr_db)),
            ]
        ),
    )


def cmd_gen_data(cfg: RunConfig, out: OutputTracker) -> None:
    dataset = cfg.extras["dataset"]
    if dataset == "torus":
        cloud = sample_torus(TorusSpec(), cfg.extras["n"], cfg.seed)
        out.matrix("torus", cloud.points)
    elif dataset == "torus-family":
        clouds, labels = pinched_torus_family(cfg.seed, n=cfg.extras["n"])
        for idx, cloud in enumerate(clouds):
            out.matrix(f"torus_family_{idx:02d}", cloud.points)
        numeric = np.array(
            [(math.nan, math.nan) if label is None else label for label in labels]
        )
        out.matrix("torus_family_labels", numeric)
    elif dataset == "standard-map":
        orbits = standard_map_orbits(
            cfg.extras["alpha"], cfg.extras["grid"], cfg.extras["steps"]
        )
        rows = []
        for orbit_id, orbit in enumerate(orbits):
            steps = np.arange(orbit.shape[0], dtype=float)
            rows.append(
                np.column_stack([np.full(orbit.shape[0], float(orbit_id)), steps, orbit])
            )
        out.matrix("standard_map", np.vstack(rows))
    elif dataset == "cube":
        sensors = [
            SensorSpec(band_count=count, seed=cfg.seed * 1000 + 17 * (k + 1),
                       noise_sigma=cfg.extras["noise_sigma"])
            for k, count in enumerate(cfg.extras["band_counts"])
        ]
        family = synthetic_cube_family(
            cfg.seed,
            sensors,
            plant_change=True,
            shape=(cfg.extras["side"], cfg.extras["side"]),
            block_size=cfg.extras["block_size"],
        )
        for idx, cloud in enumerate(family.clouds):
            out.matrix(f"cube_epoch_{idx}", cloud.points)
        out.matrix("cube_mask", family.change_mask.astype(float))
        out.text(
            "cube_summary",
            "\n".join(
                [f"change_epoch {family.change_epoch}"]
                + [f"snr_db epoch={k} {snr:.3f}" for k, snr in enumerate(family.snr_db)]
            ),
        )
    else:
        raise InputError(f"unknown dataset {dataset!r}")


HANDLERS = {
    "embed": cmd_embed,
    "distance": cmd_distance,
    "global": cmd_global,
    "metagraph": cmd_metagraph,
    "torus-experiment": cmd_torus_experiment,
    "convergence": cmd_convergence,
    "change-detect": cmd_change_detect,
    "gen-data": cmd_gen_data,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _make_config(args)
    except (DynamapError, OSError) as exc:
        print(f"dynamap: {exc}", file=sys.stderr)
        return 1
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    out = OutputTracker(cfg.output_dir, cfg.fmt)
    try:
        HANDLERS[cfg.command](cfg, out)
        out.verify()
    except (DynamapError, OSError) as exc:
        out.cleanup()
        print(f"dynamap: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
