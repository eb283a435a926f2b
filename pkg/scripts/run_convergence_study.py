#!/usr/bin/env python3
"""Estimate the sampling rate of the pointwise and global distances on a torus pair."""
import argparse
from pathlib import Path

from dynamap.experiments import torus_pair_study
from dynamap.matio import write_matrix_csv
from dynamap.sampling import report_rows, report_summary


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-grid", default="100,200,400,800")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--reference-n", type=int, default=4000)
    parser.add_argument("--t", type=int, default=1)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--output-dir", default="convergence_out")
    args = parser.parse_args()

    report = torus_pair_study(
        n_grid=[int(v) for v in args.n_grid.split(",")],
        trials=args.trials,
        reference_n=args.reference_n,
        t=args.t,
        seed=args.seed,
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "report.csv", report_rows(report))
    summary = report_summary(report)
    (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    print(f"outputs in {out}/")


if __name__ == "__main__":
    main()
