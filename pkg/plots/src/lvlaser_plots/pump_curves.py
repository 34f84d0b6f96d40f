"""Photon number versus pump, one labeled curve per sweep file.

Standalone script: positional CSV paths, `--out BASE` writes BASE.png and
BASE.svg.  Optional `--kinks "p1,p2"` (repeatable, matched to the files in
order) draws markers at externally detected kink pumps.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, SweepData, load_sweep


def build_figure(sweeps: list[SweepData], kink_marks: list[list[float]] | None = None,
                 scale: str = "loglog"):
    """One axes, one labeled curve per sweep; returns the matplotlib figure."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for i, data in enumerate(sweeps):
        (line,) = ax.plot(data.pump, data.n, label=data.beta_label())
        if kink_marks and i < len(kink_marks):
            for pump in kink_marks[i]:
                y = np.interp(np.log(pump), np.log(data.pump), np.log(data.n))
                ax.plot(pump, np.exp(y), marker="v", color=line.get_color(),
                        markersize=9, linestyle="none")
    if scale == "loglog":
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("pump parameter")
    ax.set_ylabel("photon number")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def save_figure(fig, out_base: str) -> list[str]:
    paths = [f"{out_base}.png", f"{out_base}.svg"]
    for path in paths:
        fig.savefig(path)
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-pump-curves",
        description="Render photon-number-vs-pump curves from lvlaser sweep "
                    "CSV files (one labeled curve per file).")
    parser.add_argument("csv", nargs="+", help="sweep CSV files")
    parser.add_argument("--out", required=True, metavar="BASE",
                        help="output image base name (writes BASE.png and BASE.svg)")
    parser.add_argument("--kinks", action="append", default=None, metavar="P1,P2",
                        help="comma-separated kink pump positions for the "
                             "matching input file (repeatable)")
    parser.add_argument("--scale", choices=("loglog", "linear"), default="loglog")
    args = parser.parse_args(argv)
    try:
        sweeps = [load_sweep(path) for path in args.csv]
        marks = None
        if args.kinks is not None:
            marks = [[float(v) for v in raw.split(",") if v.strip() != ""]
                     for raw in args.kinks]
    except (SchemaError, ValueError) as exc:
        print(f"render-pump-curves: {exc}", file=sys.stderr)
        return 1
    fig = build_figure(sweeps, kink_marks=marks, scale=args.scale)
    try:
        for path in save_figure(fig, args.out):
            print(path)
    except OSError as exc:
        print(f"render-pump-curves: cannot write images: {exc}", file=sys.stderr)
        return 2
    finally:
        plt.close(fig)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
