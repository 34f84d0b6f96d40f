"""Paneled V-scheme overview: photon number, inversion and polarization
versus pump, with the coupling fraction beta on a secondary axis.

Standalone script: positional CSV paths, `--out BASE` writes BASE.png and
BASE.svg.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, SweepData, load_sweep


def build_figure(sweeps: list[SweepData]):
    """Three stacked panels sharing the pump axis; returns the figure."""
    fig, (ax_n, ax_d, ax_x) = plt.subplots(3, 1, sharex=True, figsize=(6.4, 8.0))
    ax_beta = ax_n.twinx()
    for data in sweeps:
        label = data.beta_label()
        (line,) = ax_n.plot(data.pump, data.n, label=label)
        color = line.get_color()
        ax_beta.plot(data.pump, data.beta, color=color, linestyle=":",
                     linewidth=1.0, alpha=0.7)
        ax_d.plot(data.pump, data.inversion, color=color)
        # the polarization magnitude spans decades; keep the sign out of the
        # log panel
        ax_x.plot(data.pump, np.abs(data.x), color=color)
    ax_n.set_xscale("log")
    ax_n.set_yscale("log")
    ax_n.set_ylabel("photon number")
    ax_beta.set_ylabel("beta", color="0.4")
    ax_beta.set_yscale("log")
    ax_d.set_ylabel("inversion")
    ax_d.set_ylim(-1.05, 1.05)
    ax_x.set_yscale("log")
    ax_x.set_ylabel("|polarization|")
    ax_x.set_xlabel("pump parameter")
    ax_n.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def save_figure(fig, out_base: str) -> list[str]:
    paths = [f"{out_base}.png", f"{out_base}.svg"]
    for path in paths:
        fig.savefig(path)
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-v-panels",
        description="Render n/D/x panels versus pump from lvlaser V-sweep "
                    "CSV files, with beta on a secondary axis.")
    parser.add_argument("csv", nargs="+", help="sweep CSV files")
    parser.add_argument("--out", required=True, metavar="BASE",
                        help="output image base name (writes BASE.png and BASE.svg)")
    args = parser.parse_args(argv)
    try:
        sweeps = [load_sweep(path) for path in args.csv]
    except SchemaError as exc:
        print(f"render-v-panels: {exc}", file=sys.stderr)
        return 1
    fig = build_figure(sweeps)
    try:
        for path in save_figure(fig, args.out):
            print(path)
    except OSError as exc:
        print(f"render-v-panels: cannot write images: {exc}", file=sys.stderr)
        return 2
    finally:
        plt.close(fig)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
