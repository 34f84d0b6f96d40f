"""Loading and schema validation for lvlaser sweep CSV files.

The renderers never recompute physics: every plotted number comes from the
files, whose column contract is pinned here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SWEEP_COLUMNS = ("pump", "n", "x", "rho00", "rho11", "rho22", "D", "beta",
                 "gamma_perp", "regime")


class SchemaError(ValueError):
    """The file does not carry the sweep CSV column contract."""


@dataclass(frozen=True)
class SweepData:
    """One sweep file: numeric columns plus the regime strings."""

    path: str
    pump: np.ndarray
    n: np.ndarray
    x: np.ndarray
    inversion: np.ndarray
    beta: np.ndarray
    regime: list[str]

    def beta_label(self) -> str:
        """Curve label from the coupling fraction column."""
        lo, hi = float(np.min(self.beta)), float(np.max(self.beta))
        if np.isclose(lo, hi, rtol=1e-12, atol=0):
            return f"beta={hi:.3g}"
        return f"beta={hi:.3g}..{lo:.3g}"


def load_sweep(path: str) -> SweepData:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != SWEEP_COLUMNS:
            raise SchemaError(
                f"{path}: expected columns {','.join(SWEEP_COLUMNS)}, "
                f"got {','.join(header)}")
        rows = [row for row in reader if row and not row[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        cols = {name: np.array([float(row[i]) for row in rows])
                for i, name in enumerate(SWEEP_COLUMNS[:-1])}
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed row: {exc}") from exc
    return SweepData(
        path=path,
        pump=cols["pump"],
        n=cols["n"],
        x=cols["x"],
        inversion=cols["D"],
        beta=cols["beta"],
        regime=[row[-1] for row in rows],
    )
