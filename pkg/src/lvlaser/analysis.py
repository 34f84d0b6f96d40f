"""Thresholds, critical points, beta factor, regime classification and sweeps.

Threshold and breakdown points are defined by the standard description
(stimulated term only): they are the zeros in the pump parameter of the
linear gain coefficient :func:`lvlaser.model.b_standard`.  The full photon
number with the spontaneous term never touches zero, so on full curves the
transitions appear as kinks, located geometrically by :func:`detect_kinks`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .model import (
    DimensionlessParams,
    Scheme,
    _positive_root,
    b_standard,
    gamma_perp_ratio,
    photon_steady,
    steady_state_full,
)

__all__ = [
    "Regime",
    "ThresholdReport",
    "SweepRow",
    "SweepTable",
    "NoLasingError",
    "EmptyWindowError",
    "SWEEP_CSV_HEADER",
    "lambda_threshold",
    "s_max_lambda",
    "beta_factor",
    "beta_min",
    "v_thresholds_approx",
    "v_thresholds_exact",
    "n_saturation",
    "classify_regime",
    "lambda_report",
    "v_reports",
    "make_grid",
    "default_grid",
    "sweep",
    "detect_kinks",
]

SWEEP_CSV_HEADER = "pump,n,x,rho00,rho11,rho22,D,beta,gamma_perp,regime"


class NoLasingError(ValueError):
    """No positive-gain steady state exists for any pump value."""


class EmptyWindowError(NoLasingError):
    """The V-scheme lasing window is empty."""


class Regime(str, Enum):
    BELOW_THRESHOLD = "BelowThreshold"
    LASING = "Lasing"
    ABOVE_BREAKDOWN = "AboveBreakdown"
    NO_LASING = "NoLasing"


def lambda_threshold(d: DimensionlessParams) -> float:
    """Threshold pump P1 of the lambda scheme (alpha1 in d is ignored).

    Raises NoLasingError when the gain denominator is not positive, which is
    exactly the sat >= s_max_lambda condition.
    """
    denom = (d.lam * (d.alpha2 - 1.0)
             - d.sat * (d.alpha2 + 1.0) * (d.alpha2 + 1.0 + d.eta))
    # Gate on the saturation ceiling directly: at sat == s_max the denominator
    # is analytically zero but rounds to either sign.
    if d.sat >= s_max_lambda(d) or denom <= 0.0:
        raise NoLasingError(
            f"no lasing for any pump: sat={d.sat:g} >= s_max={s_max_lambda(d):g} "
            f"(alpha2={d.alpha2:g}, lam={d.lam:g}, eta={d.eta:g})")
    return d.alpha2 * d.sat * (d.alpha2 + 1.0 + d.eta) / denom


def s_max_lambda(d: DimensionlessParams) -> float:
    """Largest saturation parameter that still allows lambda-scheme lasing.

    0 when alpha2 <= 1: the depletion path out of the lower lasing level is
    then too slow for gain at any saturation.
    """
    if d.alpha2 <= 1.0:
        return 0.0
    return d.lam * (d.alpha2 - 1.0) / ((d.alpha2 + 1.0) * (d.alpha2 + 1.0 + d.eta))


def beta_factor(d: DimensionlessParams) -> float:
    """Fraction of spontaneous emission entering the lasing mode, in (0, 1]."""
    return 1.0 / (1.0 + d.sat * (1.0 + d.alpha2 + d.eta))


def beta_min(d: DimensionlessParams) -> float:
    """Smallest beta at which the lambda scheme can lase: beta at sat = s_max.

    1 when alpha2 <= 1 (then even a perfect cavity cannot lase).
    """
    if d.alpha2 <= 1.0:
        return 1.0
    return 1.0 / (1.0 + d.lam * (d.alpha2 - 1.0) / (d.alpha2 + 1.0))


def _require_depletion(d: DimensionlessParams) -> None:
    if d.alpha1 <= 0.0:
        raise ValueError("alpha1 must be > 0: the V scheme has no depletion "
                         "path into the upper lasing level otherwise")


def v_thresholds_approx(d: DimensionlessParams) -> tuple[float, float]:
    """Small-sat/lam expansion of the V-scheme window (p2_thr, p2_max).

    p2_max is inf at sat = 0: only the threshold survives in the
    strong-coupling limit.  alpha2 in d is ignored (it is the pump).
    """
    _require_depletion(d)
    if d.lam <= 0.0:
        raise EmptyWindowError("lam = 0: no gain for any pump")
    p2_thr = 1.0 + (d.sat / d.lam) * (1.0 + 2.0 * d.alpha1) * (2.0 + d.eta) / d.alpha1
    if d.sat == 0.0:
        return p2_thr, math.inf
    p2_max = (d.lam / d.sat) * d.alpha1 / (1.0 + d.alpha1)
    return p2_thr, p2_max


def v_thresholds_exact(d: DimensionlessParams) -> tuple[float, float]:
    """Exact V-scheme window: the two positive zeros in P2 of b_standard.

    With P = alpha2 the gain numerator is the downward parabola
        -A*P**2 + B*P - C,
        A = sat*(1 + alpha1),
        B = alpha1*lam - sat*(alpha1 + (1 + eta)*(1 + alpha1)),
        C = alpha1*(lam + sat*(1 + eta)),
    solved in closed form with the cancellation-free conjugate root.
    Raises EmptyWindowError when no open window of positive pumps exists.
    """
    _require_depletion(d)
    if d.lam <= 0.0:
        raise EmptyWindowError("lam = 0: no gain for any pump")
    if d.sat == 0.0:
        return 1.0, math.inf
    a = d.sat * (1.0 + d.alpha1)
    b = d.alpha1 * d.lam - d.sat * (d.alpha1 + (1.0 + d.eta) * (1.0 + d.alpha1))
    c = d.alpha1 * (d.lam + d.sat * (1.0 + d.eta))
    disc = b * b - 4.0 * a * c
    if disc <= 0.0 or b <= 0.0:
        raise EmptyWindowError(
            f"lasing window is empty: sat={d.sat:g} too large for "
            f"lam={d.lam:g}, alpha1={d.alpha1:g}, eta={d.eta:g}")
    sqrt_disc = math.sqrt(disc)
    p2_max = (b + sqrt_disc) / (2.0 * a)
    p2_thr = 2.0 * c / (b + sqrt_disc)
    if not p2_thr < p2_max:
        raise EmptyWindowError("lasing window is degenerate")
    return p2_thr, p2_max


def n_saturation(d: DimensionlessParams) -> float:
    """Photon number of the lambda scheme in the infinite-pump limit.

    The quadratic coefficients converge to
        b_inf = (lam*(alpha2 - 1) - sat*(alpha2 + 1 + eta)*(alpha2 + 1) - 1) / 2
        c_inf = lam*alpha2 / 2
    as alpha1 -> inf; alpha1 in d is ignored.
    """
    b_inf = 0.5 * (d.lam * (d.alpha2 - 1.0)
                   - d.sat * (d.alpha2 + 1.0 + d.eta) * (d.alpha2 + 1.0)
                   - 1.0)
    c_inf = 0.5 * d.lam * d.alpha2
    return _positive_root(b_inf, c_inf)


def classify_regime(d: DimensionlessParams, scheme: Scheme, pump: float) -> Regime:
    """Place a pump value relative to the scheme's critical points.

    Both window endpoints classify as Lasing (closed window).  The pump slot
    of d (alpha1 for lambda, alpha2 for V) is ignored in favor of `pump`.
    """
    if pump < 0.0 or not math.isfinite(pump):
        raise ValueError(f"pump must be finite and >= 0, got {pump}")
    if scheme is Scheme.LAMBDA:
        s_max = s_max_lambda(d)
        if d.sat >= s_max:
            return Regime.NO_LASING
        p_thr = lambda_threshold(d)
        return Regime.BELOW_THRESHOLD if pump < p_thr else Regime.LASING
    try:
        p_thr, p_max = v_thresholds_exact(d)
    except EmptyWindowError:
        return Regime.NO_LASING
    except ValueError:
        # alpha1 = 0: no depletion path, the V scheme cannot lase.
        return Regime.NO_LASING
    if pump < p_thr:
        return Regime.BELOW_THRESHOLD
    if pump <= p_max:
        return Regime.LASING
    return Regime.ABOVE_BREAKDOWN


@dataclass(frozen=True)
class ThresholdReport:
    """Critical points plus the coupling-quality numbers for one scheme.

    For the lambda scheme p_thr is the threshold pump and p_max is None; for
    the V scheme (p_thr, p_max) is the lasing window and s_max is None.  beta
    is evaluated at the parameters as given (lambda) or at the threshold pump
    (V); beta_min is the smallest beta compatible with lasing.
    """

    scheme: Scheme
    p_thr: float
    p_max: float | None
    s_max: float | None
    beta: float
    beta_min: float
    method: str

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.beta_min > 1.0:
            raise ValueError(f"beta_min must be <= 1, got {self.beta_min}")
        if self.p_max is not None and not self.p_thr < self.p_max:
            raise ValueError("a lasing window requires p_thr < p_max")


def lambda_report(d: DimensionlessParams) -> ThresholdReport:
    """Threshold report of the lambda scheme; raises NoLasingError above s_max."""
    return ThresholdReport(
        scheme=Scheme.LAMBDA,
        p_thr=lambda_threshold(d),
        p_max=None,
        s_max=s_max_lambda(d),
        beta=beta_factor(d),
        beta_min=beta_min(d),
        method="closed_form",
    )


def _v_report(d: DimensionlessParams, window: tuple[float, float], method: str) -> ThresholdReport:
    p_thr, p_max = window
    beta_at_thr = beta_factor(replace(d, alpha2=p_thr))
    if d.sat == 0.0:
        beta_floor = 1.0
    else:
        beta_floor = 1.0 / (1.0 + d.sat * (1.0 + p_max + d.eta))
    return ThresholdReport(scheme=Scheme.V, p_thr=p_thr, p_max=p_max, s_max=None,
                           beta=beta_at_thr, beta_min=beta_floor, method=method)


def v_reports(d: DimensionlessParams) -> tuple[ThresholdReport, ThresholdReport]:
    """(exact, expansion) reports for the V scheme; raises EmptyWindowError."""
    exact = _v_report(d, v_thresholds_exact(d), "exact_root")
    approx = _v_report(d, v_thresholds_approx(d), "expansion")
    return exact, approx


@dataclass(frozen=True)
class SweepRow:
    pump: float
    n: float
    x: float
    rho00: float
    rho11: float
    rho22: float
    inversion: float
    beta: float
    gamma_perp: float
    regime: Regime | None
    spurious: bool = False
    error: str | None = None

    def csv_line(self) -> str:
        regime = self.regime.value if self.regime is not None else "Error"
        return ",".join([repr(float(v)) for v in
                         (self.pump, self.n, self.x, self.rho00, self.rho11,
                          self.rho22, self.inversion, self.beta, self.gamma_perp)]
                        + [regime])


@dataclass(frozen=True)
class SweepTable:
    """Ordered single-parameter sweep; one row per grid point."""

    scheme: Scheme
    swept_parameter: str
    rows: list[SweepRow]

    def pumps(self) -> np.ndarray:
        return np.array([r.pump for r in self.rows])

    def photon_numbers(self) -> np.ndarray:
        return np.array([r.n for r in self.rows])

    def to_csv(self) -> str:
        lines = [SWEEP_CSV_HEADER]
        lines.extend(r.csv_line() for r in self.rows)
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return len(self.rows)


def make_grid(lo: float, hi: float, points: int, spacing: str = "log") -> np.ndarray:
    """Strictly increasing pump grid, log or linear spaced."""
    if points < 2:
        raise ValueError(f"grid needs at least 2 points, got {points}")
    if not lo < hi:
        raise ValueError(f"grid requires from < to, got [{lo}, {hi}]")
    if spacing == "log":
        if lo <= 0.0:
            raise ValueError("log spacing requires a positive lower bound")
        return np.geomspace(lo, hi, points)
    if spacing == "linear":
        return np.linspace(lo, hi, points)
    raise ValueError(f"unknown spacing {spacing!r} (expected 'log' or 'linear')")


def default_grid(scheme: Scheme, d: DimensionlessParams, points: int = 200) -> np.ndarray:
    """Default sweep grid: P1 in [1e-3, 1e3]; P2 from 0.5 to twice the
    estimated breakdown pump (1e4 when the window is unbounded)."""
    if scheme is Scheme.LAMBDA:
        return make_grid(1e-3, 1e3, points)
    _, p2_max = v_thresholds_approx(d)
    hi = 2.0 * p2_max if math.isfinite(p2_max) else 1e4
    return make_grid(0.5, hi, points)


def _nan_row(pump: float, exc: Exception) -> SweepRow:
    nan = math.nan
    return SweepRow(pump=pump, n=nan, x=nan, rho00=nan, rho11=nan, rho22=nan,
                    inversion=nan, beta=nan, gamma_perp=nan, regime=None,
                    spurious=False, error=f"{type(exc).__name__}: {exc}")


def sweep(d_base: DimensionlessParams, scheme: Scheme, grid) -> SweepTable:
    """Closed-form steady-state curve along a pump grid.

    Each row re-solves the full model at its own pump value, so for the V
    scheme the coherence decay follows the pump automatically.  Errors are
    recorded per row without aborting the sweep.
    """
    pumps = np.asarray(grid, dtype=np.float64)
    if pumps.ndim != 1 or len(pumps) < 1:
        raise ValueError("grid must be a one-dimensional sequence of pumps")
    if not np.all(np.isfinite(pumps)) or not np.all(pumps > 0.0):
        raise ValueError("grid values must be finite and positive")
    if not np.all(np.diff(pumps) > 0.0):
        raise ValueError("grid values must be strictly increasing")

    rows: list[SweepRow] = []
    for pump in pumps:
        pump = float(pump)
        try:
            d_row = replace(d_base, **{scheme.pump_field: pump})
            ss = steady_state_full(d_row)
            st = ss.state
            rows.append(SweepRow(
                pump=pump,
                n=st.photons,
                x=st.polarization,
                rho00=st.pop0,
                rho11=st.pop1,
                rho22=st.pop2,
                inversion=st.inversion(),
                beta=beta_factor(d_row),
                gamma_perp=gamma_perp_ratio(d_row),
                regime=classify_regime(d_base, scheme, pump),
                spurious=not ss.physical,
            ))
        except (ValueError, ArithmeticError) as exc:
            rows.append(_nan_row(pump, exc))
    return SweepTable(scheme=scheme, swept_parameter=scheme.pump_field, rows=rows)


def detect_kinks(table: SweepTable, prominence_ratio: float = 3.0,
                 min_curvature: float = 1.0, merge_cells: int = 4) -> list[float]:
    """Pump locations of sharp bends of log n versus log pump.

    Candidate points are local maxima of |d^2 log n / d(log pump)^2|
    exceeding both prominence_ratio times the median curvature and the
    absolute floor min_curvature.  The floor separates true slope breaks
    (order 1 per grid cell) from broad saturation knees, whose log-log
    curvature stays below ~1/4.  A sharp transition resolved by the grid
    shows one curvature hump per side of its slope peak, so maxima within
    merge_cells grid cells are merged into a single kink at their
    curvature-weighted center.  Returns an empty list on smooth curves.
    """
    if len(table) < 16:
        raise ValueError(f"kink detection needs at least 16 rows, got {len(table)}")
    pts = [(r.pump, r.n) for r in table.rows
           if r.error is None and math.isfinite(r.n) and r.n > 0.0 and r.pump > 0.0]
    if len(pts) < 16:
        return []
    u = np.log([p for p, _ in pts])
    y = np.log([n for _, n in pts])
    du_fwd = u[2:] - u[1:-1]
    du_bwd = u[1:-1] - u[:-2]
    slope_fwd = (y[2:] - y[1:-1]) / du_fwd
    slope_bwd = (y[1:-1] - y[:-2]) / du_bwd
    curv = np.abs(2.0 * (slope_fwd - slope_bwd) / (du_fwd + du_bwd))
    threshold = max(prominence_ratio * float(np.median(curv)), min_curvature)
    peaks = [i for i in range(1, len(curv) - 1)
             if curv[i] > threshold and curv[i] > curv[i - 1] and curv[i] >= curv[i + 1]]
    kinks: list[float] = []
    cluster: list[int] = []
    for i in peaks + [None]:
        if cluster and (i is None or i - cluster[-1] > merge_cells):
            weights = curv[cluster]
            centers = u[[j + 1 for j in cluster]]
            kinks.append(float(np.exp(np.dot(weights, centers) / np.sum(weights))))
            cluster = []
        if i is not None:
            cluster.append(i)
    return kinks
