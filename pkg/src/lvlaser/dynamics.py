"""Time-domain integration of the laser equations and relaxation to steady state.

This module is the independent cross-check for every closed-form result in
:mod:`lvlaser.model` and :mod:`lvlaser.analysis`: it only ever evaluates the
equations of motion, never the steady-state algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rk
from .model import LaserState, PhysicalParams, Scheme

__all__ = [
    "IntegratorSettings",
    "Trajectory",
    "SettleResult",
    "IntegrationError",
    "StepSizeUnderflow",
    "NonFinite",
    "NoConvergence",
    "rhs",
    "default_initial_state",
    "integrate",
    "settle",
    "relax_to_steady",
]


class IntegrationError(RuntimeError):
    """Base class for integration failures."""


class StepSizeUnderflow(IntegrationError):
    """The controller cannot meet the tolerance with a representable step."""


class NonFinite(IntegrationError):
    """The state left the finite range."""


class NoConvergence(IntegrationError):
    """t_end was reached before the settling criterion was met."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and horizons, in units of 1/gamma_10.

    max_step is the stiffness fallback: cap it when the controller chatters
    near the stability boundary.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    t_end: float = 1e4
    convergence_window: float = 50.0
    convergence_eps: float = 1e-9

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1e-3:
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol}")
        if self.abs_tol <= 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.max_step <= 0.0:
            raise ValueError(f"max_step must be > 0, got {self.max_step}")
        if self.convergence_window <= 0.0:
            raise ValueError(f"convergence_window must be > 0, got {self.convergence_window}")
        if self.convergence_eps <= 0.0:
            raise ValueError(f"convergence_eps must be > 0, got {self.convergence_eps}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times[i] belongs to values[i] = (n, x, rho11, rho00)."""

    times: np.ndarray
    values: np.ndarray

    @property
    def states(self) -> list[LaserState]:
        return [self.state(i) for i in range(len(self.times))]

    def state(self, i: int) -> LaserState:
        n, x, r11, r00 = self.values[i]
        return LaserState(photons=n, polarization=x, pop0=r00, pop1=r11,
                          pop2=1.0 - r00 - r11)

    def trace_drift(self) -> float:
        """Worst deviation of the reconstructed population sum from 1."""
        r11 = self.values[:, 2]
        r00 = self.values[:, 3]
        return float(np.max(np.abs(r00 + r11 + (1.0 - r00 - r11) - 1.0)))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class SettleResult:
    state: LaserState
    time: float
    converged: bool
    windows: int = field(default=0)


def rhs(s: LaserState, p: PhysicalParams) -> tuple[float, float, float, float]:
    """Time derivatives (dn, dx, drho11, drho00); rho22 enters via the trace."""
    r22 = 1.0 - s.pop0 - s.pop1
    gp = 0.5 * (p.gamma_10 + p.gamma_02 + p.gamma_col)
    dn = -2.0 * p.cavity_decay * s.photons + p.n_atoms * p.coupling * s.polarization
    dx = (-gp * s.polarization
          + 2.0 * p.coupling * ((s.photons + 1.0) * s.pop1 - s.photons * s.pop0))
    dr11 = -p.gamma_10 * s.pop1 + p.gamma_21 * r22 - p.coupling * s.polarization
    dr00 = -p.gamma_02 * s.pop0 + p.gamma_10 * s.pop1 + p.coupling * s.polarization
    return dn, dx, dr11, dr00


def default_initial_state(scheme: Scheme) -> LaserState:
    """Turn-on state: no field, all population in the pump-entry ground level."""
    if scheme is Scheme.LAMBDA:
        return LaserState(photons=0.0, polarization=0.0, pop0=0.0, pop1=0.0, pop2=1.0)
    return LaserState(photons=0.0, polarization=0.0, pop0=1.0, pop1=0.0, pop2=0.0)


def _rates(p: PhysicalParams) -> tuple[float, ...]:
    # Internal time unit is 1/gamma_10, so every rate is divided by gamma_10;
    # horizons and windows in IntegratorSettings are gamma_10 times.
    g10 = p.gamma_10
    return (p.n_atoms, p.coupling / g10, p.cavity_decay / g10, 1.0,
            p.gamma_21 / g10, p.gamma_02 / g10, p.gamma_col / g10)


def _pack(init: LaserState) -> np.ndarray:
    if not init.is_physical(tol=1e-9):
        raise ValueError(f"initial state is not physical: {init}")
    return np.array([init.photons, init.polarization, init.pop1, init.pop0],
                    dtype=np.float64)


def _unpack(y: np.ndarray) -> LaserState:
    return LaserState(photons=float(y[0]), polarization=float(y[1]),
                      pop0=float(y[3]), pop1=float(y[2]),
                      pop2=float(1.0 - y[3] - y[2]))


def _raise_for_status(status: int, t: float) -> None:
    if status == _rk.STEP_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t={t:.6g}/gamma_10; "
                                "the problem is stiffer than the configuration allows")
    if status == _rk.NON_FINITE:
        raise NonFinite(f"state left the finite range at t={t:.6g}/gamma_10")


def integrate(init: LaserState, p: PhysicalParams,
              cfg: IntegratorSettings | None = None,
              samples: int = 512, t_end: float | None = None) -> Trajectory:
    """Adaptive integration over [0, t_end] sampled at uniformly spaced times."""
    cfg = cfg or IntegratorSettings()
    if samples < 2:
        raise ValueError("samples must be >= 2")
    horizon = cfg.t_end if t_end is None else t_end
    if horizon <= 0.0:
        raise ValueError(f"t_end must be > 0, got {horizon}")
    y = _pack(init)
    ts = np.linspace(0.0, horizon, samples)
    ys = np.empty((samples, 4), dtype=np.float64)
    status, t, _, _, _ = _rk.advance(y, 0.0, horizon, *_rates(p),
                                     cfg.rel_tol, cfg.abs_tol, cfg.max_step, 0.0,
                                     ts, ys)
    _raise_for_status(status, t)
    return Trajectory(times=ts, values=ys)


def _window_change(y_prev: np.ndarray, y_now: np.ndarray) -> float:
    """State change in the settling norm: relative for n and x, absolute for rhos."""
    dn = abs(y_now[0] - y_prev[0]) / max(1.0, abs(y_now[0]))
    dx = abs(y_now[1] - y_prev[1]) / max(1.0, abs(y_now[1]))
    return max(dn, dx, abs(y_now[2] - y_prev[2]), abs(y_now[3] - y_prev[3]))


def settle(init: LaserState, p: PhysicalParams,
           cfg: IntegratorSettings | None = None) -> SettleResult:
    """Integrate window by window until the state stops changing.

    The criterion is a change smaller than convergence_eps across one full
    convergence_window.  Returns the final state either way; converged tells
    whether the criterion was met before t_end.
    """
    cfg = cfg or IntegratorSettings()
    y = _pack(init)
    rates = _rates(p)
    t = 0.0
    h = 0.0
    windows = 0
    y_prev = y.copy()
    while t < cfg.t_end:
        t_next = min(t + cfg.convergence_window, cfg.t_end)
        chunk = t_next - t
        status, t_reached, h, _, _ = _rk.advance_plain(
            y, t, t_next, rates, cfg.rel_tol, cfg.abs_tol, cfg.max_step, h)
        _raise_for_status(status, t_reached)
        t = t_next
        windows += 1
        # A trailing chunk shorter than one window cannot certify convergence.
        if (chunk >= cfg.convergence_window * (1.0 - 1e-12)
                and _window_change(y_prev, y) < cfg.convergence_eps):
            return SettleResult(state=_unpack(y), time=t, converged=True, windows=windows)
        y_prev[:] = y
    return SettleResult(state=_unpack(y), time=t, converged=False, windows=windows)


def relax_to_steady(init: LaserState, p: PhysicalParams,
                    cfg: IntegratorSettings | None = None) -> LaserState:
    """Settled state; raises NoConvergence when t_end arrives first."""
    cfg = cfg or IntegratorSettings()
    result = settle(init, p, cfg)
    if not result.converged:
        raise NoConvergence(
            f"no steady state within t_end={cfg.t_end:.6g}/gamma_10 "
            f"(change criterion {cfg.convergence_eps:g} over window "
            f"{cfg.convergence_window:g} not met)")
    return result.state
