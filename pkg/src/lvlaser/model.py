"""Core types and closed-form steady-state algebra of a closed three-level laser.

The medium is a closed three-level system with a single lasing transition
|1> -> |0>, cavity decay kappa, and incoherent rates gamma_10 (lasing decay),
gamma_21 (|2> -> |1>), gamma_02 (|0> -> |2>) and gamma_col (collisional
dephasing).  The field equation carries the (n + 1) stimulated-plus-spontaneous
factor, so the photon number never vanishes identically.

Everything downstream works in the reduced parameterization

    lam    = N * gamma_10 / (2 * kappa)
    sat    = gamma_10**2 / (4 * g**2)
    alpha1 = gamma_21 / gamma_10        (lambda-scheme pump parameter P1)
    alpha2 = gamma_02 / gamma_10        (V-scheme pump parameter P2)
    eta    = gamma_col / gamma_10

with time in units of 1/gamma_10.  The steady-state photon number is the
nonnegative root of n**2 - b*n - c = 0, see :func:`bc_coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "PhysicalParams",
    "DimensionlessParams",
    "Scheme",
    "LaserState",
    "SteadyState",
    "nondimensionalize",
    "to_physical",
    "gamma_perp",
    "gamma_perp_ratio",
    "bc_coefficients",
    "b_standard",
    "photon_steady",
    "steady_populations",
    "steady_state_full",
]

# Population window accepted as "physical" before clamping; see steady_state_full.
POP_TOL = 1e-12
# Base absolute residual tolerance for the physicality flag, in gamma_10 units.
RESIDUAL_TOL = 1e-9


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Raw rates and atom count defining one laser instance.

    All rates share one unit of inverse time.  gamma_10 must be positive: it
    is the unit rate of the reduced parameterization.
    """

    n_atoms: float
    coupling: float
    cavity_decay: float
    gamma_10: float
    gamma_21: float = 0.0
    gamma_02: float = 0.0
    gamma_col: float = 0.0

    def __post_init__(self) -> None:
        for name in ("n_atoms", "coupling", "cavity_decay", "gamma_10",
                     "gamma_21", "gamma_02", "gamma_col"):
            _require_finite(name, getattr(self, name))
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.coupling <= 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.cavity_decay <= 0:
            raise ValueError(f"cavity_decay must be > 0, got {self.cavity_decay}")
        if self.gamma_10 <= 0:
            raise ValueError(f"gamma_10 must be > 0, got {self.gamma_10}")
        for name in ("gamma_21", "gamma_02", "gamma_col"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class DimensionlessParams:
    """Reduced parameters (lam, sat, alpha1, alpha2, eta).

    lam = 0 is admitted (no active atoms) so that the closed-form operations
    cover their degenerate limits; dynamics requires lam > 0.
    """

    lam: float
    sat: float
    alpha1: float
    alpha2: float
    eta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("lam", "sat", "alpha1", "alpha2", "eta"):
            _require_finite(name, getattr(self, name))
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


class Scheme(str, Enum):
    """Pumping configuration: which incoherent rate acts as the pump."""

    LAMBDA = "lambda"
    V = "v"

    @property
    def pump_field(self) -> str:
        """Name of the DimensionlessParams field swept by the pump."""
        return "alpha1" if self is Scheme.LAMBDA else "alpha2"


@dataclass(frozen=True)
class LaserState:
    """Dynamical variables: photon number, real polarization, populations."""

    photons: float
    polarization: float
    pop0: float
    pop1: float
    pop2: float

    def trace(self) -> float:
        return self.pop0 + self.pop1 + self.pop2

    def inversion(self) -> float:
        """Population difference D between the lasing levels."""
        return self.pop1 - self.pop0

    def is_physical(self, tol: float = 1e-9) -> bool:
        pops_ok = all(-tol <= p <= 1.0 + tol for p in (self.pop0, self.pop1, self.pop2))
        return (pops_ok and abs(self.trace() - 1.0) <= tol
                and self.photons >= -tol and math.isfinite(self.polarization))


def nondimensionalize(p: PhysicalParams) -> DimensionlessParams:
    """Map raw rates to the reduced parameters (scale invariant)."""
    return DimensionlessParams(
        lam=p.n_atoms * p.gamma_10 / (2.0 * p.cavity_decay),
        sat=p.gamma_10 ** 2 / (4.0 * p.coupling ** 2),
        alpha1=p.gamma_21 / p.gamma_10,
        alpha2=p.gamma_02 / p.gamma_10,
        eta=p.gamma_col / p.gamma_10,
    )


def to_physical(d: DimensionlessParams, gamma_10: float = 1.0,
                cavity_decay: float | None = None) -> PhysicalParams:
    """Embed reduced parameters back into raw rates.

    The reduced set leaves one rate free; by default the cavity decay is set
    equal to gamma_10.  Requires sat > 0 (an infinitely strong coupling has
    no finite rate representation) and lam large enough that n_atoms >= 1.
    """
    if cavity_decay is None:
        cavity_decay = gamma_10
    if d.sat <= 0:
        raise ValueError("sat must be > 0 to recover a finite coupling rate")
    n_atoms = 2.0 * d.lam * cavity_decay / gamma_10
    if n_atoms < 1:
        raise ValueError(
            f"lam={d.lam} with cavity_decay={cavity_decay} implies n_atoms={n_atoms} < 1; "
            "raise cavity_decay")
    return PhysicalParams(
        n_atoms=n_atoms,
        coupling=gamma_10 / (2.0 * math.sqrt(d.sat)),
        cavity_decay=cavity_decay,
        gamma_10=gamma_10,
        gamma_21=d.alpha1 * gamma_10,
        gamma_02=d.alpha2 * gamma_10,
        gamma_col=d.eta * gamma_10,
    )


def gamma_perp(p: PhysicalParams) -> float:
    """Transversal (coherence) relaxation rate (gamma_10 + gamma_02 + gamma_col) / 2."""
    return 0.5 * (p.gamma_10 + p.gamma_02 + p.gamma_col)


def gamma_perp_ratio(d: DimensionlessParams) -> float:
    """gamma_perp in units of gamma_10: (1 + alpha2 + eta) / 2."""
    return 0.5 * (1.0 + d.alpha2 + d.eta)


def _pump_graph(d: DimensionlessParams) -> tuple[float, float]:
    """Shared denominators (alpha2 + 2*alpha1, alpha1*alpha2 + alpha1 + alpha2)."""
    den = d.alpha2 + 2.0 * d.alpha1
    if den == 0.0:
        raise ValueError("alpha1 = alpha2 = 0: no pumping path exists")
    q = d.alpha1 * d.alpha2 + d.alpha1 + d.alpha2
    return den, q


def bc_coefficients(d: DimensionlessParams) -> tuple[float, float]:
    """Coefficients of the steady-state quadratic n**2 - b*n - c = 0.

    b carries the net linear gain minus coherence losses minus the
    one-photon spontaneous offset; c is the pure spontaneous-emission
    source and is always >= 0.
    """
    den, q = _pump_graph(d)
    b = (d.lam * d.alpha1 * (d.alpha2 - 1.0)
         - d.sat * (d.alpha2 + 1.0 + d.eta) * q
         - d.alpha1 - d.alpha2) / den
    c = d.lam * d.alpha1 * d.alpha2 / den
    return b, c


def b_standard(d: DimensionlessParams) -> float:
    """Linear gain coefficient of the standard (no spontaneous term) equations.

    Equal to bc_coefficients(d)[0] + (alpha1 + alpha2)/(alpha2 + 2*alpha1).
    Lasing in the standard description means b_standard > 0; its zeros in the
    pump parameter are the exact threshold / breakdown points.
    """
    den, q = _pump_graph(d)
    return (d.lam * d.alpha1 * (d.alpha2 - 1.0)
            - d.sat * (d.alpha2 + 1.0 + d.eta) * q) / den


def _positive_root(b: float, c: float) -> float:
    """Nonnegative root of n**2 - b*n - c = 0, stable for large negative b."""
    disc = math.sqrt(b * b + 4.0 * c)
    if b < 0.0:
        # (b + disc) cancels catastrophically when 4c << b**2; use the
        # conjugate form instead.
        return 2.0 * c / (disc - b)
    return 0.5 * (b + disc)


def photon_steady(d: DimensionlessParams) -> float:
    """Closed-form steady-state photon number, always >= 0."""
    b, c = bc_coefficients(d)
    return _positive_root(b, c)


def steady_populations(d: DimensionlessParams, n: float) -> tuple[float, float, float, float]:
    """Back-substitute a photon number into the population/polarization balance.

    Returns (x, rho00, rho11, rho22).  rho22 is completed from the trace so
    the population sum is exact.  The polarization uses x = 2*sqrt(sat)*n/lam,
    which stays finite (-> 0) in the strong-coupling limit sat -> 0.
    """
    if d.lam <= 0.0:
        # The back-substitution eliminates the polarization through the field
        # balance, which needs active atoms; the quadratic itself (n = 0 via
        # c = 0) still covers lam = 0.
        raise ValueError("steady populations require lam > 0")
    den, q = _pump_graph(d)
    n_over_lam = n / d.lam
    x = 2.0 * math.sqrt(d.sat) * n / d.lam
    u = 1.0 + n_over_lam
    rho00 = d.alpha1 * u / q
    rho11 = d.alpha1 * d.alpha2 * u / q - n_over_lam
    rho22 = 1.0 - rho00 - rho11
    return x, rho00, rho11, rho22


@dataclass(frozen=True)
class SteadyState:
    """Closed-form steady state with its physicality verdict.

    physical is False for a spurious branch: a root whose back-substituted
    populations leave [0, 1] (beyond POP_TOL) or whose balance residual is
    inconsistent with rounding.  max_residual is the max-norm of the
    stationarity residuals in gamma_10 units (the polarization equation is
    checked in its coupling-regularized form so that sat = 0 is covered).
    """

    state: LaserState
    physical: bool
    max_residual: float


def _steady_residual(d: DimensionlessParams, n: float, rho00: float,
                     rho11: float, rho22: float) -> float:
    """Max-norm stationarity residual of the balance equations at (n, rhos)."""
    gx = n / d.lam
    r_field = 2.0 * (d.lam * gx - n)
    r_upper = -rho11 + d.alpha1 * rho22 - gx
    r_lower = -d.alpha2 * rho00 + rho11 + gx
    # Polarization balance multiplied by sqrt(sat)/gamma_10, regular at sat = 0.
    r_pol = (n + 1.0) * rho11 - n * rho00 - 2.0 * d.sat * gamma_perp_ratio(d) * gx
    return max(abs(r_field), abs(r_upper), abs(r_lower), abs(r_pol))


def steady_state_full(d: DimensionlessParams,
                      p: PhysicalParams | None = None) -> SteadyState:
    """Full closed-form steady state with populations and physicality flag.

    When p is given it must nondimensionalize to d (it only pins the unit
    system; the state itself is embedding independent).
    """
    if p is not None:
        dd = nondimensionalize(p)
        for name in ("lam", "sat", "alpha1", "alpha2", "eta"):
            a, b = getattr(dd, name), getattr(d, name)
            if abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
                raise ValueError(f"physical parameters disagree with {name}={b} (got {a})")
    n = photon_steady(d)
    x, rho00, rho11, rho22 = steady_populations(d, n)
    residual = _steady_residual(d, n, rho00, rho11, rho22)
    # rho11 is a difference of two terms of size ~n/lam, so the polarization
    # balance carries ~n*ulp(n/lam) rounding; widen the gate accordingly.
    tol = RESIDUAL_TOL + 64.0 * (1.0 + n) * math.ulp(1.0 + n / d.lam)
    in_range = all(-POP_TOL <= r <= 1.0 + POP_TOL for r in (rho00, rho11, rho22))
    physical = bool(in_range and n >= 0.0 and residual <= tol)
    clamp = (lambda r: min(1.0, max(0.0, r))) if in_range else (lambda r: r)
    state = LaserState(photons=n, polarization=x, pop0=clamp(rho00),
                       pop1=clamp(rho11), pop2=clamp(rho22))
    return SteadyState(state=state, physical=physical, max_residual=residual)
