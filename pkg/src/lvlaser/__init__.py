"""Three-level lambda/V laser toolkit: steady states, dynamics, critical points, sweeps."""

from .model import (
    DimensionlessParams,
    LaserState,
    PhysicalParams,
    Scheme,
    SteadyState,
    b_standard,
    bc_coefficients,
    gamma_perp,
    gamma_perp_ratio,
    nondimensionalize,
    photon_steady,
    steady_populations,
    steady_state_full,
    to_physical,
)
from .dynamics import (
    IntegrationError,
    IntegratorSettings,
    NoConvergence,
    NonFinite,
    SettleResult,
    StepSizeUnderflow,
    Trajectory,
    default_initial_state,
    integrate,
    relax_to_steady,
    rhs,
    settle,
)
from .analysis import (
    EmptyWindowError,
    NoLasingError,
    Regime,
    SweepRow,
    SweepTable,
    ThresholdReport,
    beta_factor,
    beta_min,
    classify_regime,
    default_grid,
    detect_kinks,
    lambda_report,
    lambda_threshold,
    make_grid,
    n_saturation,
    s_max_lambda,
    sweep,
    v_reports,
    v_thresholds_approx,
    v_thresholds_exact,
)

__version__ = "0.1.0"
