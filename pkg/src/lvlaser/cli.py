"""Command-line front end: steady, sweep, thresholds, integrate.

Configuration comes from an optional flat key=value file plus flags that
override file values.  Exit codes: 0 ok, 2 config error, 3 no-lasing or
spurious result, 4 output I/O failure, 5 integration failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from typing import Any, Sequence

from . import analysis, dynamics, model
from .analysis import NoLasingError, Regime
from .dynamics import IntegrationError, IntegratorSettings
from .model import DimensionlessParams, LaserState, PhysicalParams, Scheme

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_LASING = 3
EXIT_IO = 4
EXIT_INTEGRATION = 5

_DIMENSIONLESS_KEYS = ("lam", "sat", "alpha1", "alpha2", "eta")
_PHYSICAL_KEYS = ("n_atoms", "coupling", "cavity_decay", "gamma_10",
                  "gamma_21", "gamma_02", "gamma_col")
_FLOAT_KEYS = _DIMENSIONLESS_KEYS + _PHYSICAL_KEYS + (
    "grid_from", "grid_to", "rel_tol", "abs_tol", "max_step", "t_end",
    "convergence_window", "convergence_eps")
_INT_KEYS = ("grid_points", "samples")
_CHOICE_KEYS = {"scheme": ("lambda", "v"), "grid_spacing": ("log", "linear")}
_LIST_KEYS = ("sat_list", "init")
_ALL_KEYS = _FLOAT_KEYS + _INT_KEYS + tuple(_CHOICE_KEYS) + _LIST_KEYS


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _parse_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r}: {exc}") from exc
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in _ALL_KEYS:
            raise ConfigError("config", f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, text, where=f"{path}:{lineno}")
    return values


def _coerce(key: str, text: str, where: str) -> Any:
    try:
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _INT_KEYS:
            return int(text)
        if key in _LIST_KEYS:
            return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(key, f"{where}: {exc}") from exc
    if key in _CHOICE_KEYS:
        if text not in _CHOICE_KEYS[key]:
            raise ConfigError(key, f"{where}: must be one of {_CHOICE_KEYS[key]}")
        return text
    raise ConfigError(key, f"{where}: unknown key")


class RunConfig:
    """Merged file + flag configuration with per-command validation."""

    def __init__(self, values: dict[str, Any]):
        self.values = values

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values: dict[str, Any] = {}
        if args.config:
            values.update(_parse_config_file(args.config))
        for key in _ALL_KEYS:
            flag = getattr(args, key, None)
            if flag is not None:
                if key in _LIST_KEYS and isinstance(flag, str):
                    flag = _coerce(key, flag, where=f"--{key.replace('_', '-')}")
                values[key] = flag
        return cls(values)

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.values:
            raise ConfigError(key, "required value is missing")
        return self.values[key]

    @property
    def scheme(self) -> Scheme:
        return Scheme(self.require("scheme"))

    def _mode(self) -> str:
        has_dim = any(k in self.values for k in _DIMENSIONLESS_KEYS)
        has_phys = any(k in self.values for k in _PHYSICAL_KEYS)
        if has_dim and has_phys:
            raise ConfigError("parameters", "give either a dimensionless block "
                              "(lam, sat, alpha1, alpha2, eta) or a physical block "
                              "(n_atoms, coupling, cavity_decay, gamma_10, ...), not both")
        if not has_dim and not has_phys:
            raise ConfigError("parameters", "no laser parameters given; provide a "
                              "dimensionless or a physical block")
        return "dimensionless" if has_dim else "physical"

    def physical_params(self) -> PhysicalParams:
        kwargs = {}
        for key in ("n_atoms", "coupling", "cavity_decay", "gamma_10"):
            kwargs[key] = self.require(key)
        for key in ("gamma_21", "gamma_02", "gamma_col"):
            kwargs[key] = self.get(key, 0.0)
        try:
            return PhysicalParams(**kwargs)
        except ValueError as exc:
            raise ConfigError("parameters", str(exc)) from exc

    def dimensionless(self, required: Sequence[str] = ()) -> DimensionlessParams:
        """Reduced parameters; missing non-required pump slots default to 1."""
        if self._mode() == "physical":
            return model.nondimensionalize(self.physical_params())
        kwargs = {}
        for key in _DIMENSIONLESS_KEYS:
            if key in required:
                kwargs[key] = self.require(key)
            elif key == "eta":
                kwargs[key] = self.get(key, 0.0)
            else:
                kwargs[key] = self.get(key, 1.0)
        try:
            return DimensionlessParams(**kwargs)
        except ValueError as exc:
            raise ConfigError("parameters", str(exc)) from exc

    def physical_for_dynamics(self) -> PhysicalParams:
        if self._mode() == "physical":
            return self.physical_params()
        d = self.dimensionless(required=("lam", "sat", "alpha1", "alpha2"))
        try:
            return model.to_physical(d)
        except ValueError as exc:
            raise ConfigError("parameters", str(exc)) from exc

    def integrator_settings(self) -> IntegratorSettings:
        kwargs = {}
        for key in ("rel_tol", "abs_tol", "max_step", "t_end",
                    "convergence_window", "convergence_eps"):
            if key in self.values:
                kwargs[key] = self.values[key]
        try:
            return IntegratorSettings(**kwargs)
        except ValueError as exc:
            raise ConfigError("integrator", str(exc)) from exc

    def grid(self, scheme: Scheme, d: DimensionlessParams):
        lo = self.get("grid_from")
        hi = self.get("grid_to")
        points = self.get("grid_points", 200)
        spacing = self.get("grid_spacing", "log")
        if points < 2:
            raise ConfigError("grid_points", "grid needs at least 2 points")
        if (lo is None) != (hi is None):
            raise ConfigError("grid_from", "grid_from and grid_to must be given together")
        try:
            if lo is None:
                return analysis.default_grid(scheme, d, points=points)
            return analysis.make_grid(lo, hi, points, spacing)
        except NoLasingError:
            raise
        except ValueError as exc:
            raise ConfigError("grid_from", str(exc)) from exc

    def initial_state(self, scheme: Scheme) -> LaserState:
        raw = self.get("init")
        if raw is None:
            return dynamics.default_initial_state(scheme)
        if len(raw) != 5:
            raise ConfigError("init", "expected 5 comma-separated values "
                              "n,x,rho00,rho11,rho22")
        state = LaserState(photons=raw[0], polarization=raw[1],
                           pop0=raw[2], pop1=raw[3], pop2=raw[4])
        if not state.is_physical(tol=1e-9):
            raise ConfigError("init", "initial state must be physical "
                              "(populations in [0,1] with unit sum, n >= 0)")
        return state

    def dump(self) -> str:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if key in _LIST_KEYS:
                text = ",".join(repr(float(v)) for v in value)
            elif key in _FLOAT_KEYS:
                text = repr(float(value))
            else:
                text = str(value)
            lines.append(f"{key}={text}")
        return "\n".join(lines) + "\n"


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Regime):
        return value.value
    return str(value)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _report(pairs: list[tuple[str, Any]], fmt: str) -> str:
    if fmt == "csv":
        header = ",".join(k for k, _ in pairs)
        row = ",".join(_fmt(v) for _, v in pairs)
        return f"{header}\n{row}\n"
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in pairs)


def _cmd_steady(cfg: RunConfig, fmt: str, output: str | None) -> int:
    scheme = cfg.scheme
    d = cfg.dimensionless(required=("lam", "sat", "alpha1", "alpha2"))
    ss = model.steady_state_full(d)
    pump = d.alpha1 if scheme is Scheme.LAMBDA else d.alpha2
    regime = analysis.classify_regime(d, scheme, pump)
    st = ss.state
    pairs = [
        ("n", st.photons), ("x", st.polarization),
        ("rho00", st.pop0), ("rho11", st.pop1), ("rho22", st.pop2),
        ("D", st.inversion()), ("beta", analysis.beta_factor(d)),
        ("gamma_perp", model.gamma_perp_ratio(d)),
        ("regime", regime), ("physical", ss.physical),
    ]
    _emit(_report(pairs, fmt), output)
    return EXIT_OK if ss.physical else EXIT_NO_LASING


def _cmd_thresholds(cfg: RunConfig, fmt: str, output: str | None) -> int:
    scheme = cfg.scheme
    if scheme is Scheme.LAMBDA:
        d = cfg.dimensionless(required=("lam", "sat", "alpha2"))
        rep = analysis.lambda_report(d)
        pairs = [
            ("scheme", rep.scheme.value), ("p1_thr", rep.p_thr),
            ("s_max", rep.s_max), ("beta", rep.beta),
            ("beta_min", rep.beta_min), ("method", rep.method),
        ]
    else:
        d = cfg.dimensionless(required=("lam", "sat", "alpha1"))
        exact, approx = analysis.v_reports(d)
        diff_thr = abs(approx.p_thr - exact.p_thr) / exact.p_thr
        diff_max = (abs(approx.p_max - exact.p_max) / exact.p_max
                    if math.isfinite(exact.p_max) else 0.0)
        pairs = [
            ("scheme", exact.scheme.value),
            ("p2_thr_exact", exact.p_thr), ("p2_max_exact", exact.p_max),
            ("p2_thr_approx", approx.p_thr), ("p2_max_approx", approx.p_max),
            ("rel_diff_thr", diff_thr), ("rel_diff_max", diff_max),
            ("beta_at_thr", exact.beta), ("beta_min", exact.beta_min),
        ]
    _emit(_report(pairs, fmt), output)
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, fmt: str, output: str | None) -> int:
    scheme = cfg.scheme
    sat_list = cfg.get("sat_list")
    base_keys = ("lam", "alpha2") if scheme is Scheme.LAMBDA else ("lam", "alpha1")
    required = base_keys if sat_list else base_keys + ("sat",)
    d = cfg.dimensionless(required=required)
    if scheme is Scheme.V and d.alpha1 <= 0.0:
        raise ConfigError("alpha1", "must be > 0 for a V-scheme sweep")
    if not sat_list:
        table = analysis.sweep(d, scheme, cfg.grid(scheme, d))
        _emit(table.to_csv(), output)
        return EXIT_OK
    if output is None:
        raise ConfigError("output", "--sat-list requires --output to name the files")
    stem, ext = os.path.splitext(output)
    ext = ext or ".csv"
    for sat in sat_list:
        try:
            d_s = replace(d, sat=float(sat))
        except ValueError as exc:
            raise ConfigError("sat_list", str(exc)) from exc
        table = analysis.sweep(d_s, scheme, cfg.grid(scheme, d_s))
        _emit(table.to_csv(), f"{stem}_sat{sat:g}{ext}")
    return EXIT_OK


def _cmd_integrate(cfg: RunConfig, fmt: str, output: str | None) -> int:
    scheme = cfg.scheme
    p = cfg.physical_for_dynamics()
    settings = cfg.integrator_settings()
    init = cfg.initial_state(scheme)
    samples = cfg.get("samples", 512)
    if samples < 2:
        raise ConfigError("samples", "need at least 2 output samples")
    result = dynamics.settle(init, p, settings)
    horizon = result.time if result.converged else settings.t_end
    traj = dynamics.integrate(init, p, settings, samples=max(int(samples), 200),
                              t_end=horizon)
    lines = ["t,n,x,rho00,rho11,rho22"]
    for i, t in enumerate(traj.times):
        n, x, r11, r00 = traj.values[i]
        lines.append(",".join(repr(float(v))
                              for v in (t, n, x, r00, r11, 1.0 - r00 - r11)))
    text = "\n".join(lines) + "\n"
    if result.converged:
        text += f"# steady: {lines[-1]}\n"
    _emit(text, output)
    if not result.converged:
        sys.stderr.write(
            f"lvlaser integrate: no steady state within t_end={settings.t_end:g} "
            f"(change over the trailing window stayed above "
            f"{settings.convergence_eps:g})\n")
        return EXIT_INTEGRATION
    return EXIT_OK


_COMMANDS = {
    "steady": _cmd_steady,
    "thresholds": _cmd_thresholds,
    "sweep": _cmd_sweep,
    "integrate": _cmd_integrate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", metavar="PATH", help="flat key=value config file")
    g.add_argument("--output", metavar="PATH", help="write the result here instead of stdout")
    g.add_argument("--format", choices=("text", "csv"), default="text",
                   help="report format for steady/thresholds")
    g.add_argument("--dump-config", action="store_true",
                   help="echo the effective configuration and exit")
    g.add_argument("--scheme", choices=("lambda", "v"))
    for key in _DIMENSIONLESS_KEYS + _PHYSICAL_KEYS:
        g.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    g.add_argument("--from", dest="grid_from", type=float, help="sweep grid start")
    g.add_argument("--to", dest="grid_to", type=float, help="sweep grid end")
    g.add_argument("--points", dest="grid_points", type=int, help="sweep grid size")
    g.add_argument("--spacing", dest="grid_spacing", choices=("log", "linear"))
    g.add_argument("--sat-list", dest="sat_list",
                   help="comma-separated saturation values, one sweep file each")
    for key in ("rel_tol", "abs_tol", "max_step", "t_end",
                "convergence_window", "convergence_eps"):
        g.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    g.add_argument("--samples", dest="samples", type=int,
                   help="trajectory output samples (>= 200 are written)")
    g.add_argument("--init", dest="init",
                   help="initial state as n,x,rho00,rho11,rho22")

    parser = argparse.ArgumentParser(
        prog="lvlaser",
        description="Steady states, thresholds, pump sweeps and time-domain "
                    "integration of three-level lambda/V lasers.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common],
                   help="closed-form steady state at one parameter point")
    sub.add_parser("thresholds", parents=[common],
                   help="critical pump values and beta limits")
    sub.add_parser("sweep", parents=[common],
                   help="steady-state curve along a pump grid (CSV)")
    sub.add_parser("integrate", parents=[common],
                   help="time-domain trajectory from an initial state (CSV)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.dump())
            return EXIT_OK
        if "scheme" not in cfg.values:
            raise ConfigError("scheme", "required value is missing")
        return _COMMANDS[args.command](cfg, args.format, args.output)
    except ConfigError as exc:
        sys.stderr.write(f"lvlaser {args.command}: config error: {exc}\n")
        return EXIT_CONFIG
    except NoLasingError as exc:
        sys.stderr.write(f"lvlaser {args.command}: no lasing: {exc}\n")
        return EXIT_NO_LASING
    except ValueError as exc:
        sys.stderr.write(f"lvlaser {args.command}: invalid parameters: {exc}\n")
        return EXIT_CONFIG
    except IntegrationError as exc:
        sys.stderr.write(f"lvlaser {args.command}: integration failed: {exc}\n")
        return EXIT_INTEGRATION
    except OSError as exc:
        sys.stderr.write(f"lvlaser {args.command}: cannot write output: {exc}\n")
        return EXIT_IO


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
