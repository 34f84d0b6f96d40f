import math

import numpy as np
import pytest

from lvlaser import _rk
from lvlaser.dynamics import (
    IntegratorSettings,
    NoConvergence,
    NonFinite,
    StepSizeUnderflow,
    default_initial_state,
    integrate,
    relax_to_steady,
    rhs,
    settle,
)
from lvlaser.model import (
    DimensionlessParams,
    LaserState,
    PhysicalParams,
    Scheme,
    photon_steady,
    steady_state_full,
    to_physical,
)

FAST = IntegratorSettings(rel_tol=1e-10, abs_tol=1e-12)


def embed(lam, sat, alpha1, alpha2, eta=0.0):
    d = DimensionlessParams(lam=lam, sat=sat, alpha1=alpha1, alpha2=alpha2, eta=eta)
    return d, to_physical(d)


class TestRhs:
    def test_ground_state_pump_only(self):
        p = PhysicalParams(n_atoms=100, coupling=1, cavity_decay=50, gamma_10=2,
                           gamma_21=6, gamma_02=8)
        s = LaserState(photons=0, polarization=0, pop0=0, pop1=0, pop2=1)
        assert rhs(s, p) == (0.0, 0.0, 6.0, 0.0)

    def test_spontaneous_seed(self):
        # with the field empty, an excited atom still radiates into the mode:
        # dx = 2*g*(n+1)*rho11 = 2*g at n=0, rho11=1
        p = PhysicalParams(n_atoms=10, coupling=0.7, cavity_decay=1, gamma_10=1)
        s = LaserState(photons=0, polarization=0, pop0=0, pop1=1, pop2=0)
        dn, dx, dr11, dr00 = rhs(s, p)
        assert dx == pytest.approx(2 * 0.7)
        assert dn == 0.0
        assert dr11 == pytest.approx(-1.0)
        assert dr00 == pytest.approx(1.0)

    def test_vanishes_at_closed_form_steady_state(self):
        for lam, sat, a1, a2, eta in [(100, 1, 1, 10, 0), (50, 5, 0.3, 4, 2),
                                      (1000, 20, 8, 40, 1)]:
            d, p = embed(lam, sat, a1, a2, eta)
            st = steady_state_full(d).state
            assert max(abs(v) for v in rhs(st, p)) < 1e-9


class TestIntegrate:
    def test_validation(self):
        _, p = embed(100, 1, 1, 10)
        init = default_initial_state(Scheme.LAMBDA)
        with pytest.raises(ValueError):
            integrate(init, p, FAST, samples=1)
        with pytest.raises(ValueError):
            integrate(init, p, FAST, t_end=0.0)
        bad = LaserState(photons=-1, polarization=0, pop0=0, pop1=0, pop2=1)
        with pytest.raises(ValueError):
            integrate(bad, p, FAST)
        with pytest.raises(ValueError):
            IntegratorSettings(rel_tol=1e-2)
        with pytest.raises(ValueError):
            IntegratorSettings(abs_tol=0.0)
        with pytest.raises(ValueError):
            IntegratorSettings(t_end=-1.0)

    def test_below_threshold_reaches_closed_form(self):
        # small spontaneous-emission-sustained photon number
        d, p = embed(100, 5, 0.001, 10)
        traj = integrate(default_initial_state(Scheme.LAMBDA), p, FAST, t_end=2000.0)
        n_end = traj.values[-1, 0]
        n_ref = photon_steady(d)
        assert n_ref < 1.0
        assert n_end == pytest.approx(n_ref, rel=1e-6)

    def test_steady_state_is_a_fixed_point(self):
        d, p = embed(100, 1, 1, 10)
        st = steady_state_full(d).state
        traj = integrate(st, p, FAST, t_end=200.0)
        ref = np.array([st.photons, st.polarization, st.pop1, st.pop0])
        scale = np.maximum(1.0, np.abs(ref))
        dev = np.max(np.abs(traj.values - ref) / scale)
        assert dev < 1e-8

    def test_trace_is_conserved(self):
        for lam, sat, a1, a2, eta in [(100, 1, 1, 10, 0), (1e4, 100, 5, 50, 3)]:
            d, p = embed(lam, sat, a1, a2, eta)
            traj = integrate(default_initial_state(Scheme.LAMBDA), p, FAST, t_end=1e4)
            assert traj.trace_drift() < 1e-9

    def test_sampling_contract(self):
        _, p = embed(100, 1, 1, 10)
        traj = integrate(default_initial_state(Scheme.LAMBDA), p, FAST,
                         samples=257, t_end=100.0)
        assert len(traj) == 257
        assert traj.times[0] == 0.0
        assert traj.times[-1] == 100.0
        assert np.all(np.diff(traj.times) > 0)
        assert traj.state(0).pop2 == 1.0

    def test_deterministic(self):
        _, p = embed(300, 2, 0.5, 20, 1)
        a = integrate(default_initial_state(Scheme.LAMBDA), p, FAST, t_end=500.0)
        b = integrate(default_initial_state(Scheme.LAMBDA), p, FAST, t_end=500.0)
        assert np.array_equal(a.values, b.values)

    def test_states_stay_physical(self, rng):
        for _ in range(10):
            lam = 10.0 ** rng.uniform(1, 3)
            a2 = 10.0 ** rng.uniform(np.log10(1.5), 2)
            a1 = 10.0 ** rng.uniform(-2, 2)
            sat = rng.uniform(0.1, 5.0)
            _, p = embed(lam, sat, a1, a2, rng.uniform(0, 5))
            traj = integrate(default_initial_state(Scheme.LAMBDA), p, FAST,
                             t_end=300.0)
            pops = np.concatenate([traj.values[:, 2], traj.values[:, 3],
                                   1.0 - traj.values[:, 2] - traj.values[:, 3]])
            assert np.all(pops > -1e-9) and np.all(pops < 1.0 + 1e-9)
            assert np.all(traj.values[:, 0] > -FAST.abs_tol)


class TestRelaxToSteady:
    def test_above_threshold_matches_closed_form(self):
        d, p = embed(100, 1, 1, 10)
        st = relax_to_steady(default_initial_state(Scheme.LAMBDA), p, FAST)
        assert st.photons == pytest.approx(photon_steady(d), rel=1e-6)

    def test_v_breakdown_dark_inverted_state(self):
        # far past the breakdown pump the medium is transparent: few photons,
        # population parked in the upper lasing level
        from lvlaser.analysis import v_thresholds_exact

        d0 = DimensionlessParams(lam=1e4, sat=1.0, alpha1=200.0, alpha2=1.0)
        _, p2max = v_thresholds_exact(d0)
        d, p = embed(1e4, 1.0, 200.0, 4.0 * p2max)
        st = relax_to_steady(default_initial_state(Scheme.V), p, FAST)
        assert st.photons < 1.0
        assert abs(st.inversion() - 1.0) < 0.02
        assert st.photons == pytest.approx(photon_steady(d), rel=1e-6)

    def test_zero_gain_decays_to_dark_state(self):
        d, p = embed(100, 2, 0.0, 3)
        st = relax_to_steady(default_initial_state(Scheme.LAMBDA), p, FAST)
        assert st.photons == pytest.approx(0.0, abs=1e-9)
        assert st.pop2 == pytest.approx(1.0, abs=1e-9)

    def test_no_convergence_when_horizon_too_short(self):
        _, p = embed(100, 1, 1, 10)
        short = IntegratorSettings(t_end=20.0, convergence_window=50.0)
        with pytest.raises(NoConvergence):
            relax_to_steady(default_initial_state(Scheme.LAMBDA), p, short)

    def test_settle_reports_convergence_time(self):
        _, p = embed(100, 1, 1, 10)
        res = settle(default_initial_state(Scheme.LAMBDA), p, FAST)
        assert res.converged
        assert res.time == res.windows * FAST.convergence_window

    def test_attractor_independent_of_seed(self):
        d, p = embed(200, 3, 2, 15, 1)
        seeds = [
            default_initial_state(Scheme.LAMBDA),
            default_initial_state(Scheme.V),
            LaserState(photons=5.0, polarization=0.0, pop0=1 / 3, pop1=1 / 3,
                       pop2=1 / 3),
        ]
        photons = [relax_to_steady(s, p, FAST).photons for s in seeds]
        ref = photon_steady(d)
        for n in photons:
            assert n == pytest.approx(ref, rel=1e-6)

    def test_refinement_under_tolerance_halving(self):
        # fixed horizon past the transient: the endpoint must move by less
        # than the looser local tolerance when both tolerances are halved
        _, p = embed(100, 1, 1, 10)
        loose = IntegratorSettings(rel_tol=1e-8, abs_tol=1e-10)
        tight = IntegratorSettings(rel_tol=5e-9, abs_tol=5e-11)
        init = default_initial_state(Scheme.LAMBDA)
        a = integrate(init, p, loose, t_end=500.0).values[-1]
        b = integrate(init, p, tight, t_end=500.0).values[-1]
        scale = np.maximum(1.0, np.abs(b))
        assert np.max(np.abs(a - b) / scale) < 10.0 * loose.rel_tol

    def test_loose_tolerance_cannot_certify_tight_window(self):
        # integration noise at rel_tol=1e-8 exceeds the 1e-9 window
        # criterion, so settling must honestly report no convergence
        _, p = embed(100, 1, 1, 10)
        loose = IntegratorSettings(rel_tol=1e-8, abs_tol=1e-10, t_end=2000.0)
        res = settle(default_initial_state(Scheme.LAMBDA), p, loose)
        assert not res.converged


class TestKernelFailureModes:
    RATES = (200.0, 0.5, 1.0, 1.0, 1.0, 10.0, 0.0)

    def test_step_underflow_far_from_origin(self):
        # a positive span below the representable step at t ~ 1e16 is refused
        y = np.array([1.0, 0.0, 0.1, 0.1])
        status, *_ = _rk.advance_plain(y, 1e16, 1e16 + 4.0, self.RATES,
                                       1e-10, 1e-12, math.inf)
        assert status == _rk.STEP_UNDERFLOW

    def test_zero_span_is_a_no_op(self):
        y = np.array([1.0, 0.0, 0.1, 0.1])
        status, t, *_ = _rk.advance_plain(y, 5.0, 5.0, self.RATES,
                                          1e-10, 1e-12, math.inf)
        assert status == _rk.OK and t == 5.0

    def test_non_finite_state_detected(self):
        y = np.array([1e308, 1e308, 0.5, 0.5])
        status, *_ = _rk.advance_plain(y, 0.0, 10.0, self.RATES,
                                       1e-10, 1e-12, math.inf)
        assert status == _rk.NON_FINITE

    def test_exceptions_carry_diagnostics(self):
        _, p = embed(100, 1, 1, 10)
        short = IntegratorSettings(t_end=20.0, convergence_window=50.0)
        with pytest.raises(NoConvergence, match="t_end"):
            relax_to_steady(default_initial_state(Scheme.LAMBDA), p, short)
        assert issubclass(StepSizeUnderflow, RuntimeError)
        assert issubclass(NonFinite, RuntimeError)
