"""Integrator checks against closed-form oracles and flow-level properties.

On either invariant axis the system is a plain logistic equation, so the
closed-form logistic solution is an oracle independent of the solver:

    x(t) = K / (1 + (K/x0 - 1) * exp(-r t)),  r = rho - alpha,  K = r / beta
"""

import io
import json

import numpy as np
import pytest

from wolbachia.model import DomainError, PopulationState, equilibria
from wolbachia.integrate import (
    CONVERGED,
    REACHED_T_MAX,
    BasinLabel,
    IntegrationOptions,
    Trajectory,
    classify_basin,
    integrate,
)
from wolbachia.threshold import minimal_viable_w


def logistic(x0: float, r: float, capacity: float, t: np.ndarray) -> np.ndarray:
    return capacity / (1.0 + (capacity / x0 - 1.0) * np.exp(-r * t))


class TestLogisticOracle:
    @pytest.mark.parametrize("n0", [10.0, 100.0, 2500.0])
    def test_wild_axis(self, wmelpop, n0):
        p = wmelpop
        opts = IntegrationOptions(t_max=500.0)
        traj = integrate(p, PopulationState(n0, 0.0), opts)
        expected = logistic(n0, p.rho_n - p.alpha_n, p.n_sharp, traj.t)
        assert np.all(traj.states[:, 1] == 0.0)  # the axis is invariant
        err = np.abs(traj.states[:, 0] - expected) / expected
        assert float(err.max()) <= 1e-6

    @pytest.mark.parametrize("w0", [5.0, 300.0, 1500.0])
    def test_infected_axis(self, wmelpop, w0):
        p = wmelpop
        opts = IntegrationOptions(t_max=500.0)
        traj = integrate(p, PopulationState(0.0, w0), opts)
        expected = logistic(w0, p.rho_w - p.alpha_w, p.w_sharp, traj.t)
        assert np.all(traj.states[:, 0] == 0.0)
        err = np.abs(traj.states[:, 1] - expected) / expected
        assert float(err.max()) <= 1e-6
        assert abs(traj.final_state.w - p.w_sharp) < 1e-6 * p.w_sharp


class TestEquilibriumHold:
    def test_saddle_start_stays_put(self, wmelpop):
        # e_c is a saddle: the float-rounding residual (~2e-13) grows like
        # exp(lambda_u * t) with lambda_u ~ 1.15/day, so no implementation can
        # hold a 1e-6*w_sharp ball for 50 days in double precision (measured
        # escape near t ~ 22). 15 days leaves three orders of margin.
        eq = equilibria(wmelpop)
        traj = integrate(wmelpop, eq.e_c, IntegrationOptions(t_max=15.0))
        drift = np.hypot(
            traj.states[:, 0] - eq.e_c.n, traj.states[:, 1] - eq.e_c.w
        )
        assert float(drift.max()) <= 1e-6 * eq.w_sharp


class TestBasinClassification:
    def test_order_interval_below_saddle_goes_wild(self, wmelpop):
        eq = equilibria(wmelpop)
        s0 = PopulationState(0.5 * (eq.e_c.n + eq.n_sharp), 0.5 * eq.e_c.w)
        assert classify_basin(wmelpop, s0) is BasinLabel.TO_EN

    def test_order_interval_above_saddle_goes_infected(self, wmelpop):
        eq = equilibria(wmelpop)
        s0 = PopulationState(0.5 * eq.e_c.n, 0.5 * (eq.e_c.w + eq.w_sharp))
        assert classify_basin(wmelpop, s0) is BasinLabel.TO_EW

    def test_infected_axis_start(self, wmelpop):
        s0 = PopulationState(0.0, wmelpop.w_sharp / 2.0)
        assert classify_basin(wmelpop, s0) is BasinLabel.TO_EW

    def test_capacity_pair_is_below_threshold(self, wmelpop):
        # (n_sharp, w_sharp) sits below the threshold curve: the minimal viable
        # infected size at full wild capacity is ~1.85 n_sharp >> w_sharp.
        p = wmelpop
        threshold = minimal_viable_w(p, p.n_sharp, tol=1e-4)
        assert p.w_sharp < threshold
        s0 = PopulationState(p.n_sharp, p.w_sharp)
        assert classify_basin(p, s0) is BasinLabel.TO_EN


class TestFlowProperties:
    def test_positivity_and_absorbing_box(self, wmelpop, rng):
        p = wmelpop
        opts = IntegrationOptions(t_max=400.0)
        box_hi = np.array([p.n_sharp, p.w_sharp])
        # rel_tol bounds local error; the box pad must cover error accumulated
        # over the whole horizon (axis-hugging entries approach n_sharp from
        # above with ~1e-6 global drift at rel_tol = 1e-9).
        pad = 1.0 + 1e3 * opts.rel_tol
        for _ in range(100):
            s0 = PopulationState(
                rng.uniform(0.0, 3.0 * p.n_sharp), rng.uniform(0.0, 3.0 * p.w_sharp)
            )
            traj = integrate(p, s0, opts)
            assert float(traj.states.min()) >= -opts.abs_tol
            inside = np.all(traj.states <= box_hi * pad, axis=1)
            entered = np.argmax(inside) if inside.any() else None
            assert entered is not None, "trajectory never entered the absorbing box"
            assert bool(inside[entered:].all()), "trajectory left the absorbing box"

    def test_monotone_semiflow_sample(self, wmelpop, rng):
        p = wmelpop
        eps = 1e-6 * max(p.n_sharp, p.w_sharp)
        times = np.linspace(0.0, 120.0, 49)
        for _ in range(40):
            pts = rng.uniform(0.0, 1.0, size=(2, 2)) * (1.5 * p.n_sharp, 1.5 * p.w_sharp)
            lo = PopulationState(pts[:, 0].min(), pts[:, 1].max())
            hi = PopulationState(pts[:, 0].max(), pts[:, 1].min())
            a = integrate(p, lo, IntegrationOptions(t_max=times[-1])).at(times)
            b = integrate(p, hi, IntegrationOptions(t_max=times[-1])).at(times)
            assert np.all(a[:, 0] <= b[:, 0] + eps)
            assert np.all(a[:, 1] >= b[:, 1] - eps)

    def test_tolerance_halving_stability(self, wmelpop):
        p = wmelpop
        s0 = PopulationState(900.0, 500.0)
        coarse = integrate(p, s0, IntegrationOptions(rel_tol=1e-9, t_max=200.0))
        fine = integrate(p, s0, IntegrationOptions(rel_tol=5e-10, t_max=200.0))
        scale = max(p.n_sharp, p.w_sharp)
        diff = np.hypot(
            coarse.final_state.n - fine.final_state.n,
            coarse.final_state.w - fine.final_state.w,
        )
        assert diff <= 10.0 * 1e-9 * scale


class TestTrajectoryApi:
    def test_time_strictly_increasing(self, wmelpop):
        traj = integrate(wmelpop, PopulationState(50.0, 50.0), IntegrationOptions(t_max=100.0))
        assert np.all(np.diff(traj.t) > 0.0)
        assert traj.terminal == REACHED_T_MAX

    def test_capture_reports_attractor(self, wmelpop):
        traj = integrate(
            wmelpop,
            PopulationState(0.0, 300.0),
            capture_radius=1.0,
        )
        assert traj.terminal == CONVERGED
        assert traj.attractor == "e_w"

    def test_start_inside_capture_ball(self, wmelpop):
        eq = equilibria(wmelpop)
        traj = integrate(
            wmelpop,
            PopulationState(eq.n_sharp, 0.0),
            capture_radius=2.0,
        )
        assert traj.terminal == CONVERGED
        assert traj.attractor == "e_n"
        assert len(traj.t) == 1

    def test_dense_output_matches_samples(self, wmelpop):
        traj = integrate(wmelpop, PopulationState(400.0, 200.0), IntegrationOptions(t_max=30.0))
        probe = traj.at(traj.t[5:10])
        assert np.allclose(probe, traj.states[5:10], rtol=1e-12, atol=1e-12)

    def test_negative_start_rejected(self, wmelpop):
        with pytest.raises(DomainError):
            integrate(wmelpop, PopulationState(-1.0, 1.0))

    def test_determinism_bitwise(self, wmelpop):
        s0 = PopulationState(321.0, 654.0)
        a = integrate(wmelpop, s0, IntegrationOptions(t_max=77.0))
        b = integrate(wmelpop, s0, IntegrationOptions(t_max=77.0))
        assert np.array_equal(a.t, b.t)
        assert np.array_equal(a.states, b.states)

    def test_csv_and_json_exports(self, wmelpop):
        traj = integrate(wmelpop, PopulationState(10.0, 10.0), IntegrationOptions(t_max=5.0))
        buf = io.StringIO()
        traj.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "t,N,W"
        assert len(lines) == len(traj.t) + 1
        payload = json.loads(traj.to_json())
        assert payload["terminal"] == REACHED_T_MAX
        assert len(payload["t"]) == len(traj.t)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            IntegrationOptions(rel_tol=-1.0)
        with pytest.raises(ValueError):
            IntegrationOptions(t_max=0.0)
