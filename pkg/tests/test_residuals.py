"""Residual evaluation, signature structure and self-consistency oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tankfdi import plant, residuals
from tankfdi.plant import FaultEvent, FaultScenario, MeasurementFrame, PlantState
from tankfdi.residuals import (InsufficientHistory, ResidualEvaluator,
                               derivative_estimate, evaluate_arrs,
                               fault_direction, residual_trace,
                               signature_matrix)

from conftest import OPERATING_INPUTS


def frame_at(t, msf1, msf2, de1, de2, de3, df1, df2):
    return MeasurementFrame(t, msf1, msf2, de1, de2, de3, df1, df2)


class TestDerivativeEstimate:
    def test_constant_signal(self):
        assert derivative_estimate([2.0, 2.0, 2.0], dt=0.1) == 0.0

    def test_affine_signal_exact(self):
        xs = [2 * t for t in (0.0, 0.1, 0.2, 0.3)]
        assert derivative_estimate(xs, dt=0.1) == pytest.approx(2.0)

    def test_quadratic_backward_difference_bias(self):
        xs = [t * t for t in (0.8, 0.9, 1.0)]
        # (1.0^2 - 0.9^2) / 0.1 = 1.9, biased 0.1 below the true slope 2.0
        assert derivative_estimate(xs, dt=0.1) == pytest.approx(1.9)

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistory):
            derivative_estimate([1.0], dt=0.1)

    def test_smoothing_converges_to_constant_slope(self):
        xs = [3 * t for t in np.arange(0, 5, 0.1)]
        assert derivative_estimate(xs, dt=0.1, tau=0.3) == pytest.approx(3.0, rel=1e-6)

    def test_smoothing_lags_fresh_steps(self):
        xs = [0.0] * 10 + [1.0]
        raw = derivative_estimate(xs, dt=0.1)
        smooth = derivative_estimate(xs, dt=0.1, tau=0.3)
        assert raw == pytest.approx(10.0)
        assert 0 < smooth < raw


class TestEvaluateArrs:
    def test_all_zero_frames(self, params):
        z0 = frame_at(0.0, 0, 0, 0, 0, 0, 0, 0)
        z1 = frame_at(0.1, 0, 0, 0, 0, 0, 0, 0)
        r = evaluate_arrs(z1, z0, params, dt=0.1)
        assert r.as_array().tolist() == [0, 0, 0, 0, 0]

    def test_fault_free_trace_self_consistency(self, params):
        sc = FaultScenario(seed=0, duration=30.0, dt=0.1)
        trace = plant.run(sc, params, OPERATING_INPUTS)
        _, resid = residual_trace(trace, params)
        assert np.abs(resid).max() < 1e-12

    def test_transient_trace_stays_small(self, params):
        # starting off-equilibrium exposes the backward-difference bias,
        # which is bounded by the derivative truncation error, not tiny
        sc = FaultScenario(seed=0, duration=30.0, dt=0.1)
        trace = plant.run(sc, params, OPERATING_INPUTS,
                          x0=PlantState(0, 0, 0, 0))
        _, resid = residual_trace(trace, params)
        assert np.abs(resid).max() < 0.1
        assert np.abs(resid[-50:]).max() < 1e-6

    def test_step_fault_on_df1_signature_direction(self, params):
        # at equilibrium, +delta on Df1 shifts (r1, r2, r5) by (-d, +d, -d)
        delta = 0.7
        ev = FaultEvent("Df1", 5.0, delta)
        sc = FaultScenario(seed=0, duration=10.0, dt=0.1, events=(ev,))
        trace = plant.run(sc, params, OPERATING_INPUTS)
        _, resid = residual_trace(trace, params)
        final = resid[-1]
        assert final[0] == pytest.approx(-delta)
        assert final[1] == pytest.approx(+delta)
        assert final[2] == pytest.approx(0.0, abs=1e-12)
        assert final[3] == pytest.approx(0.0, abs=1e-12)
        assert final[4] == pytest.approx(-delta)

    def test_streaming_evaluator_matches_batch(self, params):
        ev = FaultEvent("De2", 2.0, 1.0)
        sc = FaultScenario(seed=8, duration=8.0, dt=0.1,
                           noise_std_R=0.03, noise_std_C=0.03, events=(ev,))
        trace = plant.run(sc, params, OPERATING_INPUTS)
        times, batch = residual_trace(trace, params, tau=0.3, spike_window=3)
        stream = ResidualEvaluator(params, dt=0.1, tau=0.3, spike_window=3)
        with pytest.raises(InsufficientHistory):
            stream.update(trace.frame(0))
        rows = [stream.update(trace.frame(i)).as_array()
                for i in range(1, len(trace))]
        np.testing.assert_allclose(np.array(rows), batch, rtol=0, atol=1e-14)

    def test_requires_previous_frame(self, params):
        z = frame_at(0.0, 0, 0, 0, 0, 0, 0, 0)
        with pytest.raises(InsufficientHistory):
            evaluate_arrs(z, None, params, dt=0.1)

    def test_nonlinear_mode_breaks_linear_consistency(self, params):
        # the square-root coupling law is a deliberate model mismatch: the
        # linear residuals no longer vanish on its fault-free traces
        sc = FaultScenario(seed=0, duration=30.0, dt=0.1)
        trace = plant.run(sc, params, OPERATING_INPUTS, mode="nonlinear")
        _, resid = residual_trace(trace, params)
        assert np.abs(resid[-1]).max() > 1e-3


class TestLinearity:
    @given(seed=st.integers(0, 2**20),
           m1=st.floats(-2, 2), m2=st.floats(-2, 2))
    @settings(max_examples=25, deadline=None)
    def test_superposition_of_two_faults(self, seed, m1, m2):
        params = plant.PlantParams()
        rng = np.random.default_rng(seed)
        targets = rng.choice(plant.VARIABLES, size=2, replace=False)
        base = dict(duration=6.0, dt=0.1)

        def resid_with(events):
            sc = FaultScenario(seed=0, events=tuple(events), **base)
            tr = plant.run(sc, params, OPERATING_INPUTS)
            return residual_trace(tr, params)[1]

        clean = resid_with([])
        ra = resid_with([FaultEvent(targets[0], 2.0, m1)])
        rb = resid_with([FaultEvent(targets[1], 2.0, m2)])
        rab = resid_with([FaultEvent(targets[0], 2.0, m1),
                          FaultEvent(targets[1], 2.0, m2)])
        np.testing.assert_allclose(rab - clean, (ra - clean) + (rb - clean),
                                   atol=1e-9)

    @given(lam=st.floats(0.1, 5.0))
    @settings(max_examples=20, deadline=None)
    def test_residuals_scale_with_signals(self, lam):
        params = plant.PlantParams()
        sc = FaultScenario(seed=0, duration=5.0, dt=0.1,
                           events=(FaultEvent("Msf1", 1.0, 0.5),))
        base = plant.run(sc, params, OPERATING_INPUTS,
                         x0=PlantState(0.1, 0.2, 0.3, 0.0))
        scaled_inputs = (OPERATING_INPUTS[0] * lam, OPERATING_INPUTS[1] * lam)
        sc2 = FaultScenario(seed=0, duration=5.0, dt=0.1,
                            events=(FaultEvent("Msf1", 1.0, 0.5 * lam),))
        scaled = plant.run(sc2, params, scaled_inputs,
                           x0=PlantState(0.1 * lam, 0.2 * lam, 0.3 * lam, 0.0))
        _, r1 = residual_trace(base, params)
        _, r2 = residual_trace(scaled, params)
        np.testing.assert_allclose(r2, lam * r1, rtol=1e-9, atol=1e-12)


class TestSignatureMatrix:
    def test_rows(self):
        sig = signature_matrix()
        assert sig.row("Msf1") == {1}
        assert sig.row("Msf2") == {3}
        assert sig.row("De1") == {1, 5}
        assert sig.row("De2") == {2, 4, 5}
        assert sig.row("De3") == {3, 4}
        assert sig.row("Df1") == {1, 2, 5}
        assert sig.row("Df2") == {2, 3, 4}

    def test_rows_pairwise_distinct(self):
        sig = signature_matrix()
        rows = [tuple(sig.matrix[i]) for i in range(7)]
        assert len(set(rows)) == 7

    def test_matrix_is_immutable(self):
        sig = signature_matrix()
        with pytest.raises(ValueError):
            sig.matrix[0, 0] = False

    def test_fault_directions_match_simulation(self, params):
        # independent route: inject each fault, measure settled residual shift
        for var in plant.VARIABLES:
            delta = 1.3
            sc = FaultScenario(seed=0, duration=10.0, dt=0.1,
                               events=(FaultEvent(var, 3.0, delta),))
            tr = plant.run(sc, params, OPERATING_INPUTS)
            _, resid = residual_trace(tr, params)
            np.testing.assert_allclose(resid[-1], delta * fault_direction(var, params),
                                       atol=1e-9)
            support = {i + 1 for i in np.flatnonzero(np.abs(resid[-1]) > 1e-9)}
            assert support == signature_matrix().row(var)


class TestResidualCsv:
    def test_row_alignment_with_leading_zero(self, params, tmp_path):
        sc = FaultScenario(seed=0, duration=1.0, dt=0.1)
        trace = plant.run(sc, params, OPERATING_INPUTS)
        times, resid = residual_trace(trace, params)
        path = tmp_path / "resid.csv"
        residuals.write_residual_csv(times, resid, str(path),
                                     include_initial_zero_row=True, t0=0.0)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,r1,r2,r3,r4,r5"
        assert len(lines) == len(trace) + 1
        assert lines[1].startswith("0.0,")
