from dataclasses import replace

import numpy as np
import pytest

import sicancel as sc
from sicancel.hinf import Controller
from sicancel.sim import SimulationError, error_metrics, simulate
from sicancel.sysmat import DiscreteStateSpace, simulate_dss


def zero_controller(plant):
    return Controller(
        DiscreteStateSpace(
            np.zeros((0, 0)), np.zeros((0, plant.n_y)), np.zeros((2, 0)),
            np.zeros((2, plant.n_y)), plant.sigma.period,
        ),
        gamma_certified=np.inf,
    )


class TestSimulate:
    def test_zero_input_zero_everything(self, small_params, small_design):
        _, ctrl = small_design
        tr = simulate(small_params, ctrl, np.zeros((30, 2)))
        assert np.all(tr.w == 0.0)
        assert np.all(tr.u == 0.0)
        assert np.all(tr.z == 0.0)
        assert np.all(tr.z_d == 0.0)
        assert np.all(tr.u_d == 0.0)

    def test_error_signal_definition(self, small_params, small_design):
        _, ctrl = small_design
        rng = np.random.default_rng(0)
        tr = simulate(small_params, ctrl, rng.standard_normal((25, 2)))
        mN = small_params.m * small_params.N
        total = tr.z.shape[0]
        w_pad = np.zeros((total, 2))
        w_pad[: tr.w.shape[0]] = tr.w
        expect = np.zeros((total, 2))
        expect[mN:] = w_pad[: total - mN]
        expect -= tr.u
        assert np.allclose(tr.z, expect, atol=1e-14)

    def test_lengths(self, small_params, small_design):
        _, ctrl = small_design
        tr = simulate(small_params, ctrl, np.zeros((25, 2)))
        p = small_params
        assert tr.w.shape[0] == 24 * p.N + p.N_p + 1
        n_sym = tr.u_d.shape[0]
        assert tr.z.shape[0] == (n_sym - 1) * p.N + p.N_p + 1
        assert tr.t.shape[0] == tr.z.shape[0]

    def test_matches_lifted_closed_loop(self, small_params, small_plant, small_design):
        # the sample-level loop and the lifted state-space closed loop are
        # two independent realizations of the same map
        gamma, ctrl = small_design
        rng = np.random.default_rng(1)
        w_d = rng.standard_normal((40, 2))
        tr = simulate(small_params, ctrl, w_d)
        cl = sc.close_loop(small_plant, ctrl)
        n_sym = tr.z_d.shape[0]
        w_in = np.zeros((n_sym, 2))
        w_in[:40] = w_d
        zd_ss = simulate_dss(cl, w_in)
        assert np.max(np.abs(tr.z_d - zd_ss)) < 1e-9

    def test_trajectory_norm_bound(self, small_params, small_design):
        gamma, ctrl = small_design
        for seed in range(5):
            w_d = sc.generate_ofdm_bpsk(1, 32, 8, seed)
            tr = simulate(small_params, ctrl, w_d)
            ratio = np.linalg.norm(tr.z_d) / np.linalg.norm(tr.w_d)
            assert ratio <= gamma

    def test_oversampling_is_exact(self, small_params, small_design):
        _, ctrl = small_design
        w_d = sc.generate_ofdm_bpsk(1, 32, 8, seed=3)
        tr1 = simulate(small_params, ctrl, w_d)
        tr2 = simulate(small_params, ctrl, w_d, oversample=2)
        assert np.max(np.abs(tr1.z - tr2.z)) < 1e-10
        assert np.max(np.abs(tr1.u_d - tr2.u_d)) < 1e-10

    def test_loop_energy_decays(self, small_params, small_design):
        _, ctrl = small_design
        w_d = np.zeros((500, 2))
        w_d[:40] = sc.generate_ofdm_bpsk(1, 32, 8, seed=4)
        tr = simulate(small_params, ctrl, w_d)
        peak = np.max(np.abs(tr.z_d))
        tail = np.max(np.abs(tr.z_d[-20:]))
        assert tail < 1e-6 * peak

    def test_deterministic(self, small_params, small_design):
        _, ctrl = small_design
        w_d = sc.generate_ofdm_bpsk(1, 32, 8, seed=5)
        tr1 = simulate(small_params, ctrl, w_d)
        tr2 = simulate(small_params, ctrl, w_d)
        assert np.array_equal(tr1.z, tr2.z)
        assert np.array_equal(tr1.u_d, tr2.u_d)

    def test_gamma_recorded(self, small_params, small_design):
        gamma, ctrl = small_design
        tr = simulate(small_params, ctrl, np.zeros((10, 2)))
        assert tr.gamma_used == ctrl.gamma_certified == gamma

    def test_three_sample_blocks_full_pipeline(self):
        # non-reference block ratio with fractional-cycle rotations: design,
        # certify and cross-check the simulator against the lifted loop
        p = sc.RelayParams(
            a=40.0, paths=((0.3, 2), (0.12, 5)), f=0.377, h=1.0,
            N=3, m=2, N_p=6, beta=0.9,
            aa_filter=sc.first_order_lowpass(0.5, 2),
        )
        pulse = sc.srrc_taps(p.beta, p.N, p.N_p, p.h)
        plant = sc.build_generalized_plant(p, pulse)
        gamma, ctrl = sc.gamma_iterate(plant, rel_tol=1e-3)
        cl = sc.close_loop(plant, ctrl)
        assert cl.spectral_radius() < 1.0
        w_d = sc.generate_ofdm_bpsk(1, 32, 8, seed=0)
        tr = simulate(p, ctrl, w_d)
        n_sym = tr.z_d.shape[0]
        w_in = np.zeros((n_sym, 2))
        w_in[: w_d.shape[0]] = w_d
        zd_ss = simulate_dss(cl, w_in)
        assert np.max(np.abs(tr.z_d - zd_ss)) < 1e-9
        assert np.linalg.norm(tr.z_d) <= gamma * np.linalg.norm(w_d)

    def test_controller_validation(self, small_params, small_plant, small_design):
        _, ctrl = small_design
        bad_width = Controller(
            DiscreteStateSpace(
                np.zeros((0, 0)), np.zeros((0, 6)), np.zeros((2, 0)),
                np.zeros((2, 6)), small_plant.sigma.period,
            ),
            gamma_certified=1.0,
        )
        with pytest.raises(SimulationError):
            simulate(small_params, bad_width, np.zeros((10, 2)))
        direct = Controller(
            DiscreteStateSpace(
                np.zeros((0, 0)), np.zeros((0, 4)), np.zeros((2, 0)),
                np.ones((2, 4)), small_plant.sigma.period,
            ),
            gamma_certified=1.0,
        )
        with pytest.raises(SimulationError):
            simulate(small_params, direct, np.zeros((10, 2)))
        wrong_period = Controller(
            DiscreteStateSpace(
                np.zeros((0, 0)), np.zeros((0, 4)), np.zeros((2, 0)),
                np.zeros((2, 4)), 3.0,
            ),
            gamma_certified=1.0,
        )
        with pytest.raises(SimulationError):
            simulate(small_params, wrong_period, np.zeros((10, 2)))


class TestErrorMetrics:
    def test_zero_error_trace(self, small_params, small_design):
        _, ctrl = small_design
        tr = simulate(small_params, ctrl, np.zeros((30, 2)))
        met = error_metrics(tr)
        assert met.energy_ratio == 0.0
        assert met.evm == 0.0
        assert met.peak_abs_z == 0.0

    def test_open_loop_matches_convolution_oracle(self, small_params, small_plant):
        # with the canceler disabled the symbol error is the source filtered
        # by the centered polyphase branch of the pulse, delayed by m + q
        p = small_params
        pulse = sc.srrc_taps(p.beta, p.N, p.N_p, p.h)
        rng = np.random.default_rng(2)
        w_d = rng.standard_normal((40, 2))
        tr = simulate(p, zero_controller(small_plant), w_d)

        center = pulse.center
        idx = np.arange(-(center // p.N), center // p.N + 1)
        branch = pulse.taps[idx * p.N + center]
        lead = center // p.N - (p.m + p.perf_shift)
        expect = np.zeros_like(tr.z_d)
        for n in range(expect.shape[0]):
            for i, b in enumerate(branch):
                j = n + lead - i
                if 0 <= j < 40:
                    expect[n] += b * w_d[j]
        assert np.allclose(tr.z_d, expect, atol=1e-12)

        met = error_metrics(tr)
        # energy ratio approaches the branch energy for long random inputs
        assert met.energy_ratio == pytest.approx(float(np.sum(branch**2)), rel=0.35)

    def test_empty_window_rejected(self, small_params, small_design):
        _, ctrl = small_design
        tr = simulate(small_params, ctrl, np.zeros((2, 2)))
        with pytest.raises(SimulationError):
            error_metrics(tr, transient_symbols=10**6)

    def test_window_override(self, small_params, small_design):
        _, ctrl = small_design
        w_d = sc.generate_ofdm_bpsk(1, 32, 8, seed=6)
        tr = simulate(small_params, ctrl, w_d)
        m1 = error_metrics(tr, transient_symbols=5)
        m2 = error_metrics(tr)
        assert m1.energy_ratio >= 0.0 and m2.energy_ratio >= 0.0


class TestBaseline:
    def test_baseline_on_zero_gain_plant_is_the_design(self, small_params, small_pulse):
        p0 = replace(small_params, a=0.0)
        base = sc.baseline_controller(p0, small_pulse)
        plant0 = sc.build_generalized_plant(p0, small_pulse)
        gamma, ctrl = sc.gamma_iterate(plant0)
        assert base.gamma_certified == gamma
        assert np.array_equal(base.system.A, ctrl.system.A)
        # the optimized level beats the do-nothing residual by a wide margin
        assert gamma < 0.5 * sc.hinf_norm(plant0.t11(), tol=1e-6)

    def test_reference_baseline_destabilizes_true_loop(
        self, ref_plant, ref_baseline
    ):
        cl = sc.close_loop(ref_plant, ref_baseline)
        assert cl.spectral_radius() >= 1.0

    def test_proposed_beats_baseline_on_short_horizon(
        self, ref_params, ref_plant, ref_design, ref_baseline
    ):
        _, ctrl = ref_design
        w_d = sc.generate_ofdm_bpsk(1, 16, 4, seed=0)[:20]
        tr_good = simulate(ref_params, ctrl, w_d)
        tr_bad = simulate(ref_params, ref_baseline, w_d)
        m_good = error_metrics(tr_good)
        m_bad = error_metrics(tr_bad)
        assert m_good.energy_ratio < m_bad.energy_ratio
