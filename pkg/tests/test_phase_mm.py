import numpy as np
import pytest
from dataclasses import replace

from irs_secrecy.channel import (
    Dims,
    LinkDistances,
    ScenarioConfig,
    generate_channels,
    trial_rng,
)
from irs_secrecy.numerics import TransmitCovariance, log_det_pd
from irs_secrecy.phase_mm import (
    blocked_link_objective,
    build_mm_state,
    check_surrogate_state,
    mm_solve,
    mm_update,
    surrogate_value,
)
from irs_secrecy.phase_obo import obo_sweep

from oracles import rand_psd


def blocked_instance(seed, m=3, d=2, e=2, n=4, noise_dbm=-55.0, trace=None):
    cfg = ScenarioConfig(dims=Dims(m, d, e, n), noise_power_dbm=noise_dbm)
    ch = generate_channels(cfg, trial_rng(seed, 0)).with_blocked_direct()
    rng = np.random.default_rng(seed + 500)
    tr = trace if trace is not None else float(rng.uniform(0.5, 3.0))
    r = rand_psd(rng, m, trace=tr)
    cov = TransmitCovariance(r=r, p=tr)
    return ch, cov, rng


class TestBuildState:
    def test_zero_covariance_collapses(self):
        ch, _, _ = blocked_instance(0)
        cov = TransmitCovariance(r=np.zeros((3, 3), dtype=complex), p=1.0)
        st = build_mm_state(np.ones(4, dtype=complex), cov, ch)
        assert np.allclose(st.l_half, 0)
        assert np.allclose(st.p_tilde, 0)
        assert np.allclose(st.q_tilde_b, np.eye(2))
        assert np.allclose(st.z, 0)
        assert np.allclose(st.a4_diag, 0)

    def test_z_hermitian_psd_many_instances(self):
        for seed in range(100):
            ch, cov, rng = blocked_instance(seed)
            qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            st = build_mm_state(qt, cov, ch)
            check_surrogate_state(st)

    def test_matrix_inversion_lemma_identity(self):
        # g(Q) = log2|I + H_IB Q L Q^H H_IB^H| = -log2|Q_B|
        for seed in range(10):
            ch, cov, rng = blocked_instance(seed + 200)
            qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            st = build_mm_state(qt, cov, ch)
            g = blocked_link_objective(qt, cov, ch)
            assert g == pytest.approx(-log_det_pd(st.q_tilde_b), abs=1e-9)


class TestSurrogate:
    def test_touches_at_expansion_point(self):
        for seed in range(20):
            ch, cov, rng = blocked_instance(seed + 300)
            qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            st = build_mm_state(qt, cov, ch)
            assert surrogate_value(qt, st) == pytest.approx(
                blocked_link_objective(qt, cov, ch), abs=1e-8
            )

    def test_minorizes_everywhere(self):
        ch, cov, rng = blocked_instance(42)
        qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        st = build_mm_state(qt, cov, ch)
        for _ in range(1000):
            q = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
            assert surrogate_value(q, st) <= blocked_link_objective(q, cov, ch) + 1e-8

    def test_isotropic_z_reduces_to_linear_term(self):
        ch, cov, rng = blocked_instance(43)
        qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        st = build_mm_state(qt, cov, ch)
        lam = st.lam1_z
        iso = replace(st, z=lam * np.eye(4), lam1_z=lam)
        q1 = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        q2 = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        # with Z = lam I the q-dependence collapses to 2 Re{q^H a4}
        diff = surrogate_value(q1, iso) - surrogate_value(q2, iso)
        expect = 2 * np.real((q1 - q2).conj() @ iso.a4_diag)
        assert diff == pytest.approx(expect, abs=1e-10)

    def test_spectral_shift_is_psd(self):
        ch, cov, rng = blocked_instance(44)
        qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        st = build_mm_state(qt, cov, ch)
        shift = st.lam1_z * np.eye(4) - st.z
        assert np.linalg.eigvalsh(shift)[0] >= -1e-9


class TestMmUpdate:
    def test_isotropic_positive_a4_gives_ones(self):
        ch, cov, rng = blocked_instance(45)
        st = build_mm_state(np.ones(4, dtype=complex), cov, ch)
        lam = st.lam1_z
        forced = replace(
            st, z=lam * np.eye(4), a4_diag=np.array([1.0, 2.0, 0.5, 3.0], dtype=complex)
        )
        assert np.allclose(mm_update(forced), np.ones(4))

    def test_phase_pairs(self):
        ch, cov, _ = blocked_instance(46)
        st = build_mm_state(np.ones(4, dtype=complex), cov, ch)
        forced = replace(
            st,
            z=st.lam1_z * np.eye(4),
            a4_diag=np.array([1j, -1j, 1j, -1j]),
        )
        # v = a4 with phases (pi/2, -pi/2, ...)
        assert np.allclose(mm_update(forced), np.array([1j, -1j, 1j, -1j]))

    def test_aligns_with_v_vector(self):
        ch, cov, rng = blocked_instance(47)
        qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        st = build_mm_state(qt, cov, ch)
        q = mm_update(st)
        v = st.lam1_z * qt - st.z @ qt + st.a4_diag
        # maximizes Re{q^H v} over random unit-modulus candidates
        val = np.real(q.conj() @ v)
        for _ in range(100_000 // 100):
            cand = np.exp(1j * rng.uniform(0, 2 * np.pi, (100, 4)))
            vals = np.real(cand.conj() @ v)
            assert np.all(vals <= val + 1e-9)

    def test_zero_v_component_keeps_incumbent(self):
        ch, cov, rng = blocked_instance(48)
        qt = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        st = build_mm_state(qt, cov, ch)
        forced = replace(
            st,
            z=st.lam1_z * np.eye(4),
            a4_diag=np.zeros(4, dtype=complex),
        )
        # v = (lam I - Z) qt + a4 = 0 for every element
        assert np.allclose(mm_update(forced), qt)


class TestMmSolve:
    def test_single_reflector_converges_immediately(self):
        ch, cov, _ = blocked_instance(49, n=1)
        q = mm_solve(cov, ch)
        g0 = blocked_link_objective(np.ones(1, dtype=complex), cov, ch)
        g1 = blocked_link_objective(q, cov, ch)
        assert g1 == pytest.approx(g0, abs=1e-9)  # phase-invariant for n = 1

    def test_never_below_identity_start(self):
        for seed in range(10):
            ch, cov, _ = blocked_instance(seed + 700)
            q = mm_solve(cov, ch)
            assert blocked_link_objective(q, cov, ch) >= blocked_link_objective(
                np.ones(4, dtype=complex), cov, ch
            ) - 1e-9

    def test_objective_ascends_along_iterations(self):
        ch, cov, rng = blocked_instance(60)
        qt = np.ones(4, dtype=complex)
        st = build_mm_state(qt, cov, ch)
        g_prev = blocked_link_objective(qt, cov, ch)
        for _ in range(25):
            q = mm_update(st)
            g_new = blocked_link_objective(q, cov, ch)
            assert g_new >= g_prev - 1e-9
            g_prev = g_new
            st = build_mm_state(q, cov, ch)

    def test_close_to_obo_on_blocked_instance(self):
        cfg = ScenarioConfig(
            dims=Dims(4, 2, 2, 8),
            distances=LinkDistances(80.0, 5.0, 80.0, 5.0, 10.0),
            noise_power_dbm=-60.0,
            power_dbm=35.0,
        )
        ch = generate_channels(cfg, trial_rng(8, 0)).with_blocked_direct()
        rng = np.random.default_rng(8)
        cov = TransmitCovariance(r=rand_psd(rng, 4, trace=3.16), p=3.16)
        g_mm = blocked_link_objective(mm_solve(cov, ch), cov, ch)
        # sweep the one-by-one optimizer to convergence for the reference
        q = np.ones(8, dtype=complex)
        g_obo = blocked_link_objective(q, cov, ch)
        for _ in range(100):
            q = obo_sweep(q, cov, ch, mode="bob_only")
            g_new = blocked_link_objective(q, cov, ch)
            if g_new - g_obo < 1e-9:
                break
            g_obo = g_new
        assert abs(g_mm - g_obo) <= 0.05 * abs(g_obo)
