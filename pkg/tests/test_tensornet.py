"""MPS and TEBD tests.

Dense exact diagonalization of small thermofield stars provides the
dynamical oracle; analytic free precession and constructed singular
spectra cover the plumbing.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from thermochain.chainmap import ChainCoefficients, tridiagonalize_discrete
from thermochain.errors import NumericalError, ValidationError
from thermochain.lattice import (
    SIGMA_X,
    SIGMA_Z,
    SystemSpec,
    build_anderson,
    build_spin_boson,
)
from thermochain.reference import exact_diagonalization
from thermochain.spectral import ThermalParameters, thermofield_couplings
from thermochain.tensornet import (
    EvolutionConfig,
    MatrixProductState,
    measure_energy,
    svd_truncate,
    tebd_evolve,
    trotter_gates,
    vacuum_state,
)


def plus_spin(kind="spin_dephasing", omega_s=0.0):
    return SystemSpec(kind=kind, omega_s=omega_s,
                      amp0=1 / np.sqrt(2), amp1=1 / np.sqrt(2))


def star_chains(freqs, couplings, thermal):
    g1, g2 = thermofield_couplings(freqs, couplings, thermal)
    return (tridiagonalize_discrete(freqs, g1, reservoir_index=1),
            tridiagonalize_discrete(freqs, g2, reservoir_index=2))


def weak_chain(alpha=0.5, beta0=1e-18):
    """A chain stub whose coupling is far below every tolerance in use.

    Coefficient validation requires beta0 > 0, so a truly decoupled spin
    is expressed through a negligible g = 1e-9.
    """
    return ChainCoefficients(alphas=np.array([alpha]),
                             betas=np.array([beta0]),
                             reservoir_index=1, support=(0.0, 1.0))


class TestEvolutionConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(dt=0.0, t_final=1.0, d_max=8),
        dict(dt=-0.1, t_final=1.0, d_max=8),
        dict(dt=0.1, t_final=0.0, d_max=8),
        dict(dt=0.1, t_final=1.0, d_max=0),
        dict(dt=0.1, t_final=1.0, d_max=8, svd_tol=-1e-3),
        dict(dt=0.1, t_final=1.0, d_max=8, measure_stride=0),
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValidationError):
            EvolutionConfig(**kwargs)

    def test_n_steps(self):
        assert EvolutionConfig(dt=0.05, t_final=2.0, d_max=4).n_steps == 40
        with pytest.raises(ValidationError):
            EvolutionConfig(dt=0.3, t_final=2.0, d_max=4).n_steps


class TestSvdTruncate:
    def test_rank_one_theta(self):
        theta = np.outer([1.0, 0.0], [0.6, 0.8])
        u, s, vh, discarded = svd_truncate(theta, d_max=4, svd_tol=1e-12)
        assert s.size == 1
        assert discarded == 0.0
        assert_allclose(s, [1.0])

    def test_constructed_spectrum_dmax_cap(self):
        # tolerance would keep both values; the D cap forces the drop and
        # the discarded relative weight is (1e-12)^2 = 1e-24
        theta = np.diag([1.0, 1e-12])
        _, s, _, discarded = svd_truncate(theta, d_max=1, svd_tol=1e-20)
        assert s.size == 1
        assert_allclose(discarded, 1e-24, rtol=1e-6)

    def test_matches_dense_svd(self):
        rng = np.random.default_rng(7)
        theta = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        _, s, _, discarded = svd_truncate(theta, d_max=4, svd_tol=0.0)
        ref = np.linalg.svd(theta, compute_uv=False)
        assert_allclose(s, ref / np.linalg.norm(ref), atol=1e-12)
        assert discarded == 0.0

    def test_tolerance_cut(self):
        theta = np.diag([1.0, 1e-4, 1e-5])
        _, s, _, discarded = svd_truncate(theta, d_max=8, svd_tol=1e-7)
        # tail after one value is 1e-8 + 1e-10 <= 1e-7, so rank 1 survives
        assert s.size == 1
        assert_allclose(discarded, 1.01e-8, rtol=1e-3)

    def test_zero_matrix_rejected(self):
        with pytest.raises(NumericalError):
            svd_truncate(np.zeros((3, 3)), d_max=2, svd_tol=0.0)


class TestMatrixProductState:
    def test_product_state_basics(self):
        state = MatrixProductState.product_state(
            [np.array([1.0, 0.0]), np.array([0.0, 1.0, 0.0])])
        assert state.n_sites == 2
        assert state.bond_dims == [1]
        assert_allclose(state.norm(), 1.0)

    def test_zero_factor_rejected(self):
        with pytest.raises(ValidationError):
            MatrixProductState.product_state([np.zeros(2)])

    def test_measure_local_conventions(self):
        state = MatrixProductState.product_state(
            [np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0])])
        # |0> is the sigma_z = +1 state
        assert_allclose(state.measure_local(0, SIGMA_Z).real, 1.0)
        assert_allclose(state.measure_local(0, np.eye(2)).real, 1.0)
        number = np.diag([0.0, 1.0, 2.0])
        assert_allclose(state.measure_local(1, number).real, 0.0)

    def test_measure_dimension_mismatch(self):
        state = MatrixProductState.product_state([np.array([1.0, 0.0])])
        with pytest.raises(ValidationError):
            state.measure_local(0, np.eye(3))

    def test_move_center_bounds(self):
        state = MatrixProductState.product_state([np.array([1.0, 0.0])] * 3)
        with pytest.raises(ValidationError):
            state.move_center(5)

    def test_gauge_moves_preserve_observables(self):
        # entangle a 4-site state with a couple of untruncated gates, then
        # sweep the center across the chain and back
        rng = np.random.default_rng(3)
        state = MatrixProductState.product_state(
            [np.array([0.6, 0.8]), np.array([1.0, 0.0]),
             np.array([1.0, 1.0]) / np.sqrt(2), np.array([0.0, 1.0])])
        for i in (0, 1, 2):
            h = rng.standard_normal((4, 4))
            h = h + h.T
            gate = np.linalg.matrix_power(np.eye(4) + 0.1j * h, 1)
            q, _ = np.linalg.qr(gate)
            state.move_center(i)
            state.apply_two_site(i, q, d_max=16, svd_tol=0.0)
        before = [state.measure_local(i, SIGMA_Z).real for i in range(4)]
        norm_before = state.norm()
        state.move_center(3)
        state.move_center(0)
        after = [state.measure_local(i, SIGMA_Z).real for i in range(4)]
        assert_allclose(after, before, atol=1e-10)
        assert_allclose(state.norm(), norm_before, atol=1e-12)

    def test_apply_two_site_requires_adjacent_center(self):
        state = MatrixProductState.product_state([np.array([1.0, 0.0])] * 4)
        state.move_center(0)
        with pytest.raises(ValidationError):
            state.apply_two_site(2, np.eye(4), d_max=4, svd_tol=0.0)

    def test_measure_bond_product_state(self):
        state = MatrixProductState.product_state(
            [np.array([0.6, 0.8]), np.array([1.0, 0.0])])
        val = state.measure_bond(0, np.kron(SIGMA_Z, SIGMA_Z)).real
        assert_allclose(val, (0.36 - 0.64) * 1.0, atol=1e-12)


class TestVacuumState:
    def test_vacuum_properties(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        c1, c2 = star_chains([0.7, 1.3], [0.2, 0.15], thermal)
        model = build_spin_boson(plus_spin(), c1, c2, n_max=3)
        state = vacuum_state(model)
        assert_allclose(state.norm(), 1.0)
        assert_allclose(state.measure_local(model.system_index, SIGMA_X).real,
                        1.0, atol=1e-12)
        for i, site in enumerate(model.sites):
            if site.kind == "boson":
                number = np.diag(np.arange(site.dim, dtype=float))
                assert_allclose(state.measure_local(i, number).real, 0.0,
                                atol=1e-14)


class TestTrotterGates:
    def test_layer_split_and_unitarity(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        c1, c2 = star_chains([0.7, 1.3], [0.2, 0.15], thermal)
        model = build_spin_boson(plus_spin(), c1, c2, n_max=2)
        even, odd = trotter_gates(model, dt=0.05)
        assert sorted(even) == [0, 2]
        assert sorted(odd) == [1, 3]
        for gate in (*even.values(), *odd.values()):
            assert_allclose(gate @ gate.conj().T, np.eye(gate.shape[0]),
                            atol=1e-12)


class TestTebdEvolve:
    def test_free_precession(self):
        # negligible coupling on a 2-site lattice: the single Trotter gate
        # is the exact propagator, so only the spin precesses
        model = build_spin_boson(plus_spin(omega_s=0.1), weak_chain(),
                                 ChainCoefficients.empty(2), n_max=1)
        config = EvolutionConfig(dt=0.01, t_final=5.0, d_max=4,
                                 measure_stride=50)
        series = tebd_evolve(vacuum_state(model), model, config)
        assert_allclose(series.columns["sx"], np.cos(0.1 * series.times),
                        atol=1e-8)

    def test_sigma_z_conserved_under_dephasing(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        c1, c2 = star_chains([0.7, 1.3], [0.3, 0.2], thermal)
        system = SystemSpec(kind="spin_dephasing", omega_s=0.2,
                            amp0=0.6, amp1=0.8)
        model = build_spin_boson(system, c1, c2, n_max=3)
        config = EvolutionConfig(dt=0.02, t_final=2.0, d_max=16,
                                 measure_stride=10)
        series = tebd_evolve(vacuum_state(model), model, config)
        assert_allclose(series.columns["sz"], 0.36 - 0.64, atol=1e-6)

    def test_matches_bosonic_exact_diagonalization(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        freqs, couplings = [0.7, 1.3], [0.2, 0.15]
        c1, c2 = star_chains(freqs, couplings, thermal)
        system = plus_spin(kind="spin_transverse", omega_s=0.3)
        model = build_spin_boson(system, c1, c2, n_max=4)
        config = EvolutionConfig(dt=0.005, t_final=1.0, d_max=64,
                                 svd_tol=0.0, measure_stride=20)
        series = tebd_evolve(vacuum_state(model), model, config)
        oracle = exact_diagonalization(freqs, couplings, thermal, system,
                                       n_max=4, t_grid=series.times)
        for name in ("sx", "sy", "sz"):
            assert np.abs(series.columns[name] - oracle.columns[name]).max() <= 1e-6

    def test_matches_fermionic_exact_diagonalization(self):
        thermal = ThermalParameters(beta=2.0, statistics="fermionic")
        freqs, couplings = [0.5, 1.0], [0.3, 0.2]
        c1, c2 = star_chains(freqs, couplings, thermal)
        system = SystemSpec(kind="anderson_dot", coulomb_u=0.3, level=-0.15,
                            t_hyb=0.2, initial_dot="up")
        model = build_anderson(system, c1, c2)
        config = EvolutionConfig(dt=0.01, t_final=2.0, d_max=64,
                                 svd_tol=0.0, measure_stride=20)
        series = tebd_evolve(vacuum_state(model), model, config)
        oracle = exact_diagonalization(freqs, couplings, thermal, system,
                                       t_grid=series.times)
        for name in ("n_up", "n_dn"):
            assert np.abs(series.columns[name] - oracle.columns[name]).max() <= 1e-6

    def test_diagnostics_and_overflow_warning(self):
        # a unit-coupling oscillator truncated at n_max=2 overflows fast
        strong = ChainCoefficients(alphas=np.array([1.0]),
                                   betas=np.array([1.0]),
                                   reservoir_index=1, support=(0.0, 2.0))
        model = build_spin_boson(plus_spin(), strong,
                                 ChainCoefficients.empty(2), n_max=2)
        config = EvolutionConfig(dt=0.05, t_final=2.0, d_max=8)
        series = tebd_evolve(vacuum_state(model), model, config)
        diag = series.diagnostics.columns
        assert set(diag) == {"max_bond_dim", "step_discarded_weight",
                             "total_discarded_weight", "top_fock_population"}
        assert diag["top_fock_population"].max() > 1e-3
        assert len(series.warnings) == 1
        assert "n_max" in series.warnings[0]
        total = diag["total_discarded_weight"]
        assert np.all(np.diff(total) >= 0.0)

    def test_norm_drift_bounded_by_discarded_weight(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        c1, c2 = star_chains([0.7, 1.3], [0.4, 0.3], thermal)
        model = build_spin_boson(plus_spin(kind="spin_transverse"), c1, c2,
                                 n_max=3)
        config = EvolutionConfig(dt=0.02, t_final=2.0, d_max=2,
                                 svd_tol=1e-12)
        state = vacuum_state(model)
        tebd_evolve(state, model, config)
        assert state.truncation_error_acc > 0.0
        assert abs(1.0 - state.norm()) <= 10.0 * state.truncation_error_acc + 1e-10

    def test_energy_drift_halves_at_second_order(self):
        thermal = ThermalParameters(beta=1.0, statistics="bosonic")
        freqs, couplings = [0.7, 1.3], [0.2, 0.15]
        c1, c2 = star_chains(freqs, couplings, thermal)
        model = build_spin_boson(plus_spin(kind="spin_transverse", omega_s=0.3),
                                 c1, c2, n_max=4)
        drifts = []
        for dt in (0.1, 0.05):
            config = EvolutionConfig(dt=dt, t_final=1.0, d_max=256,
                                     svd_tol=0.0, measure_stride=1000)
            state = vacuum_state(model)
            e0 = measure_energy(state, model)
            tebd_evolve(state, model, config)
            drifts.append(abs(measure_energy(state, model) - e0))
        assert drifts[0] / drifts[1] >= 3.5

    def test_state_model_mismatch_rejected(self):
        model = build_spin_boson(plus_spin(), weak_chain(),
                                 ChainCoefficients.empty(2), n_max=1)
        state = MatrixProductState.product_state([np.array([1.0, 0.0])])
        config = EvolutionConfig(dt=0.1, t_final=1.0, d_max=4)
        with pytest.raises(ValidationError):
            tebd_evolve(state, model, config)
