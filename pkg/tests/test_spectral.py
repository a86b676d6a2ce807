"""Spectral density, occupation, and thermofield splitting tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from thermochain.errors import (
    DomainError,
    SingularityError,
    StatisticsMismatchError,
    ValidationError,
)
from thermochain.spectral import (
    BOSONIC,
    FERMIONIC,
    SpectralDensity,
    ThermalParameters,
    dispersion,
    occupation,
    thermofield_couplings,
    thermofield_densities,
)


def bosonic(beta):
    return ThermalParameters(beta=beta, statistics=BOSONIC)


def fermionic(beta):
    return ThermalParameters(beta=beta, statistics=FERMIONIC)


class TestSpectralDensity:
    def test_ohmic_vanishes_at_origin(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0)
        assert dens(0.0) == 0.0

    def test_ohmic_closed_form_value(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0)
        assert_allclose(dens(1.0), 0.1 * math.exp(-1.0), rtol=1e-14)

    def test_subohmic_large_cutoff_value(self):
        dens = SpectralDensity.ohmic(eta=0.01, s=0.5, omega_c=15.0)
        assert_allclose(dens(15.0), 0.01 * math.sqrt(15.0) * math.exp(-1.0),
                        rtol=1e-14)

    def test_default_support_is_ten_cutoffs(self):
        dens = SpectralDensity.ohmic(eta=1.0, s=1.0, omega_c=2.0)
        assert dens.omega_max == 20.0

    def test_vectorized_evaluation(self):
        # omega_c=2 needs a wider support than the 10*omega_c default to
        # pass the truncated-tail gate at s=1.5
        dens = SpectralDensity.ohmic(eta=0.3, s=1.5, omega_c=2.0, omega_max=30.0)
        w = np.linspace(0.0, dens.omega_max, 7)
        assert_allclose(dens(w), 0.3 * w**1.5 * np.exp(-w / 2.0), rtol=1e-14)

    @pytest.mark.parametrize("kwargs", [
        dict(eta=0.0, s=1.0, omega_c=1.0),
        dict(eta=-1.0, s=1.0, omega_c=1.0),
        dict(eta=0.1, s=0.0, omega_c=1.0),
        dict(eta=0.1, s=1.0, omega_c=-2.0),
        dict(eta=0.1, s=1.0, omega_c=1.0, omega_max=0.0),
    ])
    def test_ohmic_parameter_validation(self, kwargs):
        with pytest.raises(ValidationError):
            SpectralDensity.ohmic(**kwargs)

    def test_truncated_tail_rejected(self):
        # omega_max = omega_c leaves ~74% of the weight outside the support
        with pytest.raises(ValidationError, match="tail"):
            SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0, omega_max=1.0)

    def test_tail_tolerance_override(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0,
                                     omega_max=1.0, tail_tol=0.9)
        assert dens.omega_max == 1.0

    def test_outside_support_rejected(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0)
        with pytest.raises(DomainError):
            dens(-0.5)
        with pytest.raises(DomainError):
            dens(dens.omega_max * 1.01)

    def test_tabulated_interpolates(self):
        dens = SpectralDensity.tabulated([[0.0, 0.0], [1.0, 2.0], [3.0, 0.0]])
        assert dens.omega_max == 3.0
        assert_allclose(dens(0.5), 1.0)
        assert_allclose(dens(2.0), 1.0)

    @pytest.mark.parametrize("table", [
        [[0.0, 1.0]],                          # single row
        [[0.5, 1.0], [1.0, 1.0]],              # does not start at zero
        [[0.0, 1.0], [1.0, 1.0], [1.0, 2.0]],  # not strictly increasing
        [[0.0, 1.0], [1.0, -0.1]],             # negative density
    ])
    def test_tabulated_validation(self, table):
        with pytest.raises(ValidationError):
            SpectralDensity.tabulated(table)


class TestThermalParameters:
    def test_invalid_statistics(self):
        with pytest.raises(StatisticsMismatchError):
            ThermalParameters(beta=1.0, statistics="anyonic")

    @pytest.mark.parametrize("beta", [0.0, -2.0, float("nan")])
    def test_invalid_beta(self, beta):
        with pytest.raises(ValidationError):
            ThermalParameters(beta=beta)

    def test_zero_temperature_flag(self):
        assert bosonic(np.inf).zero_temperature
        assert not bosonic(17.0).zero_temperature


class TestOccupation:
    def test_bosonic_zero_temperature(self):
        assert occupation(bosonic(np.inf), 1.0) == 0.0

    def test_bosonic_closed_form(self):
        assert_allclose(occupation(bosonic(1.0), 1.0), 1.0 / (math.e - 1.0),
                        rtol=1e-14)

    def test_bosonic_rejects_zero_frequency(self):
        with pytest.raises(SingularityError):
            occupation(bosonic(1.0), 0.0)

    def test_bosonic_rejects_negative_frequency(self):
        with pytest.raises(DomainError):
            occupation(bosonic(1.0), -1.0)

    @pytest.mark.parametrize("beta", [0.5, 3.0, np.inf])
    def test_fermionic_half_at_fermi_level(self, beta):
        assert occupation(fermionic(beta), 0.0) == 0.5

    def test_fermionic_whole_axis(self):
        th = fermionic(2.0)
        w = np.array([-3.0, -0.1, 0.1, 3.0])
        assert_allclose(occupation(th, w), 1.0 / (np.exp(2.0 * w) + 1.0),
                        rtol=1e-14)

    def test_fermionic_zero_temperature_step(self):
        th = fermionic(np.inf)
        assert_allclose(occupation(th, np.array([-1.0, 0.0, 1.0])),
                        [1.0, 0.5, 0.0])

    # beta*omega stays below ~500 so exp(beta*omega) cannot overflow and
    # flush both occupations to exactly 0, which would void the strict <
    @given(omega=st.floats(0.01, 5.0), beta_lo=st.floats(0.1, 10.0),
           factor=st.floats(1.1, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_occupation_decreases_with_beta(self, omega, beta_lo, factor):
        beta_hi = beta_lo * factor
        assert occupation(bosonic(beta_hi), omega) < occupation(bosonic(beta_lo), omega)
        assert occupation(fermionic(beta_hi), omega) < occupation(fermionic(beta_lo), omega)


class TestThermofieldDensities:
    def test_zero_temperature_collapse(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0)
        pair = thermofield_densities(dens, bosonic(np.inf))
        w = np.linspace(0.1, dens.omega_max, 9)
        assert_allclose(pair.j2(w), 0.0)
        assert pair.j2(0.5) == 0.0
        assert_allclose(pair.j1(w), dens(w), rtol=1e-14)

    def test_bosonic_split_values(self):
        dens = SpectralDensity.ohmic(eta=0.1, s=1.0, omega_c=1.0)
        pair = thermofield_densities(dens, bosonic(1.0))
        n1 = 1.0 / (math.e - 1.0)
        assert_allclose(pair.j1(1.0), 0.1 * math.exp(-1.0) * (1.0 + n1), rtol=1e-13)
        assert_allclose(pair.j2(1.0), 0.1 * math.exp(-1.0) * n1, rtol=1e-13)

    def test_fermionic_equal_split_at_fermi_level(self):
        # tabulated density with nonzero weight at the origin
        dens = SpectralDensity.tabulated([[0.0, 0.4], [1.0, 0.2]])
        pair = thermofield_densities(dens, fermionic(3.0))
        assert_allclose(pair.j1(0.0), 0.2, rtol=1e-14)
        assert_allclose(pair.j2(0.0), 0.2, rtol=1e-14)

    @given(beta=st.floats(0.2, 30.0), eta=st.floats(0.01, 2.0),
           s=st.floats(0.3, 2.5))
    @settings(max_examples=40, deadline=None)
    def test_bosonic_difference_recovers_density(self, beta, eta, s):
        # explicit omega_max: the 10*omega_c default fails the tail gate
        # once s creeps past ~1.9
        dens = SpectralDensity.ohmic(eta=eta, s=s, omega_c=1.0, omega_max=15.0)
        pair = thermofield_densities(dens, bosonic(beta))
        w = np.linspace(0.05, dens.omega_max, 17)
        assert_allclose(pair.j1(w) - pair.j2(w), dens(w), rtol=1e-12, atol=1e-15)

    @given(beta=st.floats(0.2, 30.0), eta=st.floats(0.01, 2.0))
    @settings(max_examples=40, deadline=None)
    def test_fermionic_sum_recovers_density(self, beta, eta):
        dens = SpectralDensity.ohmic(eta=eta, s=1.0, omega_c=1.0)
        pair = thermofield_densities(dens, fermionic(beta))
        w = np.linspace(0.0, dens.omega_max, 17)
        assert_allclose(pair.j1(w) + pair.j2(w), dens(w), rtol=1e-12, atol=1e-15)


class TestThermofieldCouplings:
    def test_bosonic_hyperbolic_identity(self):
        w = np.array([0.3, 1.0, 4.0])
        g = np.array([0.1, 0.2, 0.05])
        g1, g2 = thermofield_couplings(w, g, bosonic(0.7))
        assert_allclose(g1**2 - g2**2, g**2, rtol=1e-12)

    def test_fermionic_trigonometric_identity(self):
        w = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
        g = np.full(5, 0.3)
        g1, g2 = thermofield_couplings(w, g, fermionic(1.3))
        assert_allclose(g1**2 + g2**2, g**2, rtol=1e-12)

    def test_zero_temperature_bosonic(self):
        g1, g2 = thermofield_couplings([1.0], [0.4], bosonic(np.inf))
        assert_allclose(g1, [0.4])
        assert_allclose(g2, [0.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            thermofield_couplings([1.0, 2.0], [0.1], bosonic(1.0))


class TestDispersion:
    def test_endpoints_and_linearity(self):
        assert dispersion(0.0, 10.0) == 0.0
        assert dispersion(1.0, 10.0) == 10.0
        assert dispersion(0.5, 150.0) == 75.0

    def test_domain(self):
        with pytest.raises(DomainError):
            dispersion(-0.1, 10.0)
        with pytest.raises(DomainError):
            dispersion(1.1, 10.0)

    def test_array_argument(self):
        assert_allclose(dispersion(np.array([0.0, 0.25, 1.0]), 4.0),
                        [0.0, 1.0, 4.0])
