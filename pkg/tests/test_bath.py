"""Tests for bath spectral densities."""

import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.bath import BathKind, BathSpec, lorentzian_form, peak_frequency, spectral_density
from src.errors import DomainError


class TestBathSpec:
    """Tests for BathSpec construction and validation."""

    def test_lorentzian_constructor(self):
        """Test that the Lorentzian constructor stores lambda as width."""
        bath = BathSpec.lorentzian(0.01, 0.09)
        assert bath.kind is BathKind.LORENTZIAN
        assert bath.lam == 0.09
        assert bath.alpha == 0.01

    def test_ohmic_constructor(self):
        """Test that the Ohmic constructor stores the cutoff as width."""
        bath = BathSpec.ohmic(0.1, 10)
        assert bath.kind is BathKind.OHMIC
        assert bath.omega_c == 10.0

    def test_kind_accepts_string(self):
        """Test that the kind may be given by name."""
        assert BathSpec("ohmic", 0.1, 10).kind is BathKind.OHMIC

    def test_negative_width_rejected(self):
        """Test that a non-positive lambda is a domain error."""
        with pytest.raises(DomainError, match="lambda"):
            BathSpec.lorentzian(0.01, -1)

    def test_zero_cutoff_rejected(self):
        """Test that a zero Drude cutoff is a domain error."""
        with pytest.raises(DomainError, match="omega_c"):
            BathSpec.ohmic(0.01, 0)

    def test_negative_alpha_rejected(self):
        """Test that a negative coupling is a domain error."""
        with pytest.raises(DomainError):
            BathSpec.lorentzian(-0.01, 0.09)

    def test_zero_alpha_is_trivial(self):
        """Test that alpha = 0 describes the isolated qubit."""
        assert BathSpec.lorentzian(0.0, 0.09).is_trivial
        assert not BathSpec.lorentzian(0.01, 0.09).is_trivial

    def test_wide_lorentzian_warns(self, caplog):
        """Test that lambda >= Delta is accepted with a warning."""
        with caplog.at_level(logging.WARNING, logger="src.bath"):
            bath = BathSpec.lorentzian(0.01, 1.5)
        assert bath.warnings()
        assert "low-frequency" in caplog.text

    def test_wrong_width_property(self):
        """Test that the width accessor of the other family is unavailable."""
        with pytest.raises(AttributeError):
            _ = BathSpec.lorentzian(0.01, 0.09).omega_c

    def test_hashable_and_comparable(self):
        """Test that equal specs hash equally (used as cache keys)."""
        assert hash(BathSpec.ohmic(0.1, 10)) == hash(BathSpec.ohmic(0.1, 10.0))
        assert BathSpec.ohmic(0.1, 10) == BathSpec.ohmic(0.1, 10.0)

    def test_as_dict_names_width(self):
        """Test that the serialized form names the width by family."""
        assert BathSpec.lorentzian(0.01, 0.09).as_dict() == {"kind": "lorentzian", "alpha": 0.01, "lambda": 0.09}
        assert "omega_c" in BathSpec.ohmic(0.01, 10).as_dict()


class TestSpectralDensity:
    """Tests for spectral_density."""

    def test_lorentzian_value_at_delta(self, lorentzian_weak):
        """Test J(1) for alpha=0.01, lambda=0.09."""
        assert spectral_density(lorentzian_weak, 1.0) == pytest.approx(0.02 / 1.0081, rel=1e-12)

    def test_ohmic_value_at_delta(self, ohmic_weak):
        """Test J(1) for the weak Ohmic bath."""
        assert spectral_density(ohmic_weak, 1.0) == pytest.approx(0.02 / 1.01, rel=1e-12)

    def test_zero_at_zero(self, lorentzian_weak, ohmic_weak):
        """Test that both baths vanish at zero frequency."""
        assert spectral_density(lorentzian_weak, 0.0) == 0.0
        assert spectral_density(ohmic_weak, 0.0) == 0.0

    def test_negative_frequency_rejected(self, lorentzian_weak):
        """Test that negative energies are outside the domain."""
        with pytest.raises(DomainError):
            spectral_density(lorentzian_weak, -0.1)

    def test_vectorized(self, ohmic_strong):
        """Test that arrays are evaluated elementwise."""
        omega = np.array([0.5, 1.0, 2.0])
        values = spectral_density(ohmic_strong, omega)
        assert values.shape == (3,)
        assert values[1] == pytest.approx(spectral_density(ohmic_strong, 1.0))

    def test_peak_location(self, lorentzian_weak, ohmic_weak):
        """Test that J is largest at the reported peak frequency."""
        for bath in (lorentzian_weak, ohmic_weak):
            peak = peak_frequency(bath)
            omega = np.linspace(0.01, 5 * peak, 2001)
            assert omega[np.argmax(spectral_density(bath, omega))] == pytest.approx(peak, rel=5e-3)

    def test_lorentzian_form_matches_ohmic(self, ohmic_strong):
        """Test that the Drude bath is a Lorentzian of amplitude alpha*wc^2."""
        a, width = lorentzian_form(ohmic_strong)
        assert (a, width) == (pytest.approx(10.0), 10.0)
        omega = np.linspace(0.0, 50.0, 11)
        np.testing.assert_allclose(spectral_density(ohmic_strong, omega), 2 * a * omega / (omega ** 2 + width ** 2))

    @pytest.mark.parametrize("alpha, width", [(0.01, 0.09), (0.1, 0.3)])
    def test_lorentzian_tail(self, alpha, width):
        """Test J ~ 2 alpha / w for w >= 10 lambda."""
        omega = np.geomspace(10 * width, 1e3, 50)
        values = spectral_density(BathSpec.lorentzian(alpha, width), omega)
        assert np.max(np.abs(values * omega / (2 * alpha) - 1.0)) < 0.01

    @given(
        alpha=st.floats(min_value=0.0, max_value=1.0),
        width=st.floats(min_value=1e-3, max_value=0.99),
        omega=st.floats(min_value=0.0, max_value=1e4),
    )
    def test_nonnegative(self, alpha, width, omega):
        """Test that J >= 0 on the whole half-line."""
        for bath in (BathSpec.lorentzian(alpha, width), BathSpec.ohmic(alpha, 100 * width)):
            assert spectral_density(bath, omega) >= 0.0
