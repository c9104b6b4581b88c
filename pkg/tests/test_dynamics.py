"""Tests for the coherence dynamics and the pole search."""

import numpy as np
import pytest

from src.bath import BathSpec
from src.config import DEFAULT_NUMERICS
from src.dynamics import (
    DEFAULT_TIMES,
    DynamicsSeries,
    Shift,
    classify_shift,
    find_pole,
    fit_damped_cosine,
    residue_series,
    sigma_x_series,
)
from src.errors import DomainError, PoleNotFoundError


class TestClassifyShift:
    """Tests for classify_shift."""

    @pytest.mark.parametrize(
        "omega0, expected",
        [(1.0225, Shift.BLUE), (0.97720, Shift.RED), (1.0, Shift.NONE), (1.0 + 1e-7, Shift.NONE)],
    )
    def test_classification(self, omega0, expected):
        """Test blue above Delta, red below, none within tolerance."""
        assert classify_shift(omega0) is expected

    def test_nonpositive_rejected(self):
        """Test that a non-positive frequency is a domain error."""
        with pytest.raises(DomainError):
            classify_shift(0.0)


class TestFindPole:
    """Tests for find_pole."""

    def test_weak_lorentzian(self, lorentzian_weak):
        """Test the blue-shifted pole of the weak low-frequency bath."""
        pole = find_pole(lorentzian_weak)
        assert pole.omega0 == pytest.approx(1.0225, abs=2e-3)
        assert pole.gamma_pole == pytest.approx(0.014654, rel=0.02)
        assert not pole.multiple_roots

    def test_residue_close_to_one(self, lorentzian_weak):
        """Test that weak coupling leaves most weight in the pole."""
        assert 0.9 < find_pole(lorentzian_weak).residue < 1.1

    def test_trivial_bath(self, trivial_bath):
        """Test that the isolated qubit oscillates at Delta without damping."""
        pole = find_pole(trivial_bath)
        assert (pole.omega0, pole.gamma_pole) == (1.0, 0.0)

    def test_no_sign_change(self, mocker):
        """Test that a pole condition without a root is reported."""
        mocker.patch("src.dynamics.level_shift_function", return_value=lambda w: np.full_like(w, -1e3))
        with pytest.raises(PoleNotFoundError):
            find_pole(BathSpec.lorentzian(0.02, 0.3), DEFAULT_NUMERICS.replace(pole_tol=1e-9))


class TestSigmaXSeries:
    """Tests for sigma_x_series."""

    def test_trivial_bath_is_cosine(self, trivial_bath):
        """Test that alpha = 0 gives cos(t)."""
        series = sigma_x_series(trivial_bath, DEFAULT_TIMES)
        np.testing.assert_allclose(series.values, np.cos(DEFAULT_TIMES))
        assert series.shift is Shift.NONE

    def test_weak_lorentzian(self, lorentzian_weak):
        """Test the initial value, bounds and blue shift."""
        series = sigma_x_series(lorentzian_weak)
        assert 0.97 <= series.values[0] <= 1.001
        assert np.max(np.abs(series.values)) <= 1.001
        assert series.shift is Shift.BLUE
        assert series.coherence_time == pytest.approx(1.0 / series.gamma_pole)

    def test_envelope_decays(self, lorentzian_weak):
        """Test that the late-time amplitude is below the early one."""
        series = sigma_x_series(lorentzian_weak, np.linspace(0.0, 150.0, 301))
        early = np.max(np.abs(series.values[:20]))
        late = np.max(np.abs(series.values[-20:]))
        assert late < early

    @pytest.mark.parametrize("bath_name", ["lorentzian_weak", "ohmic_weak", "lorentzian_strong", "ohmic_strong"])
    def test_never_exceeds_initial_value(self, bath_name, request):
        """Test |<sigma_x(t)>| <= <sigma_x(0)> + 1e-3."""
        series = sigma_x_series(request.getfixturevalue(bath_name), np.linspace(0.0, 50.0, 1001))
        assert np.max(np.abs(series.values[1:])) <= series.values[0] + 1e-3

    @pytest.mark.parametrize("bath_name", ["lorentzian_weak", "ohmic_strong"])
    @pytest.mark.parametrize(
        "changed",
        [
            DEFAULT_NUMERICS.replace(omega_max=2 * DEFAULT_NUMERICS.omega_max),
            DEFAULT_NUMERICS.replace(window_rtol=DEFAULT_NUMERICS.window_rtol / 2),
        ],
        ids=["omega_max", "window_rtol"],
    )
    def test_insensitive_to_numerics(self, bath_name, changed, request):
        """Test that a wider cutoff or a tighter window tolerance moves the series by < 1e-4."""
        bath = request.getfixturevalue(bath_name)
        times = np.linspace(0.0, 50.0, 201)
        baseline = sigma_x_series(bath, times).values
        assert np.max(np.abs(sigma_x_series(bath, times, changed).values - baseline)) < 1e-4

    @pytest.mark.parametrize("times", [[0.0, -1.0], [1.0, 0.5], []])
    def test_invalid_times(self, lorentzian_weak, times):
        """Test that negative, unsorted or empty grids are rejected."""
        with pytest.raises(DomainError):
            sigma_x_series(lorentzian_weak, times)

    def test_pole_failure_propagates(self, lorentzian_weak, mocker):
        """Test that a failed pole search is not swallowed."""
        mocker.patch("src.dynamics.find_pole", side_effect=PoleNotFoundError("no root"))
        with pytest.raises(PoleNotFoundError):
            sigma_x_series(lorentzian_weak, [0.0, 1.0])


class TestResidueSeries:
    """Tests for residue_series."""

    def test_matches_integral_at_weak_coupling(self, lorentzian_weak):
        """Test the single-pole estimate against the full integral."""
        times = np.linspace(0.0, 50.0, 501)
        exact = sigma_x_series(lorentzian_weak, times).values
        estimate = residue_series(lorentzian_weak, times)
        assert np.max(np.abs(exact - estimate)) < 0.05


class TestFitDampedCosine:
    """Tests for fit_damped_cosine."""

    def test_recovers_synthetic_parameters(self):
        """Test the fit on an exact damped cosine without a pole hint."""
        t = np.linspace(0.0, 50.0, 1001)
        series = DynamicsSeries(t, 0.9 * np.exp(-0.02 * t) * np.cos(1.01 * t + 0.1))
        fit = fit_damped_cosine(series)
        assert fit.freq == pytest.approx(1.01, abs=1e-6)
        assert fit.rate == pytest.approx(0.02, abs=1e-6)
        assert fit.amp == pytest.approx(0.9, abs=1e-6)

    def test_uses_pole_as_seed(self):
        """Test the fit seeded from the series pole values."""
        t = np.linspace(0.0, 60.0, 1201)
        series = DynamicsSeries(t, np.exp(-0.015 * t) * np.cos(0.977 * t), omega0=0.97, gamma_pole=0.01)
        fit = fit_damped_cosine(series)
        assert fit.freq == pytest.approx(0.977, rel=1e-6)
        assert fit.rate == pytest.approx(0.015, rel=1e-5)

    def test_too_short(self):
        """Test that fewer than five periods are rejected."""
        t = np.linspace(0.0, 10.0, 201)
        with pytest.raises(DomainError):
            fit_damped_cosine(DynamicsSeries(t, np.cos(t), omega0=1.0))
