"""Tests for numerical settings and the error hierarchy."""

import pytest

from src.config import DEFAULT_NUMERICS, Numerics, resolve
from src.errors import ConfigError, DomainError, GridError, NumericalError, PoleNotFoundError, ZenoError


class TestNumerics:
    """Tests for the Numerics settings."""

    def test_defaults(self):
        """Test the documented default tolerances."""
        assert DEFAULT_NUMERICS.eta_tol == 1e-12
        assert DEFAULT_NUMERICS.omega_max == 100.0
        assert DEFAULT_NUMERICS.oracle_modes == 2000

    def test_replace_validates(self):
        """Test that replace returns a checked copy."""
        num = DEFAULT_NUMERICS.replace(quad_epsrel=1e-8)
        assert num.quad_epsrel == 1e-8
        assert DEFAULT_NUMERICS.quad_epsrel == 1e-10
        with pytest.raises(ConfigError):
            DEFAULT_NUMERICS.replace(eta_damping=0.0)

    def test_replace_unknown_key(self):
        """Test that unknown fields are named in the error."""
        with pytest.raises(ConfigError, match="colour"):
            DEFAULT_NUMERICS.replace(colour=1)

    @pytest.mark.parametrize(
        "overrides",
        [{"eta_tol": 0.0}, {"quad_epsabs": -1.0}, {"eta_floor": 1.0}, {"omega_max": 50.0},
         {"oracle_modes": 1}, {"zeno_lobes": 0}],
    )
    def test_invalid_values(self, overrides):
        """Test construction-time validation."""
        with pytest.raises(ConfigError):
            Numerics(**overrides)

    def test_hashable_and_equal(self):
        """Test that equal settings share a hash, so results can be memoized."""
        assert hash(Numerics()) == hash(DEFAULT_NUMERICS)
        assert Numerics(zeno_lobes=4) != DEFAULT_NUMERICS

    def test_resolve(self):
        """Test that None resolves to the defaults."""
        assert resolve(None) is DEFAULT_NUMERICS
        custom = Numerics(zeno_lobes=4)
        assert resolve(custom) is custom

    def test_as_dict(self):
        """Test the plain-dict view."""
        assert DEFAULT_NUMERICS.as_dict()["regime_tol"] == 1e-3


class TestErrors:
    """Tests for error messages and the class hierarchy."""

    def test_config_error_line(self):
        """Test that the line number prefixes the message."""
        err = ConfigError("unknown key 'bath.colour'", 3)
        assert str(err) == "line 3: unknown key 'bath.colour'"
        assert err.line == 3

    def test_numerical_error_context(self):
        """Test that diagnostics are appended in key order."""
        err = NumericalError("quadrature did not converge", {"panel": (0.0, 1.0), "abserr": 0.1})
        assert str(err) == "quadrature did not converge (abserr=0.1, panel=(0.0, 1.0))"

    def test_grid_error(self):
        """Test the grid failure summary."""
        err = GridError([(0, "a"), (1, "b")])
        assert str(err) == "all 2 grid cells failed"
        assert err.failures == [(0, "a"), (1, "b")]

    def test_hierarchy(self):
        """Test that callers can catch by family."""
        assert issubclass(DomainError, ValueError)
        assert issubclass(PoleNotFoundError, NumericalError)
        for cls in (DomainError, ConfigError, NumericalError, GridError):
            assert issubclass(cls, ZenoError)
