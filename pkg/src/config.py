"""Numerical settings shared by every module.

All tolerances, grid sizes and truncation energies live in one frozen
``Numerics`` instance so that a run is fully described by its configuration
and solver results can be memoized on it.
"""

import dataclasses
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from src.errors import ConfigError


@dataclass(frozen=True)
class Numerics:
    """Tolerances and truncations, energies in units of Delta."""

    # self-consistent renormalization
    eta_tol: float = 1e-12
    eta_max_iter: int = 10_000
    eta_damping: float = 0.5
    eta_floor: float = 1e-6
    scan_points: int = 1000

    # adaptive quadrature
    quad_epsabs: float = 1e-13
    quad_epsrel: float = 1e-10
    quad_limit: int = 500

    # principal value
    pv_delta_rel: float = 1e-3
    pv_tail_tol: float = 1e-10

    # spectral integrals and pole search
    omega_max: float = 100.0
    pole_tol: float = 1e-10
    window_rtol: float = 1e-6
    shift_tol: float = 1e-6

    # measurement-modulated decay
    regime_tol: float = 1e-3
    zeno_lobes: int = 10

    # discrete-bath oracle
    oracle_modes: int = 2000
    oracle_omega_max: float = 200.0
    oracle_consistency_tol: float = 1e-8

    def __post_init__(self):
        positive = (
            "eta_tol", "eta_floor", "quad_epsrel", "pv_delta_rel", "pv_tail_tol",
            "pole_tol", "window_rtol", "shift_tol", "regime_tol",
            "oracle_omega_max", "oracle_consistency_tol",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"numerics.{name} must be > 0, got {getattr(self, name)!r}")
        if self.quad_epsabs < 0:
            raise ConfigError("numerics.quad_epsabs must be >= 0")
        if not 0 < self.eta_damping <= 1:
            raise ConfigError("numerics.eta_damping must lie in (0, 1]")
        if not self.eta_floor < 1:
            raise ConfigError("numerics.eta_floor must be < 1")
        if self.omega_max < 100:
            raise ConfigError("numerics.omega_max must be >= 100")
        for name in ("eta_max_iter", "scan_points", "quad_limit", "zeno_lobes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"numerics.{name} must be >= 1")
        if self.oracle_modes < 2:
            raise ConfigError("numerics.oracle_modes must be >= 2")

    def replace(self, **overrides: Any) -> "Numerics":
        """Return a validated copy with some fields replaced."""
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown numerics keys: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **overrides)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_NUMERICS = Numerics()


def resolve(numerics: Optional[Numerics]) -> Numerics:
    """Return ``numerics`` or the defaults when it is None."""
    return DEFAULT_NUMERICS if numerics is None else numerics
