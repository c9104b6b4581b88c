"""Brute-force reference: the transformed model on a discretized bath.

The transformed Hamiltonian conserves the excitation number, so starting from
the excited qubit the dynamics stays in the (N+1)-dimensional sector spanned
by the qubit state and one quantum in each of N bath modes. That sector is
diagonalized exactly; the coupled amplitude equations integrated with an
adaptive Runge-Kutta scheme serve as an independent check of the propagation.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgError, eigh

from src.bath import BathKind, BathSpec, peak_frequency, spectral_density
from src.config import Numerics, resolve
from src.errors import ConsistencyError, DegenerateCaseError, DomainError, NumericalError
from src.renorm import solve_fixed_point

logger = logging.getLogger(__name__)

_CHUNK = 64
# relative agreement between the eigenvalue sum and the trace
_TRACE_RTOL = 1e-9


class Scheme(str, Enum):
    """Placement of the sampled bath modes."""

    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """N bath modes with couplings g_j, g_j^2 = J(w_j) dw_j."""

    omegas: np.ndarray
    gs: np.ndarray
    scheme: Scheme = Scheme.LINEAR
    omega_max: float = 200.0

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        gs = np.asarray(self.gs, dtype=float)
        if omegas.ndim != 1 or omegas.size == 0 or omegas.shape != gs.shape:
            raise DomainError("omegas and gs must be 1-d arrays of equal, non-zero length")
        if np.any(omegas <= 0) or np.any(np.diff(omegas) <= 0):
            raise DomainError("mode frequencies must be positive and strictly increasing")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "gs", gs)
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def n_modes(self) -> int:
        return int(self.omegas.size)

    @property
    def is_trivial(self) -> bool:
        return not np.any(self.gs)

    def weight_sum(self) -> float:
        """Sum of g_j^2, the discrete counterpart of Int J dw."""
        return float(np.sum(self.gs ** 2))


def discretize(
    bath: BathSpec,
    n: Optional[int] = None,
    omega_max: Optional[float] = None,
    scheme: Optional[Scheme] = None,
    numerics: Optional[Numerics] = None,
) -> DiscreteBath:
    """
    Sample ``bath`` at panel midpoints.

    The linear scheme splits [0, omega_max] evenly. The logarithmic scheme
    keeps a first panel [0, w_lo] and spaces the remaining edges
    geometrically from w_lo = 1e-3 * min(peak, Delta), which concentrates
    modes around a low-frequency peak. The default scheme is logarithmic
    for the Lorentzian bath and linear for the Ohmic bath.

    Args:
        bath: Bath model
        n: Number of modes (default ``numerics.oracle_modes``)
        omega_max: Truncation energy (default ``numerics.oracle_omega_max``)
        scheme: Sampling scheme
        numerics: Default source

    Returns:
        DiscreteBath
    """
    num = resolve(numerics)
    n = num.oracle_modes if n is None else int(n)
    omega_max = num.oracle_omega_max if omega_max is None else float(omega_max)
    if n < 2:
        raise DomainError(f"need at least two modes, got {n}")
    if not omega_max > 0:
        raise DomainError(f"omega_max must be > 0, got {omega_max!r}")
    if scheme is None:
        scheme = Scheme.LOGARITHMIC if bath.kind is BathKind.LORENTZIAN else Scheme.LINEAR
    scheme = Scheme(scheme)

    if scheme is Scheme.LINEAR:
        edges = np.linspace(0.0, omega_max, n + 1)
    else:
        lowest = 1e-3 * min(peak_frequency(bath), 1.0, omega_max)
        edges = np.concatenate([[0.0], np.geomspace(lowest, omega_max, n)])
    omegas = 0.5 * (edges[:-1] + edges[1:])
    gs = np.sqrt(spectral_density(bath, omegas) * np.diff(edges))
    logger.debug("discretized %s into %d %s modes up to %g", bath.label(), n, scheme.value, omega_max)
    return DiscreteBath(omegas, gs, scheme, omega_max)


def _discrete_eta_map(disc: DiscreteBath):
    g2 = disc.gs ** 2

    def gmap(eta: float) -> float:
        return math.exp(-float(np.sum(g2 / (2.0 * (disc.omegas + eta) ** 2))))

    return gmap


def oracle_eta(disc: DiscreteBath, numerics: Optional[Numerics] = None) -> float:
    """
    Solve eta = exp[-sum_j g_j^2 / (2 (w_j + eta)^2)] for the sampled bath.

    Raises:
        MethodValidityError: If the root is absent or not unique
        NumericalError: If the solver fails
    """
    if disc.is_trivial:
        return 1.0
    return solve_fixed_point(_discrete_eta_map(disc), numerics, label="discrete bath").eta


def recurrence_time(disc: DiscreteBath, eta: float) -> float:
    """2 pi over the mode spacing closest to the dressed splitting."""
    if disc.n_modes < 2:
        return math.inf
    spacing = np.diff(disc.omegas)
    i = int(np.clip(np.searchsorted(disc.omegas, eta) - 1, 0, spacing.size - 1))
    return 2.0 * math.pi / float(spacing[i])


class SingleExcitationOracle:
    """
    Exact propagation of the transformed model in the one-excitation sector.

    Args:
        disc: Sampled bath
        numerics: Solver settings
    """

    def __init__(self, disc: DiscreteBath, numerics: Optional[Numerics] = None):
        self.disc = disc
        self.numerics = resolve(numerics)
        self.eta = oracle_eta(disc, self.numerics)
        self.couplings = self.eta * disc.gs / (disc.omegas + self.eta)

        size = disc.n_modes + 1
        matrix = np.zeros((size, size))
        matrix[0, 0] = 0.5 * self.eta
        matrix[np.arange(1, size), np.arange(1, size)] = disc.omegas - 0.5 * self.eta
        matrix[0, 1:] = self.couplings
        matrix[1:, 0] = self.couplings

        try:
            energies, vectors = eigh(matrix)
        except (LinAlgError, ValueError) as e:
            raise NumericalError("diagonalization failed", {"size": size, "reason": str(e)}) from e

        trace = float(np.trace(matrix))
        if abs(float(energies.sum()) - trace) > _TRACE_RTOL * max(abs(trace), 1.0):
            raise ConsistencyError("eigenvalue sum differs from the trace", {"trace": trace})

        self.energies = energies
        self.overlaps = vectors[0, :] ** 2
        logger.debug("diagonalized %d x %d sector, eta=%.8f", size, size, self.eta)

    @property
    def recurrence_time(self) -> float:
        return recurrence_time(self.disc, self.eta)

    def sigma_x(self, times: Sequence[float]) -> np.ndarray:
        """sum_E |<E|0>|^2 cos((E + eta/2) t)."""
        t = np.asarray(times, dtype=float)
        frequencies = self.energies + 0.5 * self.eta
        values = np.empty_like(t)
        for start in range(0, t.size, _CHUNK):
            block = t[start:start + _CHUNK]
            values[start:start + _CHUNK] = np.cos(np.outer(block, frequencies)) @ self.overlaps
        return values

    def survival_amplitude(self, tau: float) -> complex:
        """chi(tau) = sum_E |<E|0>|^2 exp(-i E tau)."""
        return complex(np.sum(self.overlaps * np.exp(-1j * self.energies * tau)))

    def integrate_amplitudes(self, tau: float) -> complex:
        """
        chi(tau) in the interaction picture from the coupled amplitude
        equations, integrated with DOP853.
        """
        detuning = self.disc.omegas - self.eta
        v = self.couplings

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            phase = np.exp(-1j * detuning * t)
            dy = np.empty_like(y)
            dy[0] = -1j * np.dot(v * phase, y[1:])
            dy[1:] = -1j * v * np.conj(phase) * y[0]
            return dy

        y0 = np.zeros(self.disc.n_modes + 1, dtype=complex)
        y0[0] = 1.0
        solution = solve_ivp(rhs, (0.0, tau), y0, method="DOP853", rtol=1e-12, atol=1e-12)
        if not solution.success:
            raise NumericalError("amplitude equations failed", {"tau": tau, "message": solution.message})
        return complex(solution.y[0, -1])


@lru_cache(maxsize=8)
def _oracle_for(disc: DiscreteBath, numerics: Numerics) -> SingleExcitationOracle:
    return SingleExcitationOracle(disc, numerics)


def oracle_sigma_x(
    disc: DiscreteBath, times: Sequence[float], numerics: Optional[Numerics] = None
) -> np.ndarray:
    """
    <sigma_x(t)> of the discretized model.

    Results are trustworthy only below ``recurrence_time``; a warning is
    logged when ``times`` reach past it.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0):
        raise DomainError("times must be a 1-d sequence of values >= 0")
    oracle = _oracle_for(disc, resolve(numerics))
    if t.size and t.max() > oracle.recurrence_time:
        logger.warning("times extend past the recurrence time %.4g of the discrete bath", oracle.recurrence_time)
    return oracle.sigma_x(t)


def oracle_survival(disc: DiscreteBath, tau: float, numerics: Optional[Numerics] = None) -> float:
    """
    |chi(tau)|^2 by exact propagation, checked against the amplitude
    equations.

    Raises:
        DomainError: If ``tau`` is negative
        ConsistencyError: If the two evaluations disagree beyond
            ``oracle_consistency_tol``
    """
    if not tau >= 0:
        raise DomainError(f"tau must be >= 0, got {tau!r}")
    num = resolve(numerics)
    if tau == 0 or disc.is_trivial:
        return 1.0
    oracle = _oracle_for(disc, num)
    exact = abs(oracle.survival_amplitude(tau)) ** 2
    integrated = abs(oracle.integrate_amplitudes(tau)) ** 2
    if abs(exact - integrated) > num.oracle_consistency_tol:
        raise ConsistencyError(
            "eigen-propagation and amplitude equations disagree",
            {"tau": tau, "exact": exact, "integrated": integrated},
        )
    return exact


def oracle_gamma(disc: DiscreteBath, tau: float, numerics: Optional[Numerics] = None) -> float:
    """
    Effective rate -ln|chi(tau)|^2 / tau under projections every ``tau``.

    Raises:
        DomainError: If ``tau`` is not positive
        DegenerateCaseError: If the survival probability vanishes
    """
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau!r}")
    if disc.is_trivial:
        return 0.0
    survival = abs(_oracle_for(disc, resolve(numerics)).survival_amplitude(tau)) ** 2
    if survival <= 0.0:
        raise DegenerateCaseError("survival probability vanished", {"tau": tau})
    return -math.log(survival) / tau + 0.0


def oracle_gamma_second_order(disc: DiscreteBath, tau: float, numerics: Optional[Numerics] = None) -> float:
    """
    Lowest-order part of ``oracle_gamma``: tau sum_j V_j^2 sinc^2((w_j - eta) tau / 2).

    This is the discrete counterpart of the first-iteration gamma(tau); the
    difference to ``oracle_gamma`` is the higher-order remainder.
    """
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau!r}")
    if disc.is_trivial:
        return 0.0
    oracle = _oracle_for(disc, resolve(numerics))
    x = (disc.omegas - oracle.eta) * tau / 2.0
    return float(tau * np.sum(oracle.couplings ** 2 * np.sinc(x / math.pi) ** 2))
