"""Measurement-free coherence dynamics <sigma_x(t)>.

<sigma_x(t)> = Int_0^inf x(w) cos(w t) dw with the spectral weight
x(w) = Gamma(w) / (pi [(w - eta - R(w))^2 + Gamma(w)^2]). The weight is
sharply peaked at the dressed frequency w0, the root of w - eta - R(w), so
the integral is assembled from a composite Gauss-Legendre rule refined in a
window of half-width max(20 Gamma(w0), 0.05) around w0.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from lmfit import Minimizer, Parameters
from scipy.optimize import bisect

from src.bath import BathSpec, peak_frequency
from src.config import Numerics, resolve
from src.errors import DomainError, NumericalError, PoleNotFoundError
from src.quadrature import adaptive_nodes
from src.renorm import solve_eta
from src.selfenergy import decay_width, level_shift, level_shift_function, spectral_weight

logger = logging.getLogger(__name__)

DEFAULT_TIMES = np.round(np.arange(0.0, 50.0 + 1e-9, 0.05), 10)

_CHUNK = 32


class Shift(str, Enum):
    """Direction of the renormalized qubit frequency relative to Delta."""

    BLUE = "blue"
    RED = "red"
    NONE = "none"


@dataclass(frozen=True)
class Pole:
    """Root of the pole condition and the width there."""

    omega0: float
    gamma_pole: float
    multiple_roots: bool = False
    residue: float = 1.0


@dataclass(frozen=True)
class DynamicsSeries:
    """Sampled coherence with its pole diagnostics."""

    times: np.ndarray
    values: np.ndarray
    omega0: Optional[float] = None
    gamma_pole: Optional[float] = None
    shift: Shift = Shift.NONE
    eta: float = 1.0
    warnings: list = field(default_factory=list)

    @property
    def coherence_time(self) -> float:
        """1 / Gamma(w0)."""
        if not self.gamma_pole:
            return math.inf
        return 1.0 / self.gamma_pole


@dataclass(frozen=True)
class DampedCosineFit:
    """A exp(-rate t) cos(freq t + phase) fitted to a series."""

    freq: float
    rate: float
    amp: float
    phase: float
    residual_norm: float


def classify_shift(omega0: float, tol: float = 1e-6) -> Shift:
    """Blue above Delta, red below, none within ``tol``."""
    if not omega0 > 0:
        raise DomainError(f"pole frequency must be > 0, got {omega0!r}")
    if omega0 > 1.0 + tol:
        return Shift.BLUE
    if omega0 < 1.0 - tol:
        return Shift.RED
    return Shift.NONE


@lru_cache(maxsize=128)
def _find_pole_cached(bath: BathSpec, num: Numerics) -> Pole:
    eta = solve_eta(bath, numerics=num).eta
    if bath.is_trivial:
        return Pole(1.0, 0.0)

    shift = level_shift_function(bath, eta, num)
    grid = np.linspace(num.omega_max / num.scan_points, num.omega_max, num.scan_points)
    p = grid - eta - shift(grid)
    crossings = np.nonzero(np.sign(p[:-1]) != np.sign(p[1:]))[0]
    if crossings.size == 0:
        raise PoleNotFoundError("pole condition has no sign change", {"bath": bath.label(), "eta": eta})
    multiple = crossings.size > 1
    i = int(crossings[np.argmin(np.abs(grid[crossings] - eta))])
    if multiple:
        logger.warning("%s: %d pole candidates, using the one nearest eta", bath.label(), crossings.size)

    def condition(w: float) -> float:
        return w - eta - level_shift(bath, eta, w, num)

    lo, hi = grid[i], grid[i + 1]
    # the interpolated scan may misplace a bracket edge by a hair
    while condition(lo) * condition(hi) > 0:
        lo, hi = max(lo - (hi - lo), grid[0] / 2), hi + (hi - lo)
        if hi > 2 * num.omega_max:
            raise PoleNotFoundError("could not bracket the pole", {"bath": bath.label()})
    omega0 = bisect(condition, lo, hi, xtol=num.pole_tol, maxiter=200)

    step = 1e-5 * omega0
    slope = (level_shift(bath, eta, omega0 + step, num) - level_shift(bath, eta, omega0 - step, num)) / (2 * step)
    return Pole(omega0, float(decay_width(bath, eta, omega0)), multiple, 1.0 / (1.0 - slope))


def find_pole(bath: BathSpec, numerics: Optional[Numerics] = None) -> Pole:
    """
    Locate the dressed frequency w0 from w0 - eta - R(w0) = 0.

    A sign scan on ``scan_points`` points over (0, omega_max] brackets the
    root, bisection refines it to ``pole_tol``. With several roots the one
    nearest eta is returned and flagged.

    Raises:
        PoleNotFoundError: If the pole condition never changes sign
    """
    return _find_pole_cached(bath, resolve(numerics))


def _validate_times(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("times must be a non-empty 1-d sequence")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("times must be finite and >= 0")
    if np.any(np.diff(t) <= 0):
        raise DomainError("times must be strictly increasing")
    return t


def sigma_x_series(
    bath: BathSpec,
    times: Sequence[float] = DEFAULT_TIMES,
    numerics: Optional[Numerics] = None,
) -> DynamicsSeries:
    """
    Compute <sigma_x(t)> on a time grid.

    Args:
        bath: Bath model
        times: Non-negative, strictly increasing times
        numerics: Quadrature settings

    Returns:
        DynamicsSeries
    """
    num = resolve(numerics)
    t = _validate_times(times)
    eta = solve_eta(bath, numerics=num).eta
    if bath.is_trivial:
        return DynamicsSeries(t, np.cos(t), 1.0, 0.0, Shift.NONE, 1.0)

    pole = find_pole(bath, num)
    shift = level_shift_function(bath, eta, num)
    half_window = max(20.0 * pole.gamma_pole, 0.05)
    edges = [0.0, pole.omega0 - half_window, pole.omega0 + half_window, num.omega_max, eta, peak_frequency(bath)]
    edges = [e for e in edges if 0.0 <= e <= num.omega_max]
    t_max = float(t.max())
    max_width = math.pi / (4.0 * t_max) if t_max > 0 else None

    def weight(w: np.ndarray) -> np.ndarray:
        return spectral_weight(bath, eta, w, num, shift=shift)

    nodes, weights = adaptive_nodes(weight, edges, rtol=num.window_rtol, max_width=max_width)
    density = weights * weight(nodes)
    if not np.all(np.isfinite(density)):
        bad = nodes[~np.isfinite(density)]
        raise NumericalError("non-finite spectral weight", {"panel": (float(bad.min()), float(bad.max()))})

    values = np.empty_like(t)
    for start in range(0, t.size, _CHUNK):
        block = t[start:start + _CHUNK]
        values[start:start + _CHUNK] = np.cos(np.outer(block, nodes)) @ density

    warnings = []
    if pole.multiple_roots:
        warnings.append("several roots of the pole condition; the one nearest eta was used")
    logger.debug("%s: %d quadrature nodes, w0=%.6f", bath.label(), nodes.size, pole.omega0)
    return DynamicsSeries(
        t, values, pole.omega0, pole.gamma_pole, classify_shift(pole.omega0, num.shift_tol), eta, warnings
    )


def residue_series(bath: BathSpec, times: Sequence[float], numerics: Optional[Numerics] = None) -> np.ndarray:
    """Single-pole estimate A exp(-Gamma(w0) t) cos(w0 t)."""
    t = _validate_times(times)
    pole = find_pole(bath, numerics)
    return pole.residue * np.exp(-pole.gamma_pole * t) * np.cos(pole.omega0 * t)


def _damped_cosine_residual(params: Parameters, t: np.ndarray, data: np.ndarray) -> np.ndarray:
    model = params["amp"] * np.exp(-params["rate"] * t) * np.cos(params["freq"] * t + params["phase"])
    return model - data


def fit_damped_cosine(series: DynamicsSeries) -> DampedCosineFit:
    """
    Least-squares fit of A exp(-G t) cos(w t + phi) to a series.

    The pole values carried by the series seed the fit; without them the
    dominant FFT frequency is used.

    Raises:
        DomainError: If the series spans fewer than five periods
        NumericalError: If the minimizer fails
    """
    t = np.asarray(series.times, dtype=float)
    y = np.asarray(series.values, dtype=float)
    if series.omega0:
        freq_guess = float(series.omega0)
    else:
        spectrum = np.abs(np.fft.rfft(y - y.mean()))
        freqs = 2 * math.pi * np.fft.rfftfreq(t.size, d=float(np.mean(np.diff(t))))
        freq_guess = float(freqs[int(np.argmax(spectrum))])
    if (t[-1] - t[0]) * freq_guess / (2 * math.pi) < 5:
        raise DomainError("damped-cosine fit needs at least five oscillation periods")

    params = Parameters()
    params.add("amp", value=max(abs(y[0]), 1e-3), min=0)
    # a start on the bound would freeze the rate
    params.add("rate", value=float(series.gamma_pole or 1.0 / (t[-1] - t[0])), min=0)
    params.add("freq", value=freq_guess, min=0)
    params.add("phase", value=0.0, min=-math.pi, max=math.pi)

    result = Minimizer(_damped_cosine_residual, params, fcn_args=(t, y)).minimize(method="leastsq")
    values = [result.params[name].value for name in ("freq", "rate", "amp", "phase")]
    if not result.success or not all(np.isfinite(values)):
        raise NumericalError("damped-cosine fit diverged", {"message": result.message})
    return DampedCosineFit(*values, residual_norm=float(np.linalg.norm(result.residual)))
