"""Level shift R(w) and decay width Gamma(w) of the dressed qubit.

Both are the real and imaginary parts of sum_k V_k^2 / (w - w_k +- i0+)
with the renormalized coupling V_k = eta * g_k * xi_k / w_k, i.e. the
spectral density eta^2 J(w) / (w + eta)^2.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from src.bath import ArrayLike, BathKind, BathSpec, lorentzian_form, peak_frequency, spectral_density
from src.config import Numerics, resolve
from src.errors import DomainError
from src.quadrature import integrate

logger = logging.getLogger(__name__)

# absolute agreement required between the closed form and the PV oracle
CLOSED_FORM_TOL = 1e-6


@dataclass(frozen=True)
class SelfEnergySample:
    """Self-energy at one frequency."""

    omega: float
    R: float
    Gamma: float


def _renormalized_density(bath: BathSpec, eta: float, x: ArrayLike) -> ArrayLike:
    return eta ** 2 * spectral_density(bath, x) / (np.asarray(x) + eta) ** 2


def decay_width(bath: BathSpec, eta: float, omega: ArrayLike) -> ArrayLike:
    """
    Gamma(w) = pi * eta^2 * J(w) / (w + eta)^2.

    Raises:
        DomainError: If any energy is negative
    """
    value = math.pi * _renormalized_density(bath, eta, omega)
    return float(value) if np.ndim(value) == 0 else value


def level_shift_closed_form(amplitude: float, width: float, eta: float, omega: ArrayLike) -> ArrayLike:
    """
    R(w) for J = 2*a*w / (w^2 + width^2), grouped as the three terms
    carrying log|w|, log|width| and log|eta|.
    """
    w = np.asarray(omega, dtype=float)
    lam2 = width ** 2
    s = lam2 + eta ** 2
    first = w * np.log(w) / ((eta + w) ** 2 * (lam2 + w ** 2))
    second = (
        math.pi * width * (lam2 + eta * (-eta + 2.0 * w))
        - 2.0 * (lam2 * (2.0 * eta - w) + eta ** 2 * w) * math.log(width)
    ) / (2.0 * s ** 2 * (lam2 + w ** 2))
    third = (
        -(eta + w) * s + (2.0 * eta ** 3 + (eta ** 2 - lam2) * w) * math.log(eta)
    ) / (s ** 2 * (eta + w) ** 2)
    value = 2.0 * amplitude * eta ** 2 * (first + second + third)
    return float(value) if value.ndim == 0 else value


def _pv_cutoff(bath: BathSpec, eta: float, omega: float, delta: float, num: Numerics) -> float:
    a, width = lorentzian_form(bath)
    tail = (2.0 * a * eta ** 2 / (3.0 * num.pv_tail_tol)) ** (1.0 / 3.0)
    return max(10.0 * (omega + delta), 10.0 * width, 10.0, tail)


def pv_integral(bath: BathSpec, eta: float, omega: float, numerics: Optional[Numerics] = None) -> float:
    """
    Principal value of Int_0^inf eta^2 J(x) / ((w - x)(x + eta)^2) dx.

    The pole is excised symmetrically: [0, w-d] and [w+d, W] are integrated
    directly and the core is folded onto Int_0^d [g(w-u) - g(w+u)] / u du,
    which is regular at u = 0. ``d = pv_delta_rel * max(w, 1)`` and W is
    chosen so the dropped 1/x^4 tail stays below ``pv_tail_tol``.

    Raises:
        DomainError: If ``omega`` is not positive
        NumericalError: If a panel fails to converge
    """
    num = resolve(numerics)
    if not omega > 0:
        raise DomainError(f"principal value requires omega > 0, got {omega!r}")
    if bath.is_trivial:
        return 0.0

    def g(x: float) -> float:
        return eta ** 2 * spectral_density(bath, x) / (x + eta) ** 2

    delta = min(num.pv_delta_rel * max(omega, 1.0), 0.5 * omega)
    cutoff = _pv_cutoff(bath, eta, omega, delta, num)
    peak = peak_frequency(bath)

    left = integrate(
        lambda x: g(x) / (omega - x), 0.0, omega - delta, num, points=[peak, eta], label="pv left"
    )
    core = integrate(lambda u: (g(omega - u) - g(omega + u)) / u, 0.0, delta, num, label="pv core")
    breaks = list(np.geomspace(omega + delta, cutoff, 12)[1:-1]) + [peak]
    right = integrate(
        lambda x: g(x) / (omega - x), omega + delta, cutoff, num, points=breaks, label="pv right"
    )
    return left + core + right


def level_shift(
    bath: BathSpec,
    eta: float,
    omega: ArrayLike,
    numerics: Optional[Numerics] = None,
    cross_check: bool = False,
) -> ArrayLike:
    """
    Evaluate R(w).

    The Lorentzian bath uses the closed form; the Ohmic bath uses
    ``pv_integral``. With ``cross_check`` the closed form is compared with the
    principal value and the principal value wins on a mismatch.

    Raises:
        DomainError: If any energy is not positive
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("level shift diverges logarithmically at omega = 0")
    if bath.is_trivial:
        return 0.0 if w.ndim == 0 else np.zeros_like(w)

    if bath.kind is BathKind.OHMIC:
        values = np.vectorize(lambda x: pv_integral(bath, eta, float(x), numerics), otypes=[float])(w)
        return float(values) if w.ndim == 0 else values

    a, width = lorentzian_form(bath)
    values = np.asarray(level_shift_closed_form(a, width, eta, w))
    if cross_check:
        reference = np.vectorize(lambda x: pv_integral(bath, eta, float(x), numerics), otypes=[float])(w)
        mismatch = np.abs(values - reference) > CLOSED_FORM_TOL
        if np.any(mismatch):
            logger.warning(
                "closed-form level shift differs from the principal value at %d points (max %.3g); using PV",
                int(mismatch.sum()),
                float(np.max(np.abs(values - reference))),
            )
            values = np.where(mismatch, reference, values)
    return float(values) if w.ndim == 0 else values


def self_energy(bath: BathSpec, eta: float, omega: float, numerics: Optional[Numerics] = None) -> SelfEnergySample:
    """R and Gamma at one frequency."""
    return SelfEnergySample(
        omega=float(omega),
        R=float(level_shift(bath, eta, omega, numerics)),
        Gamma=float(decay_width(bath, eta, omega)),
    )


@lru_cache(maxsize=64)
def level_shift_function(
    bath: BathSpec, eta: float, numerics: Optional[Numerics] = None
) -> Callable[[np.ndarray], np.ndarray]:
    """
    A vectorized R(w) for dense frequency grids.

    The Lorentzian closed form is returned directly. For the Ohmic bath the
    principal value is tabulated on a log grid over (0, omega_max] plus a
    dense grid around the qubit splitting and interpolated with a cubic
    spline.
    """
    num = resolve(numerics)
    if bath.is_trivial:
        return lambda w: np.zeros_like(np.asarray(w, dtype=float))
    if bath.kind is BathKind.LORENTZIAN:
        a, width = lorentzian_form(bath)
        return lambda w: level_shift_closed_form(a, width, eta, w)

    nodes = np.unique(
        np.concatenate([np.geomspace(1e-4, 2.0 * num.omega_max, 240), np.linspace(0.02, 4.0, 400)])
    )
    values = np.array([pv_integral(bath, eta, float(x), num) for x in nodes])
    logger.debug("tabulated Ohmic level shift on %d nodes", nodes.size)
    return CubicSpline(nodes, values)


def spectral_weight(
    bath: BathSpec,
    eta: float,
    omega: ArrayLike,
    numerics: Optional[Numerics] = None,
    shift: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> ArrayLike:
    """
    x(w) = Gamma / (pi [(w - eta - R)^2 + Gamma^2]), the weight whose cosine
    transform is <sigma_x(t)>.
    """
    w = np.asarray(omega, dtype=float)
    shift = shift or level_shift_function(bath, eta, numerics)
    gamma = decay_width(bath, eta, w)
    detuning = w - eta - shift(w)
    value = gamma / (math.pi * (detuning ** 2 + gamma ** 2))
    return float(value) if np.ndim(value) == 0 else value
