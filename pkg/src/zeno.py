"""Measurement-modulated decay: quantum Zeno and anti-Zeno rates.

With ideal projections every tau the excited-state survival decays as
exp[-gamma(tau) t], where

    gamma(tau) = 2 pi Int_0^inf (J(w)/4) f(w) F(w, tau) dw,
    F(w, tau)  = 2 sin^2((eta - w) tau / 2) / (pi (eta - w)^2 tau),
    f(w)       = (2 eta / (w + eta))^2.

The rotating-wave rate uses the same kernel centred on Delta with f = 1;
both tend to gamma0 = 2 pi J(Delta) / 4 without measurements.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.bath import ArrayLike, BathSpec, peak_frequency, spectral_density
from src.config import Numerics, resolve
from src.dynamics import find_pole
from src.errors import DomainError
from src.quadrature import integrate
from src.renorm import solve_eta

logger = logging.getLogger(__name__)

DEFAULT_TAUS = np.geomspace(1e-2, 20.0, 200)


class Regime(str, Enum):
    """Effect of frequent measurement on the decay rate."""

    ZENO = "zeno"
    ANTI_ZENO = "anti-zeno"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class ZenoCurve:
    """Effective decay rates over a grid of measurement intervals."""

    taus: np.ndarray
    gamma: np.ndarray
    gamma_rwa: np.ndarray
    gamma0: float
    ratio: np.ndarray
    ratio_rwa: np.ndarray
    regime: List[Regime]
    eta: float = 1.0

    @property
    def has_anti_zeno_window(self) -> bool:
        return any(r is Regime.ANTI_ZENO for r in self.regime)


def kernel_F(omega: ArrayLike, eta: float, tau: float) -> ArrayLike:
    """
    Projection-time modulating function, a Fejer kernel of unit area.

    At w = eta the value is the limit tau / (2 pi).
    """
    if not tau > 0:
        raise DomainError(f"measurement interval must be > 0, got {tau!r}")
    x = (eta - np.asarray(omega, dtype=float)) * tau / 2.0
    value = tau / (2.0 * math.pi) * np.sinc(x / math.pi) ** 2
    return float(value) if np.ndim(value) == 0 else value


def interaction_f(omega: ArrayLike, eta: float) -> ArrayLike:
    """Counter-rotating weight (2 eta / (w + eta))^2."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("interaction weight requires omega >= 0")
    value = (2.0 * eta / (w + eta)) ** 2
    return float(value) if value.ndim == 0 else value


def _measured_rate(
    bath: BathSpec,
    center: float,
    tau: float,
    weight: Callable[[float], float],
    num: Numerics,
) -> float:
    """
    (pi/2) Int_0^inf J(w) weight(w) F(w - center, tau) dw.

    The ``zeno_lobes`` lobes on each side of ``center`` are integrated
    directly with their zeros as breakpoints. Outside them the integrand is
    h(w) [1 - cos(tau (w - center))] with a smooth h, handled by QUADPACK's
    oscillatory weights on finite pieces and on the infinite tail.
    """
    if not tau > 0:
        raise DomainError(f"measurement interval must be > 0, got {tau!r}")
    peak = peak_frequency(bath)
    lobe = 2.0 * math.pi / tau

    def integrand(w: float) -> float:
        return 0.5 * math.pi * spectral_density(bath, w) * weight(w) * kernel_F(w, center, tau)

    def smooth(w: float) -> float:
        return spectral_density(bath, w) * weight(w) / (2.0 * tau * (w - center) ** 2)

    core_lo = max(0.0, center - num.zeno_lobes * lobe)
    core_hi = center + num.zeno_lobes * lobe
    points = [center + k * lobe for k in range(-num.zeno_lobes + 1, num.zeno_lobes)]
    points += [peak, 10.0 * peak]
    total = integrate(integrand, core_lo, core_hi, num, points=points, label=f"zeno core tau={tau:g}")

    cos_c, sin_c = math.cos(tau * center), math.sin(tau * center)

    def oscillating(lo: float, hi: float) -> float:
        plain = integrate(smooth, lo, hi, num, label="zeno smooth")
        cos_part = integrate(smooth, lo, hi, num, weight="cos", wvar=tau, label="zeno cos")
        sin_part = integrate(smooth, lo, hi, num, weight="sin", wvar=tau, label="zeno sin")
        return plain - cos_c * cos_part - sin_c * sin_part

    if core_lo > 0:
        left = sorted({0.0, core_lo, *[b for b in (peak,) if 0.0 < b < core_lo]})
        for lo, hi in zip(left[:-1], left[1:]):
            total += oscillating(lo, hi)

    right = [core_hi] + sorted(b for b in (peak, 10.0 * peak) if b > core_hi)
    for lo, hi in zip(right[:-1], right[1:]):
        total += oscillating(lo, hi)
    total += oscillating(right[-1], np.inf)
    return total


def gamma_tau(bath: BathSpec, tau: float, numerics: Optional[Numerics] = None) -> float:
    """Effective decay rate beyond the rotating-wave approximation."""
    num = resolve(numerics)
    if not tau > 0:
        raise DomainError(f"measurement interval must be > 0, got {tau!r}")
    if bath.is_trivial:
        return 0.0
    eta = solve_eta(bath, numerics=num).eta
    value = _measured_rate(bath, eta, tau, lambda w: interaction_f(w, eta), num)
    return max(value, 0.0)


def gamma_tau_dressed(bath: BathSpec, tau: float, numerics: Optional[Numerics] = None) -> float:
    """
    gamma(tau) with the kernel centred on the dressed frequency w0 instead of eta.

    The exact survival of the transformed model oscillates at w0, so at long
    intervals it follows this rate more closely than the first-iteration one.
    The weight f keeps eta.
    """
    num = resolve(numerics)
    if not tau > 0:
        raise DomainError(f"measurement interval must be > 0, got {tau!r}")
    if bath.is_trivial:
        return 0.0
    eta = solve_eta(bath, numerics=num).eta
    omega0 = find_pole(bath, num).omega0
    return max(_measured_rate(bath, omega0, tau, lambda w: interaction_f(w, eta), num), 0.0)


def gamma_rwa_tau(bath: BathSpec, tau: float, numerics: Optional[Numerics] = None) -> float:
    """Effective decay rate in the rotating-wave approximation."""
    num = resolve(numerics)
    if not tau > 0:
        raise DomainError(f"measurement interval must be > 0, got {tau!r}")
    if bath.is_trivial:
        return 0.0
    return max(_measured_rate(bath, 1.0, tau, lambda w: 1.0, num), 0.0)


def gamma_0(bath: BathSpec) -> float:
    """Unmeasured golden-rule rate 2 pi J(Delta) / 4."""
    return 0.5 * math.pi * spectral_density(bath, 1.0)


def first_iteration_survival(bath: BathSpec, tau: float, numerics: Optional[Numerics] = None) -> float:
    """|chi(tau)|^2 after one interval from the exponentialized first iteration."""
    return math.exp(-gamma_tau(bath, tau, numerics) * tau)


def survival_probability(bath: BathSpec, tau: float, n: int, numerics: Optional[Numerics] = None) -> float:
    """
    Excited-state population after ``n`` projective measurements.

    Returns:
        exp(-gamma(tau) * n * tau)
    """
    if n < 0:
        raise DomainError(f"number of measurements must be >= 0, got {n!r}")
    if n == 0:
        return 1.0
    return first_iteration_survival(bath, tau, numerics) ** n


def classify_regime(ratio: float, tol: float) -> Regime:
    if not math.isfinite(ratio):
        return Regime.NEUTRAL
    if ratio > 1.0 + tol:
        return Regime.ANTI_ZENO
    if ratio < 1.0 - tol:
        return Regime.ZENO
    return Regime.NEUTRAL


def zeno_scan(
    bath: BathSpec,
    taus: Sequence[float] = DEFAULT_TAUS,
    numerics: Optional[Numerics] = None,
    jobs: int = 1,
) -> ZenoCurve:
    """
    Evaluate gamma, gamma_RWA and their ratios to gamma0 over ``taus``.

    Points are independent and run on a pool of ``jobs`` threads; the output
    order always follows ``taus``.
    """
    num = resolve(numerics)
    grid = np.asarray(taus, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("taus must be positive and strictly increasing")
    eta = solve_eta(bath, numerics=num).eta

    def point(tau: float):
        return gamma_tau(bath, tau, num), gamma_rwa_tau(bath, tau, num)

    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        rows = list(pool.map(point, grid.tolist()))
    gamma = np.array([r[0] for r in rows])
    gamma_rwa = np.array([r[1] for r in rows])

    g0 = gamma_0(bath)
    if g0 > 0:
        ratio, ratio_rwa = gamma / g0, gamma_rwa / g0
    else:
        ratio = ratio_rwa = np.full_like(grid, np.nan)
    regime = [classify_regime(float(r), num.regime_tol) for r in ratio]
    logger.debug("%s: scanned %d intervals, max ratio %.4f", bath.label(), grid.size, np.nanmax(ratio) if g0 > 0 else math.nan)
    return ZenoCurve(grid, gamma, gamma_rwa, g0, ratio, ratio_rwa, regime, eta)
