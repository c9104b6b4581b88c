"""Self-consistent renormalization of the qubit splitting.

The unitary transformation dresses Delta into eta*Delta with

    eta = G(eta) = exp[-Int_0^inf J(w) dw / (2 (w + eta)^2)],

which is the continuum form of exp[-sum_k g_k^2 xi_k^2 / (2 w_k^2)] with
xi_k = w_k / (w_k + eta). Existence and uniqueness of the root of
eta - G(eta) on (0, 1] is the validity criterion of the method.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from src.bath import ArrayLike, BathKind, BathSpec, lorentzian_form, peak_frequency, spectral_density
from src.config import Numerics, resolve
from src.errors import DomainError, MethodValidityError, NumericalError
from src.quadrature import integrate

logger = logging.getLogger(__name__)

# consecutive non-improving iterations tolerated before bisection takes over
_STALL_LIMIT = 25


@dataclass(frozen=True)
class Renormalization:
    """Converged renormalization factor with solver diagnostics."""

    eta: float
    residual: float
    iterations: int
    method: str
    unique: bool
    sign_changes: int = 1

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
            "unique": self.unique,
        }


def eta_exponent_closed_form(amplitude: float, width: float, eta: ArrayLike) -> ArrayLike:
    """
    ln G(eta) for J = 2*a*w / (w^2 + width^2), in closed form.

    Args:
        amplitude: The prefactor ``a``
        width: Lorentzian width
        eta: Trial renormalization factor(s)

    Returns:
        The (non-positive) exponent
    """
    e = np.asarray(eta, dtype=float)
    s = width ** 2 + e ** 2
    numerator = math.pi * width * e - width ** 2 - e ** 2 + (width ** 2 - e ** 2) * np.log(width / e)
    value = -amplitude * numerator / s ** 2
    return float(value) if value.ndim == 0 else value


def eta_exponent_quad(bath: BathSpec, eta: float, numerics: Optional[Numerics] = None) -> float:
    """ln G(eta) by adaptive quadrature of J / (2 (w + eta)^2)."""
    if bath.is_trivial:
        return 0.0
    peak = peak_frequency(bath)

    def integrand(w: float) -> float:
        return spectral_density(bath, w) / (2.0 * (w + eta) ** 2)

    split = 10.0 * max(peak, 1.0)
    finite = integrate(integrand, 0.0, split, numerics, points=[eta, peak], label="eta exponent")
    tail = integrate(integrand, split, np.inf, numerics, label="eta exponent tail")
    return -(finite + tail)


def eta_map(bath: BathSpec, eta_trial: float, numerics: Optional[Numerics] = None) -> float:
    """
    Evaluate G(eta).

    The Lorentzian bath uses the closed form; the Ohmic bath uses quadrature.

    Raises:
        DomainError: If ``eta_trial`` is outside (0, 1]
    """
    if not 0.0 < eta_trial <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta_trial!r}")
    if bath.is_trivial:
        return 1.0
    if bath.kind is BathKind.LORENTZIAN:
        a, w = lorentzian_form(bath)
        return math.exp(eta_exponent_closed_form(a, w, eta_trial))
    return math.exp(eta_exponent_quad(bath, eta_trial, numerics))


def solve_fixed_point(
    gmap: Callable[[float], float],
    numerics: Optional[Numerics] = None,
    tol: Optional[float] = None,
    label: str = "eta",
) -> Renormalization:
    """
    Solve eta = gmap(eta) on (0, 1].

    A sign scan of h = eta - gmap(eta) decides uniqueness; damped fixed-point
    iteration from eta = 1 is tried first and bisection of h takes over when
    the iteration stalls or leaves the interval.

    Args:
        gmap: The self-consistency map
        numerics: Solver settings
        tol: Residual tolerance (defaults to ``numerics.eta_tol``)
        label: Name used in diagnostics

    Returns:
        Renormalization

    Raises:
        MethodValidityError: If h changes sign more than once or has no root
        NumericalError: If neither method converges
    """
    num = resolve(numerics)
    tol = num.eta_tol if tol is None else tol

    grid = np.linspace(num.eta_floor, 1.0, num.scan_points)
    h = np.array([e - gmap(float(e)) for e in grid])
    signs = np.sign(h)
    signs = signs[signs != 0]
    sign_changes = int(np.count_nonzero(np.diff(signs)))
    if sign_changes > 1:
        raise MethodValidityError(
            f"{label}: self-consistency equation has {sign_changes} roots on (0, 1]"
        )
    unique = sign_changes <= 1

    eta = 1.0
    best = math.inf
    stall = 0
    for iteration in range(num.eta_max_iter + 1):
        g = gmap(eta)
        residual = abs(eta - g)
        if residual <= tol:
            logger.debug("%s converged by fixed point: %.12f after %d iterations", label, eta, iteration)
            return Renormalization(eta, residual, iteration, "fixed-point", unique, sign_changes)
        if residual < best:
            best, stall = residual, 0
        else:
            stall += 1
        eta_next = eta + num.eta_damping * (g - eta)
        if stall > _STALL_LIMIT or not num.eta_floor < eta_next <= 1.0:
            logger.warning("%s fixed-point iteration stalled at %.6g, switching to bisection", label, eta)
            break
        eta = eta_next
    else:
        raise NumericalError(
            f"{label}: fixed-point iteration did not converge",
            {"iterations": num.eta_max_iter, "residual": best},
        )

    def h_scalar(e: float) -> float:
        return e - gmap(e)

    if h_scalar(num.eta_floor) > 0 or h_scalar(1.0) < 0:
        raise MethodValidityError(f"{label}: no root of the self-consistency equation above {num.eta_floor:g}")
    root, info = bisect(
        h_scalar, num.eta_floor, 1.0, xtol=tol * 1e-3, maxiter=num.eta_max_iter, full_output=True, disp=False
    )
    residual = abs(h_scalar(root))
    if not info.converged or residual > tol:
        raise NumericalError(
            f"{label}: bisection did not reach tolerance",
            {"iterations": info.iterations, "residual": residual},
        )
    return Renormalization(root, residual, info.iterations, "bisection", unique, sign_changes)


@lru_cache(maxsize=256)
def _solve_eta_cached(bath: BathSpec, tol: float, numerics: Numerics) -> Renormalization:
    if bath.is_trivial:
        return Renormalization(1.0, 0.0, 0, "fixed-point", True, 0)
    return solve_fixed_point(lambda e: eta_map(bath, e, numerics), numerics, tol, label=bath.label())


def solve_eta(
    bath: BathSpec,
    tol: Optional[float] = None,
    numerics: Optional[Numerics] = None,
) -> Renormalization:
    """
    Find the self-consistent renormalization factor of ``bath``.

    Args:
        bath: Bath model
        tol: Residual tolerance |eta - G(eta)| (default 1e-12)
        numerics: Solver settings

    Returns:
        Renormalization
    """
    num = resolve(numerics)
    tol = num.eta_tol if tol is None else float(tol)
    if tol <= 0:
        raise DomainError("tolerance must be > 0")
    return _solve_eta_cached(bath, tol, num)


def coupling_weight(omega: ArrayLike, eta: float) -> Tuple[ArrayLike, ArrayLike]:
    """
    Transformation weight xi and squared renormalized coupling factor.

    Returns:
        Tuple of (xi, W) with xi = w / (w + eta) and W = eta^2 / (w + eta)^2,
        so that V_k^2 maps to J(w) * W(w) as a spectral density
    """
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("coupling weight requires omega >= 0")
    xi = w / (w + eta)
    weight = (eta / (w + eta)) ** 2
    if xi.ndim == 0:
        return float(xi), float(weight)
    return xi, weight
