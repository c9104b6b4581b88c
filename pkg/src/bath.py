"""Bath spectral densities in units of the qubit splitting Delta."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

import numpy as np

from src.errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class BathKind(str, Enum):
    """Spectral-density family."""

    LORENTZIAN = "lorentzian"
    OHMIC = "ohmic"


@dataclass(frozen=True)
class BathSpec:
    """
    A bath model and its parameters.

    For ``LORENTZIAN`` the spectrum is J = 2*alpha*w / (w^2 + lam^2) with
    ``width`` holding lambda; for ``OHMIC`` it is the Drude form
    J = 2*alpha*w / ((w/wc)^2 + 1) with ``width`` holding the cutoff wc.
    A zero coupling is accepted and describes the isolated qubit.
    """

    kind: BathKind
    alpha: float
    width: float

    def __post_init__(self):
        object.__setattr__(self, "kind", BathKind(self.kind))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "width", float(self.width))
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise DomainError(f"coupling alpha must be >= 0, got {self.alpha!r}")
        if not np.isfinite(self.width) or self.width <= 0:
            name = "lambda" if self.kind is BathKind.LORENTZIAN else "omega_c"
            raise DomainError(f"{name} must be > 0, got {self.width!r}")
        for message in self.warnings():
            logger.warning(message)

    @classmethod
    def lorentzian(cls, alpha: float, lam: float) -> "BathSpec":
        """Low-frequency bath peaked at ``lam``."""
        return cls(BathKind.LORENTZIAN, alpha, lam)

    @classmethod
    def ohmic(cls, alpha: float, omega_c: float) -> "BathSpec":
        """Ohmic bath with Drude cutoff ``omega_c``."""
        return cls(BathKind.OHMIC, alpha, omega_c)

    @property
    def lam(self) -> float:
        if self.kind is not BathKind.LORENTZIAN:
            raise AttributeError("lambda is defined for the Lorentzian bath only")
        return self.width

    @property
    def omega_c(self) -> float:
        if self.kind is not BathKind.OHMIC:
            raise AttributeError("omega_c is defined for the Ohmic bath only")
        return self.width

    @property
    def is_trivial(self) -> bool:
        """True when the qubit is decoupled."""
        return self.alpha == 0.0

    def warnings(self) -> List[str]:
        """Physics warnings that do not invalidate the parameters."""
        if self.kind is BathKind.LORENTZIAN and self.width >= 1.0:
            return [f"lambda={self.width:g} >= Delta: the Lorentzian bath is no longer low-frequency"]
        return []

    def label(self) -> str:
        if self.kind is BathKind.LORENTZIAN:
            return f"lorentzian_alpha{self.alpha:g}_lambda{self.width:g}"
        return f"ohmic_alpha{self.alpha:g}_omegac{self.width:g}"

    def as_dict(self) -> dict:
        key = "lambda" if self.kind is BathKind.LORENTZIAN else "omega_c"
        return {"kind": self.kind.value, "alpha": self.alpha, key: self.width}


def lorentzian_form(bath: BathSpec) -> Tuple[float, float]:
    """
    Write the bath as J = 2*a*w / (w^2 + w0^2).

    Returns:
        Tuple of (a, w0): (alpha, lambda) for the Lorentzian bath and
        (alpha * wc^2, wc) for the Drude-cut Ohmic bath
    """
    if bath.kind is BathKind.LORENTZIAN:
        return bath.alpha, bath.width
    return bath.alpha * bath.width ** 2, bath.width


def spectral_density(bath: BathSpec, omega: ArrayLike) -> ArrayLike:
    """
    Evaluate J(omega).

    Args:
        bath: Bath model
        omega: Energy or array of energies, all >= 0

    Returns:
        J at each energy, same shape as ``omega``

    Raises:
        DomainError: If any energy is negative
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectral density requires omega >= 0")
    if bath.kind is BathKind.LORENTZIAN:
        value = 2.0 * bath.alpha * w / (w * w + bath.width ** 2)
    else:
        value = 2.0 * bath.alpha * w / ((w / bath.width) ** 2 + 1.0)
    return float(value) if value.ndim == 0 else value


def peak_frequency(bath: BathSpec) -> float:
    """Energy where J is largest: lambda, or the Drude cutoff."""
    return bath.width
