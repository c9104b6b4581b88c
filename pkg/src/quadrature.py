"""Guarded quadrature helpers.

``integrate`` wraps :func:`scipy.integrate.quad` so that a failed adaptive
integration surfaces as a :class:`NumericalError` naming its panel instead of
a silent warning. ``adaptive_nodes`` builds composite Gauss-Legendre rules
for integrands that are evaluated once and reused against many kernels
(the cosine transform of the spectral weight).
"""

import logging
import math
import warnings
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from src.config import Numerics, resolve
from src.errors import NumericalError

logger = logging.getLogger(__name__)

# accepted error estimate when quad warns, in units of the requested tolerance
_WARNING_SLACK = 1e4


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    numerics: Optional[Numerics] = None,
    points: Optional[Sequence[float]] = None,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
    label: str = "",
) -> float:
    """
    Integrate ``func`` over [a, b] with scipy's QUADPACK drivers.

    Args:
        func: Scalar integrand
        a: Lower limit
        b: Upper limit (may be ``np.inf``)
        numerics: Tolerance settings
        points: Interior breakpoints (finite intervals only)
        weight: Optional QUADPACK weight ('cos', 'sin')
        wvar: Frequency for the weight
        label: Name of the integral, reported on failure

    Returns:
        float: The integral

    Raises:
        NumericalError: If the result is not finite or QUADPACK warns with an
            error estimate far above tolerance
    """
    num = resolve(numerics)
    kwargs = {"epsabs": num.quad_epsabs, "epsrel": num.quad_epsrel, "limit": num.quad_limit}
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
    elif points is not None and np.isfinite(b):
        inner = sorted({float(p) for p in points if a < p < b})
        if inner:
            kwargs["points"] = inner
            kwargs["limit"] = max(num.quad_limit, 50 * (len(inner) + 1))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, abserr = quad(func, a, b, **kwargs)[:2]

    if not math.isfinite(value):
        raise NumericalError("non-finite quadrature result", {"panel": (a, b), "label": label})
    if caught:
        allowed = _WARNING_SLACK * max(num.quad_epsabs, num.quad_epsrel * abs(value), 1e-15)
        if abserr > allowed:
            raise NumericalError(
                "quadrature did not converge",
                {"panel": (a, b), "label": label, "abserr": abserr, "reason": str(caught[-1].message)},
            )
        logger.debug("tolerated quadrature warning on [%g, %g] (%s): abserr=%.3g", a, b, label, abserr)
    return value


def integrate_panels(
    func: Callable[[float], float],
    edges: Iterable[float],
    numerics: Optional[Numerics] = None,
    label: str = "",
) -> float:
    """Sum ``integrate`` over consecutive panels defined by sorted ``edges``."""
    bounds = sorted({float(e) for e in edges})
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi > lo:
            total += integrate(func, lo, hi, numerics, label=label)
    return total


def adaptive_nodes(
    func: Callable[[np.ndarray], np.ndarray],
    edges: Sequence[float],
    rtol: float,
    atol: float = 1e-13,
    max_width: Optional[float] = None,
    order: int = 8,
    max_depth: int = 40,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Build a composite Gauss-Legendre rule adapted to a vectorized integrand.

    Each panel is bisected until the ``order`` and ``2*order`` point rules
    agree to ``max(atol, rtol*|I|)``. Panels wider than ``max_width`` are
    split first, so oscillatory kernels applied afterwards stay resolved.

    Args:
        func: Vectorized integrand
        edges: Mandatory panel boundaries
        rtol: Relative tolerance per panel
        atol: Absolute tolerance per panel
        max_width: Largest admissible panel width
        order: Low-order rule size
        max_depth: Bisection cap

    Returns:
        Tuple of (nodes, weights) of the high-order composite rule
    """
    x_lo, w_lo = np.polynomial.legendre.leggauss(order)
    x_hi, w_hi = np.polynomial.legendre.leggauss(2 * order)

    panels: List[Tuple[float, float]] = []
    bounds = sorted({float(e) for e in edges})
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            continue
        pieces = 1 if not max_width else max(1, math.ceil((hi - lo) / max_width))
        cuts = np.linspace(lo, hi, pieces + 1)
        panels.extend(zip(cuts[:-1], cuts[1:]))

    pending = np.array(panels, dtype=float).reshape(-1, 2)
    accepted = []
    depth = 0
    while pending.size:
        mid = 0.5 * (pending[:, 0] + pending[:, 1])[:, None]
        half = 0.5 * (pending[:, 1] - pending[:, 0])[:, None]
        low = (half[:, 0] * (func(mid + half * x_lo) @ w_lo))
        high = (half[:, 0] * (func(mid + half * x_hi) @ w_hi))
        done = np.abs(high - low) <= np.maximum(atol, rtol * np.abs(high))
        if depth >= max_depth:
            logger.warning("adaptive rule hit depth cap with %d open panels", int((~done).sum()))
            done[:] = True
        accepted.append(pending[done])
        split = pending[~done]
        centers = 0.5 * (split[:, 0] + split[:, 1])
        pending = np.concatenate(
            [np.column_stack([split[:, 0], centers]), np.column_stack([centers, split[:, 1]])]
        )
        depth += 1

    final = np.concatenate(accepted) if accepted else np.empty((0, 2))
    final = final[np.argsort(final[:, 0])]
    mid = 0.5 * (final[:, 0] + final[:, 1])[:, None]
    half = 0.5 * (final[:, 1] - final[:, 0])[:, None]
    nodes = (mid + half * x_hi).ravel()
    weights = (half * w_hi).ravel()
    return nodes, weights
