"""
Integrators
Fixed-step fourth-order Runge-Kutta and composite Gauss-Legendre quadrature
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from app.core.exceptions import NumericalBlowup

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(f: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step"""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(f: Rhs, t0: float, y0: np.ndarray, h: float, n_steps: int):
    """
    Integrate y' = f(t, y) with n_steps fixed steps of size h

    Returns:
        (t, y) arrays of shape (n_steps+1,) and (n_steps+1, dim)
    """
    y0 = np.asarray(y0, dtype=float)
    ts = t0 + h * np.arange(n_steps + 1)
    ys = np.zeros((n_steps + 1, y0.shape[0]))
    ys[0] = y0
    for n in range(n_steps):
        ys[n + 1] = rk4_step(f, ts[n], ys[n], h)
        if not np.all(np.isfinite(ys[n + 1])):
            raise NumericalBlowup("RK4 integration", f"at t={ts[n + 1]:.6g}")
    return ts, ys


@dataclass
class QuadratureResult:
    value: float
    error: float
    panels: int
    converged: bool


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(8)


def _composite(f: Callable[[float], float], a: float, b: float, panels: int) -> float:
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * sum(w * f(mid + half * x) for x, w in zip(_NODES, _WEIGHTS))
    return total


def gauss_legendre(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_halvings: int = 10,
    what: Optional[str] = None,
) -> QuadratureResult:
    """
    Composite 8-point Gauss-Legendre rule with panel halving

    Panels are doubled until two successive estimates agree to tol
    (absolute). The error estimate is that difference.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True)

    panels = 1
    previous = _composite(f, a, b, panels)
    for _ in range(max_halvings):
        panels *= 2
        current = _composite(f, a, b, panels)
        error = abs(current - previous)
        if not np.isfinite(current):
            raise NumericalBlowup(what or "quadrature")
        if error <= tol:
            return QuadratureResult(current, error, panels, True)
        previous = current

    logger.warning(
        f"Quadrature{' for ' + what if what else ''} did not reach tol={tol:.1e} "
        f"after {panels} panels (last change {error:.2e})"
    )
    return QuadratureResult(current, error, panels, False)
