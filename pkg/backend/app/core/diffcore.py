"""
Derivative Core
Exact first and second derivatives of scalar fields and Finsler functions
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from app.core.exceptions import DegenerateDirection, DomainExit, NumericalBlowup
from app.core.jets import Jet, lift
from app.models import Direction, Point

logger = logging.getLogger(__name__)

ScalarField = Callable[..., object]
FinslerFunction = Callable[..., object]


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar field at a point"""
    value: float
    grad: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True)
class MixedJet:
    """
    Derivative blocks of F(x, y) at (p, y)

    F_xy[m, l] is d^2F / dx^m dy^l.
    """
    value: float
    F_y: np.ndarray
    F_x: np.ndarray
    F_yy: np.ndarray
    F_xy: np.ndarray


def evaluate_jet(func: Callable[..., object], args, what: str) -> Jet:
    """Evaluate func on jet arguments, mapping arithmetic failures to domain errors"""
    n = len(args)
    try:
        result = lift(func(*args), n)
    except (ZeroDivisionError, OverflowError) as e:
        raise NumericalBlowup(what, str(e)) from e
    except ValueError as e:
        raise DomainExit(what) from e
    if not result.is_finite():
        raise NumericalBlowup(what)
    return result


def evaluate_components(func: Callable[..., Sequence[object]], args, what: str) -> List[Jet]:
    """Evaluate a tuple-valued func (metric or 1-form components) on jet arguments"""
    n = len(args)
    try:
        values = [lift(v, n) for v in func(*args)]
    except (ZeroDivisionError, OverflowError) as e:
        raise NumericalBlowup(what, str(e)) from e
    except ValueError as e:
        raise DomainExit(what) from e
    if not all(v.is_finite() for v in values):
        raise NumericalBlowup(what)
    return values


def x_jet(field: ScalarField, p: Point) -> Jet2:
    """
    Value, gradient and Hessian of field(x1, x2) at p

    Raises:
        NumericalBlowup: non-finite intermediate
    """
    X = (Jet.variable(p.x1, 0, 2), Jet.variable(p.x2, 1, 2))
    jet = evaluate_jet(field, X, f"field at {p}")
    return Jet2(value=jet.value, grad=jet.grad.copy(), hess=jet.hess.copy())


def finsler_jet(F: FinslerFunction, p: Point, y: Direction) -> Jet:
    """Full 4-variable jet of F over (x1, x2, y1, y2)"""
    if y.is_zero:
        raise DegenerateDirection(p)
    Z = (
        Jet.variable(p.x1, 0, 4),
        Jet.variable(p.x2, 1, 4),
        Jet.variable(y.y1, 2, 4),
        Jet.variable(y.y2, 3, 4),
    )
    return evaluate_jet(F, Z, f"F at {p}, y=({y.y1:.6g}, {y.y2:.6g})")


def xy_jet(F: FinslerFunction, p: Point, y: Direction) -> MixedJet:
    """
    All first and second derivative blocks of F at (p, y)

    Raises:
        DegenerateDirection: y = 0
        NumericalBlowup: non-finite intermediate
    """
    jet = finsler_jet(F, p, y)
    H = jet.hess
    return MixedJet(
        value=jet.value,
        F_y=jet.grad[2:].copy(),
        F_x=jet.grad[:2].copy(),
        F_yy=H[2:, 2:].copy(),
        F_xy=H[:2, 2:].copy(),
    )


def _central_differences(f: Callable[[np.ndarray], float], z: np.ndarray, h: float):
    n = z.shape[0]
    f0 = f(z)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    eye = np.eye(n)
    for i in range(n):
        fp, fm = f(z + h * eye[i]), f(z - h * eye[i])
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / (h * h)
        for j in range(i):
            fpp = f(z + h * eye[i] + h * eye[j])
            fpm = f(z + h * eye[i] - h * eye[j])
            fmp = f(z - h * eye[i] + h * eye[j])
            fmm = f(z - h * eye[i] - h * eye[j])
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    return f0, grad, hess


def fd_oracle(
    func: Callable[..., float],
    p: Point,
    y: Optional[Direction] = None,
    h: float = 1e-4,
    richardson: bool = False,
) -> Union[Jet2, MixedJet]:
    """
    Central-difference derivatives, used only to validate the jet code

    Args:
        func: field(x1, x2) or F(x1, x2, y1, y2) on plain floats
        p: base point
        y: direction; when given a MixedJet is returned
        h: step
        richardson: combine steps h and h/2 to cancel the O(h^2) term

    Raises:
        DomainExit: an evaluation point leaves the function's domain
    """
    if h <= 0:
        raise ValueError("Step h must be positive")

    z = p.as_array() if y is None else np.concatenate([p.as_array(), y.as_array()])

    def f(w: np.ndarray) -> float:
        try:
            value = float(func(*w))
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise DomainExit(f"oracle evaluation at {w.tolist()}") from e
        if not math.isfinite(value):
            raise DomainExit(f"oracle evaluation at {w.tolist()}")
        return value

    value, grad, hess = _central_differences(f, z, h)
    if richardson:
        _, grad_half, hess_half = _central_differences(f, z, h / 2)
        grad = (4 * grad_half - grad) / 3
        hess = (4 * hess_half - hess) / 3

    if y is None:
        return Jet2(value=value, grad=grad, hess=hess)
    return MixedJet(value=value, F_y=grad[2:], F_x=grad[:2], F_yy=hess[2:, 2:], F_xy=hess[:2, 2:])
