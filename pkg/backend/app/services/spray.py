"""
Spray Coefficients
Geodesic spray by the general formula and the (alpha, beta) formula, projective factor and geodesic traces
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.config import get_settings
from app.core.diffcore import FinslerFunction, xy_jet
from app.core.exceptions import (
    ABFinslerError,
    DegenerateDirection,
    NotPositive,
    SingularFundamentalTensor,
    SprayFormulaSingular,
)
from app.core.integrators import rk4_step
from app.models import Box, Direction, Point
from app.services.betacalc import BetaDecomposition, contractions, decompose
from app.services.fields import MetricPair, christoffel
from app.services.phi import PhiFamily, phi_jet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray
    G_alpha: np.ndarray
    Q: float
    Theta: float
    Psi: float
    Delta: float
    alpha: float
    s: float
    P: Optional[float] = None


def fundamental_tensor(F: FinslerFunction, p: Point, y: Direction) -> np.ndarray:
    """g_ij = F F_{y^i y^j} + F_{y^i} F_{y^j}"""
    mj = xy_jet(F, p, y)
    return mj.value * mj.F_yy + np.outer(mj.F_y, mj.F_y)


def _invert(g: np.ndarray) -> np.ndarray:
    det = float(np.linalg.det(g))
    scale = max(1.0, float(np.max(np.abs(g)))) ** 2
    if not math.isfinite(det) or abs(det) <= 1e-14 * scale:
        raise SingularFundamentalTensor(det)
    return np.linalg.inv(g)


def spray_generic(F: FinslerFunction, p: Point, y: Direction) -> np.ndarray:
    """
    G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})

    Raises:
        DegenerateDirection: y = 0
        SingularFundamentalTensor: g_ij not invertible
    """
    mj = xy_jet(F, p, y)
    v = y.as_array()
    g = mj.value * mj.F_yy + np.outer(mj.F_y, mj.F_y)
    # [F^2]_{x^k y^l} y^k = 2 (F F_xy^T y + (F_x . y) F_y)
    mixed = 2.0 * (mj.value * (mj.F_xy.T @ v) + (mj.F_x @ v) * mj.F_y)
    rhs = mixed - 2.0 * mj.value * mj.F_x
    return 0.25 * (_invert(g) @ rhs)


def riemann_spray(gamma: np.ndarray, y: Direction) -> np.ndarray:
    """G^i_alpha = 1/2 Gamma^i_jk y^j y^k"""
    v = y.as_array()
    return 0.5 * np.einsum("ijk,j,k->i", gamma, v, v)


@dataclass(frozen=True)
class _Scalars:
    alpha: float
    s: float
    Q: float
    dQ: float
    Delta: float


def _scalars(dec: BetaDecomposition, family: PhiFamily, y: Direction) -> _Scalars:
    floor = get_settings().DENOMINATOR_FLOOR
    v = y.as_array()
    alpha = math.sqrt(float(v @ dec.a @ v))
    s = float(dec.b @ v) / alpha
    pj = phi_jet(family, s)
    denom = pj.phi - s * pj.dphi
    if abs(denom) < floor:
        raise SprayFormulaSingular("phi - s*phi'", denom)
    Q = pj.dphi / denom
    dQ = pj.phi * pj.d2phi / (denom * denom)
    Delta = 1.0 + s * Q + (dec.b2 - s * s) * dQ
    if abs(Delta) < floor:
        raise SprayFormulaSingular("Delta", Delta)
    return _Scalars(alpha=alpha, s=s, Q=Q, dQ=dQ, Delta=Delta)


def spray_ab(
    pair: MetricPair,
    family: PhiFamily,
    p: Point,
    y: Direction,
    F: Optional[FinslerFunction] = None,
) -> SprayData:
    """
    G^i = G^i_alpha + alpha Q s^i_0 + Theta (-2 alpha Q s_0 + r_00) y^i / alpha + Psi (-2 alpha Q s_0 + r_00) b^i

    With F given, the projective factor is evaluated too.

    Raises:
        SprayFormulaSingular: phi - s phi' or Delta below the denominator floor
        DomainExit: s outside the family's interval
    """
    if y.is_zero:
        raise DegenerateDirection(p)
    gamma, _ = christoffel(pair, p)
    dec = decompose(pair, p)
    sc = _scalars(dec, family, y)
    Theta = (sc.Q - sc.s * sc.dQ) / (2.0 * sc.Delta)
    Psi = sc.dQ / (2.0 * sc.Delta)

    c = contractions(dec, y)
    common = -2.0 * sc.alpha * sc.Q * c.s0 + c.r00
    G_alpha = riemann_spray(gamma, y)
    G = (
        G_alpha
        + sc.alpha * sc.Q * c.s0_up
        + (Theta * common / sc.alpha) * y.as_array()
        + Psi * common * dec.b_up
    )
    return SprayData(
        G=G,
        G_alpha=G_alpha,
        Q=sc.Q,
        Theta=Theta,
        Psi=Psi,
        Delta=sc.Delta,
        alpha=sc.alpha,
        s=sc.s,
        P=projective_factor(F, p, y) if F is not None else None,
    )


def projective_factor(F: FinslerFunction, p: Point, y: Direction) -> float:
    """
    P = F_{x^m} y^m / (2F)

    Raises:
        NotPositive: F(p, y) <= 0
    """
    mj = xy_jet(F, p, y)
    if mj.value <= 0:
        raise NotPositive(mj.value)
    return float(mj.F_x @ y.as_array()) / (2.0 * mj.value)


def pf_condition_residual(pair: MetricPair, family: PhiFamily, p: Point, y: Direction) -> np.ndarray:
    """
    (a_ml alpha^2 - y_m y_l) G^m_alpha + alpha^3 Q s_l0 + Psi alpha (-2 alpha Q s_0 + r_00)(alpha b_l - s y_l)

    Vanishes iff the spray is parallel to y, i.e. F is projectively flat in
    these coordinates at (p, y).
    """
    gamma, _ = christoffel(pair, p)
    dec = decompose(pair, p)
    sc = _scalars(dec, family, y)
    Psi = sc.dQ / (2.0 * sc.Delta)
    c = contractions(dec, y)
    v = y.as_array()
    y_low = dec.a @ v
    G_alpha = riemann_spray(gamma, y)
    alpha2 = sc.alpha * sc.alpha
    common = -2.0 * sc.alpha * sc.Q * c.s0 + c.r00
    return (
        (dec.a * alpha2 - np.outer(y_low, y_low)) @ G_alpha
        + alpha2 * sc.alpha * sc.Q * (dec.s @ v)
        + Psi * sc.alpha * common * (sc.alpha * dec.b - sc.s * y_low)
    )


# Geodesics


@dataclass
class GeodesicTrace:
    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    deviation: float
    truncated: bool = False
    reason: str = ""
    endpoint_error: Optional[float] = None


def chord_deviation(points: np.ndarray) -> float:
    """Max distance of the points to the segment through the endpoints, over the polyline length"""
    if len(points) < 2:
        return 0.0
    length = float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))
    if length == 0.0:
        return 0.0
    a, b = points[0], points[-1]
    chord = b - a
    c2 = float(chord @ chord)
    if c2 == 0.0:
        distances = np.linalg.norm(points - a, axis=1)
    else:
        t = np.clip((points - a) @ chord / c2, 0.0, 1.0)
        distances = np.linalg.norm(points - (a + np.outer(t, chord)), axis=1)
    return float(np.max(distances)) / length


def _integrate(F, p0: Point, v0: np.ndarray, h: float, steps: int, domain: Optional[Box]):
    def geodesic_equation(t: float, z: np.ndarray) -> np.ndarray:
        x, v = Point(float(z[0]), float(z[1])), Direction(float(z[2]), float(z[3]))
        return np.hstack((z[2:], -2.0 * spray_generic(F, x, v)))

    z = np.concatenate([p0.as_array(), v0])
    ts, zs = [0.0], [z]
    reason = ""
    for n in range(steps):
        try:
            z = rk4_step(geodesic_equation, ts[-1], z, h)
        except (ABFinslerError, ValueError) as e:
            reason = f"{type(e).__name__}: {e}"
            break
        if not np.all(np.isfinite(z)):
            reason = "non-finite state"
            break
        if domain is not None and not domain.contains(Point(float(z[0]), float(z[1]))):
            reason = f"left domain at step {n + 1}"
            break
        ts.append((n + 1) * h)
        zs.append(z)
    return np.array(ts), np.array(zs), reason


def geodesic_trace(
    F: FinslerFunction,
    p0: Point,
    y0: Direction,
    arclen: Optional[float] = None,
    steps: Optional[int] = None,
    domain: Optional[Box] = None,
    richardson: bool = False,
) -> GeodesicTrace:
    """
    Integrate x'' = -2 G(x, x') from p0 with F(p0, x'(0)) = 1

    A failure or a domain exit mid-trace truncates the trace and flags it.
    With richardson=True the endpoint is compared against a half-step run.

    Raises:
        DegenerateDirection: y0 = 0
        NotPositive: F(p0, y0) <= 0
    """
    settings = get_settings()
    arclen = settings.GEODESIC_ARCLENGTH if arclen is None else arclen
    steps = steps or settings.GEODESIC_STEPS
    mj = xy_jet(F, p0, y0)
    if mj.value <= 0:
        raise NotPositive(mj.value)
    v0 = y0.as_array() / mj.value
    h = arclen / steps

    ts, zs, reason = _integrate(F, p0, v0, h, steps, domain)
    truncated = bool(reason)
    if truncated:
        logger.warning(f"Geodesic from {p0} truncated after t={ts[-1]:.4g}: {reason}")

    endpoint_error = None
    if richardson and not truncated:
        _, zs_coarse, coarse_reason = _integrate(F, p0, v0, 2 * h, steps // 2, domain)
        if not coarse_reason:
            endpoint_error = float(np.linalg.norm(zs[-1, :2] - zs_coarse[-1, :2])) / 15.0

    return GeodesicTrace(
        t=ts,
        points=zs[:, :2],
        velocities=zs[:, 2:],
        deviation=chord_deviation(zs[:, :2]),
        truncated=truncated,
        reason=reason,
        endpoint_error=endpoint_error,
    )
