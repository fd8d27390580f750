"""
Metric Constructions
Builders for the explicit (alpha, beta) families, their deformations and construction diagnostics
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from app.core import jets as jm
from app.core.config import get_settings
from app.core.diffcore import x_jet
from app.core.exceptions import (
    ABFinslerError,
    ConfigError,
    ConstraintViolation,
    DegenerateForm,
    RangeViolation,
)
from app.core.expressions import compile_expression
from app.core.integrators import gauss_legendre
from app.core.jets import Jet
from app.core.registry import Registry
from app.models import Box, ClassId, ExcludedLocus, Point, Sign
from app.services import fields
from app.services.fields import MetricPair, OneFormField, RiemannMetricField, ScalarFn
from app.services.phi import (
    HalfPower,
    IntegerPower,
    PhiFamily,
    QuadraticFamily,
    QuarticODE,
    SingularB,
    check_k_admissible,
    family_from_spec,
)
from app.services.sampling import grid

logger = logging.getLogger(__name__)

VALIDATION_GRID = 9


@dataclass(frozen=True)
class HolomorphicPair:
    """f(z) = u + i v with z = x1 + i x2"""
    u: ScalarFn
    v: ScalarFn
    description: str = "f"


@dataclass(frozen=True)
class Th001Params:
    B: ScalarFn
    f: HolomorphicPair
    k1: float
    k2: float
    k3: float

    @property
    def ks(self) -> Tuple[float, float, float]:
        return self.k1, self.k2, self.k3


@dataclass(frozen=True)
class BuiltMetric:
    """A builder's output: the pair and, where the construction fixes it, its phi family"""
    pair: MetricPair
    family: Optional[PhiFamily] = None
    class_hint: Optional[ClassId] = None


def _validation_points(pair: MetricPair) -> Sequence[Point]:
    return grid(pair, n=VALIDATION_GRID)


def _ensure_positive_definite(pair: MetricPair) -> None:
    fields.check_pair(pair, _validation_points(pair))


def _radial_locus(center: Tuple[float, float], description: str) -> ExcludedLocus:
    c1, c2 = center
    return ExcludedLocus(description, lambda x1, x2: math.hypot(x1 - c1, x2 - c2))


# Diagnostics of conformal constructions


def tau_tilde(sigma: ScalarFn, xi: ScalarFn, eta: ScalarFn, b: float, p: Point) -> float:
    """
    tau~ of a normalized conformal pair

    2 tau~ = [(xi^2+eta^2)(xi s1 + eta s2) - xi eta eta1 + xi^2 eta2 + eta^2 xi1 - xi eta xi2]
             / (b e^sigma (xi^2+eta^2)^(3/2))
    """
    S, X, E = x_jet(sigma, p), x_jet(xi, p), x_jet(eta, p)
    x, e = X.value, E.value
    n2 = x * x + e * e
    if n2 == 0.0:
        raise DegenerateForm(p)
    numer = (
        n2 * (x * S.grad[0] + e * S.grad[1])
        - x * e * E.grad[0]
        + x * x * E.grad[1]
        + e * e * X.grad[0]
        - x * e * X.grad[1]
    )
    return 0.5 * numer / (b * math.exp(S.value) * n2 ** 1.5)


def nonclosed_indicator(sigma: ScalarFn, xi: ScalarFn, eta: ScalarFn, p: Point) -> float:
    """Nonzero exactly where the conformal 1-form is not closed"""
    S, X, E = x_jet(sigma, p), x_jet(xi, p), x_jet(eta, p)
    x, e = X.value, E.value
    return float(
        (x * x + e * e) * (x * S.grad[1] - e * S.grad[0])
        - x * x * E.grad[0]
        - x * e * E.grad[1]
        + x * e * X.grad[0]
        + e * e * X.grad[1]
    )


def cauchy_riemann_residual(f: HolomorphicPair, points: Iterable[Point]) -> float:
    worst = 0.0
    for p in points:
        U, V = x_jet(f.u, p), x_jet(f.v, p)
        worst = max(worst, abs(U.grad[0] - V.grad[1]), abs(U.grad[1] + V.grad[0]))
    return float(worst)


# c(B) for the quartic-ODE local structure


@dataclass(frozen=True)
class CofB:
    value: float
    d1: float
    d2: float


def _c_integrand(k1: float, k2: float, k3: float):
    def g(t: float) -> float:
        return 0.5 * (k3 + k2 * t) / (1 + (k1 + k3) * t + k2 * t * t)

    def dg(t: float) -> float:
        D = 1 + (k1 + k3) * t + k2 * t * t
        return 0.5 * (k2 * D - (k3 + k2 * t) * ((k1 + k3) + 2 * k2 * t)) / (D * D)

    return g, dg


def c_of_B(B: float, k1: float, k2: float, k3: float) -> CofB:
    """
    c(B) = exp(int_0^B 1/2 (k3 + k2 t)/(1 + (k1+k3) t + k2 t^2) dt) with c' and c''

    Raises:
        RangeViolation: B < 0 or the denominator vanishes on [0, B]
    """
    if B < 0:
        raise RangeViolation("B", f"must be nonnegative, got {B:.6g}")
    t = np.linspace(0.0, B, 65)
    D = 1 + (k1 + k3) * t + k2 * t * t
    if np.any(D <= get_settings().DENOMINATOR_FLOOR):
        raise RangeViolation("B", f"1 + (k1+k3)t + k2 t^2 vanishes on [0, {B:.6g}]")
    g, dg = _c_integrand(k1, k2, k3)
    integral = gauss_legendre(g, 0.0, B, tol=get_settings().QUAD_TOL, what=f"c(B) at B={B:.6g}").value
    c = math.exp(integral)
    gB = g(B)
    return CofB(value=c, d1=c * gB, d2=c * (gB * gB + dg(B)))


def _c_field(B_field: ScalarFn, ks: Tuple[float, float, float]) -> ScalarFn:
    """c(B(x)) on floats or jets"""

    def c(x1, x2):
        Bx = B_field(x1, x2)
        if isinstance(Bx, Jet):
            cb = c_of_B(Bx.value, *ks)
            return Bx.apply(cb.value, cb.d1, cb.d2)
        return c_of_B(float(Bx), *ks).value

    return c


def _sigma_field(params: Th001Params) -> ScalarFn:
    """sigma with e^(2 sigma) = B / (c^2 (u^2 + v^2))"""
    c = _c_field(params.B, params.ks)

    def sigma(x1, x2):
        u, v = params.f.u(x1, x2), params.f.v(x1, x2)
        cx = c(x1, x2)
        return 0.5 * jm.log(params.B(x1, x2) / (cx * cx * (u * u + v * v)))

    return sigma


def th001_pde_residual(params: Th001Params, points: Iterable[Point]) -> float:
    """max over points of |u1 - v2|, |u2 + v1| and |v1 + sigma1 v - u sigma2|"""
    sigma = _sigma_field(params)
    worst = 0.0
    for p in points:
        U, V, S = x_jet(params.f.u, p), x_jet(params.f.v, p), x_jet(sigma, p)
        worst = max(
            worst,
            abs(U.grad[0] - V.grad[1]),
            abs(U.grad[1] + V.grad[0]),
            abs(V.grad[0] + S.grad[0] * V.value - U.value * S.grad[1]),
        )
    return float(worst)


# Builders


def build_th2(B: ScalarFn, f: HolomorphicPair, sign: Sign, domain: Box, name: str = "th2") -> MetricPair:
    """
    alpha^2 = (1 -/+ B)^-3 {B |y|^2/(u^2+v^2) -/+ 9 (1 +/- B + B^2) beta^2},
    beta = B (u y1 + v y2) / ((1 +/- 2B)^(3/2) (u^2+v^2))

    Raises:
        RangeViolation: B outside (0, 1) (plus) or (0, 1/2) (minus) at a validation point
        DegenerateForm: u = v = 0 at a validation point
    """
    e = sign.factor
    upper = 1.0 if sign is Sign.PLUS else 0.5

    def one_form(x1, x2):
        Bx, u, v = B(x1, x2), f.u(x1, x2), f.v(x1, x2)
        n2 = u * u + v * v
        if jm.value_of(n2) == 0.0:
            raise DegenerateForm(Point(jm.value_of(x1), jm.value_of(x2)))
        lam = Bx / ((1 + e * 2 * Bx) ** 1.5 * n2)
        return lam * u, lam * v

    def metric(x1, x2):
        Bx = B(x1, x2)
        u, v = f.u(x1, x2), f.v(x1, x2)
        b1, b2 = one_form(x1, x2)
        scale = (1 - e * Bx) ** -3
        iso = Bx / (u * u + v * v)
        w = -e * 9 * (1 + e * Bx + Bx * Bx)
        return scale * (iso + w * b1 * b1), scale * (w * b1 * b2), scale * (iso + w * b2 * b2)

    pair = MetricPair(
        alpha=RiemannMetricField(metric, "conformal-Douglas alpha"),
        beta=OneFormField(one_form, "conformal-Douglas beta"),
        domain=domain,
        excluded_loci=(),
        name=name,
    )
    for p in _validation_points(pair):
        Bp = float(B(p.x1, p.x2))
        if not 0.0 < Bp < upper:
            raise RangeViolation("B", f"B({p}) = {Bp:.6g} outside (0, {upper:g}) for sign {sign.value}")
    _ensure_positive_definite(pair)
    logger.info(f"Built {name} ({sign.value}) on {domain}")
    return pair


def build_th001(params: Th001Params, domain: Box, name: str = "th001", tol: float = 1e-7) -> MetricPair:
    """
    alpha = sqrt(B)/c |y| / sqrt(u^2+v^2), beta = B (u y1 + v y2) / (c (u^2+v^2))

    Raises:
        RangeViolation: inadmissible (k1, k2, k3) or B <= 0
        ConstraintViolation: (u, v, sigma) violate the compatibility PDEs
    """
    check_k_admissible(*params.ks)
    c = _c_field(params.B, params.ks)

    def metric(x1, x2):
        u, v = params.f.u(x1, x2), params.f.v(x1, x2)
        cx = c(x1, x2)
        e2 = params.B(x1, x2) / (cx * cx * (u * u + v * v))
        return e2, 0.0, e2

    def one_form(x1, x2):
        u, v = params.f.u(x1, x2), params.f.v(x1, x2)
        n2 = u * u + v * v
        if jm.value_of(n2) == 0.0:
            raise DegenerateForm(Point(jm.value_of(x1), jm.value_of(x2)))
        lam = params.B(x1, x2) / (c(x1, x2) * n2)
        return lam * u, lam * v

    pair = MetricPair(
        alpha=RiemannMetricField(metric, "closed-conformal alpha"),
        beta=OneFormField(one_form, "closed-conformal beta"),
        domain=domain,
        name=name,
    )
    points = _validation_points(pair)
    for p in points:
        Bp = float(params.B(p.x1, p.x2))
        if not Bp > 0:
            raise RangeViolation("B", f"B({p}) = {Bp:.6g} must be positive")
    residual = th001_pde_residual(params, points)
    if residual > tol:
        raise ConstraintViolation("u1=v2, u2=-v1, v1+sigma1 v=u sigma2", residual, tol)
    _ensure_positive_definite(pair)
    logger.info(f"Built {name} (k=({params.k1}, {params.k2}, {params.k3})) on {domain}")
    return pair


def special_th001_params(c1: float, c2: float, k1: float, k2: float, k3: float) -> Th001Params:
    """
    sigma = x1, u = (c2 sin x2 - c1 cos x2) e^-x1, v = (c1 sin x2 + c2 cos x2) e^-x1

    B is the constant with B / c(B)^2 = c1^2 + c2^2.

    Raises:
        RangeViolation: no such B exists
    """
    K = c1 * c1 + c2 * c2
    if K <= 0:
        raise RangeViolation("c1, c2", "c1^2 + c2^2 must be positive")

    def h(B: float) -> float:
        return B / c_of_B(B, k1, k2, k3).value ** 2 - K

    hi = 1.0
    while h(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            raise RangeViolation("c1, c2", f"B / c(B)^2 never reaches {K:.6g}")
    B = float(brentq(h, 0.0, hi, xtol=1e-15, rtol=1e-14))
    logger.debug(f"Special triple: B = {B:.15g} for c1^2+c2^2 = {K:.6g}")

    f = HolomorphicPair(
        u=lambda x1, x2: (c2 * jm.sin(x2) - c1 * jm.cos(x2)) * jm.exp(-x1),
        v=lambda x1, x2: (c1 * jm.sin(x2) + c2 * jm.cos(x2)) * jm.exp(-x1),
        description=f"special triple c1={c1}, c2={c2}",
    )
    return Th001Params(B=lambda x1, x2: B, f=f, k1=k1, k2=k2, k3=k3)


def build_pf_example(
    c1: float,
    c2: float,
    c3: float,
    c4: float,
    sign: Sign,
    domain: Optional[Box] = None,
) -> Tuple[MetricPair, QuadraticFamily]:
    """
    F = alpha +/- beta^2/alpha, alpha = e^sigma |y|, beta = e^sigma (xi y1 + eta y2), with
    xi = +/- (x2+c2) / sqrt(2D), eta = -/+ (x1+c1) / sqrt(2D), sigma = ln D + c4,
    D = c3 -/+ (x1+c1)^2 -/+ (x2+c2)^2

    c4 only shifts sigma, i.e. rescales both alpha and beta.

    Raises:
        RangeViolation: c3 <= 0 or D <= 0 somewhere on the domain
    """
    if not c3 > 0:
        raise RangeViolation("c3", f"must be positive, got {c3}")
    e = sign.factor
    if domain is None:
        half = 0.5 * math.sqrt(c3)
        domain = Box(-c1 - half, -c1 + half, -c2 - half, -c2 + half)

    def D(x1, x2):
        return c3 - e * (x1 + c1) ** 2 - e * (x2 + c2) ** 2

    corners = [(domain.lo1, domain.lo2), (domain.lo1, domain.hi2), (domain.hi1, domain.lo2), (domain.hi1, domain.hi2)]
    if sign is Sign.PLUS and min(D(*q) for q in corners) <= 0:
        raise RangeViolation("domain", f"c3 - (x1+c1)^2 - (x2+c2)^2 must stay positive on {domain}")

    root2 = math.sqrt(2.0)
    pair = fields.conformal_pair(
        sigma=lambda x1, x2: jm.log(D(x1, x2)) + c4,
        xi=lambda x1, x2: e * (x2 + c2) / (root2 * jm.sqrt(D(x1, x2))),
        eta=lambda x1, x2: -e * (x1 + c1) / (root2 * jm.sqrt(D(x1, x2))),
        b=1.0,
        domain=domain,
        excluded_loci=(
            _radial_locus((-c1, -c2), "beta vanishes"),
            ExcludedLocus("D = 0", lambda x1, x2: abs(D(x1, x2))),
        ),
        name=f"pf_example({sign.value})",
        normalize=False,
    )
    _ensure_positive_definite(pair)
    logger.info(f"Built projectively flat example ({sign.value}) with c=({c1}, {c2}, {c3}, {c4})")
    return pair, QuadraticFamily(sign)


def build_singular_family(
    sigma: ScalarFn,
    xi: ScalarFn,
    eta: ScalarFn,
    b: float,
    variant: str,
    domain: Box,
    c: float = 1.0,
    k: float = 0.0,
    m: int = 1,
    ctilde: float = 0.0,
    excluded_loci: Sequence[ExcludedLocus] = (),
    name: str = "singular",
) -> Tuple[MetricPair, PhiFamily]:
    """
    Normalized conformal pair with constant |beta| = b and a phi family singular at |s| = b

    Args:
        variant: "singular_b", "integer_power" or "half_power"

    Raises:
        RangeViolation: unknown variant or inadmissible parameters
        DegenerateForm: xi = eta = 0 at evaluation
    """
    families: Dict[str, Callable[[], PhiFamily]] = {
        "singular_b": lambda: SingularB(b=b, ctilde=ctilde),
        "integer_power": lambda: IntegerPower(b=b, c=c, k=k, m=m),
        "half_power": lambda: HalfPower(b=b, c=c, k=k, m=m),
    }
    if variant not in families:
        raise RangeViolation("variant", f"unknown variant '{variant}' (known: {', '.join(sorted(families))})")
    family = families[variant]()
    pair = fields.conformal_pair(sigma, xi, eta, b, domain, excluded_loci=excluded_loci, name=name)
    _ensure_positive_definite(pair)
    logger.info(f"Built {name} with {family}")
    return pair, family


def _rotation_pair(power: float, b: float, variant: str, domain: Optional[Box], name: str, **kwargs):
    return build_singular_family(
        sigma=lambda x1, x2: power * jm.log(x1 * x1 + x2 * x2),
        xi=lambda x1, x2: x2,
        eta=lambda x1, x2: -x1,
        b=b,
        variant=variant,
        domain=domain or Box(0.5, 1.5, -0.5, 0.5),
        excluded_loci=(_radial_locus((0.0, 0.0), "origin"),),
        name=name,
        **kwargs,
    )


def build_ex01(b: float = 1.0, c: float = 1.0, m: int = 1, domain: Optional[Box] = None):
    """xi = x2, eta = -x1, sigma = (m - 1/2) ln|x|^2 with the integer-power family, k = 0"""
    return _rotation_pair(m - 0.5, b, "integer_power", domain, f"ex01(m={m})", c=c, k=0.0, m=m)


def build_ex02(b: float = 1.0, c: float = 1.0, m: int = 1, domain: Optional[Box] = None):
    """xi = x2, eta = -x1, sigma = (m - 1) ln|x|^2 with the half-power family, k = 0"""
    return _rotation_pair(m - 1.0, b, "half_power", domain, f"ex02(m={m})", c=c, k=0.0, m=m)


def section7_pair(sign: Sign, c: float = 0.0, domain: Optional[Box] = None) -> Tuple[MetricPair, QuadraticFamily]:
    """
    alpha = e^sigma |y|, beta = e^sigma (x2 y1 - x1 y2), sigma = -3/2 ln(1 +/- 2|x|^2) + c

    Douglas for F = alpha +/- beta^2/alpha; beta is not closed.
    """
    e = sign.factor
    domain = domain or Box(-0.4, 0.4, -0.4, 0.4)
    pair = fields.conformal_pair(
        sigma=lambda x1, x2: -1.5 * jm.log(1 + e * 2 * (x1 * x1 + x2 * x2)) + c,
        xi=lambda x1, x2: x2,
        eta=lambda x1, x2: -x1,
        b=1.0,
        domain=domain,
        excluded_loci=(
            _radial_locus((0.0, 0.0), "beta vanishes"),
            ExcludedLocus("1 +/- 2|x|^2 = 0", lambda x1, x2: abs(1 + e * 2 * (x1 * x1 + x2 * x2))),
        ),
        name=f"section7({sign.value})",
        normalize=False,
    )
    _ensure_positive_definite(pair)
    logger.info(f"Built closing Douglas example ({sign.value}) on {domain}")
    return pair, QuadraticFamily(sign)


# Deformations


def _deformation_coefficients(b2, sign: Sign):
    """xi(b^2), eta(b^2) of alpha~^2 = xi alpha^2 + eta beta^2"""
    e = sign.factor
    q = (1 + e * 2 * b2) ** 1.5
    xi = (1 - e * b2) ** 3 / q
    eta = e * 9 * (1 + e * b2 + b2 * b2) / q
    return xi, eta


def deform_th2(pair: MetricPair, sign: Sign) -> MetricPair:
    """
    alpha~^2 = xi(b^2) alpha^2 + eta(b^2) beta^2, beta~ = beta

    Raises:
        RangeViolation: 1 +/- 2b^2 <= 0 or 1 -/+ b^2 <= 0 at a validation point
    """
    e = sign.factor
    b2_field = fields.beta_norm2_field(pair)
    for p in _validation_points(pair):
        try:
            b2 = float(b2_field(p.x1, p.x2))
        except (ValueError, ZeroDivisionError):
            continue
        if not (1 + e * 2 * b2 > 0 and 1 - e * b2 > 0):
            raise RangeViolation("b^2", f"b^2({p}) = {b2:.6g} outside the admissible range for sign {sign.value}")

    def metric(x1, x2):
        a11, a12, a22 = pair.alpha.a(x1, x2)
        b1, b2_ = pair.beta.b(x1, x2)
        xi, eta = _deformation_coefficients(b2_field(x1, x2), sign)
        return xi * a11 + eta * b1 * b1, xi * a12 + eta * b1 * b2_, xi * a22 + eta * b2_ * b2_

    deformed = MetricPair(
        alpha=RiemannMetricField(metric, f"deformed {pair.alpha.description}"),
        beta=pair.beta,
        domain=pair.domain,
        excluded_loci=pair.excluded_loci,
        name=f"{pair.name}~",
    )
    logger.info(f"Deformed alpha of {pair.name} ({sign.value})")
    return deformed


def deformed_norm2(b2: float, sign: Sign) -> float:
    """|beta|^2 with respect to the deformed metric"""
    return b2 / (1 + sign.factor * 2 * b2) ** 1.5


def conformal_factor_th2(tau: float, b2: float, sign: Sign) -> float:
    """lambda in r~_ij = lambda a~_ij"""
    e = sign.factor
    return 2 * tau * (1 - e * b2) ** 2 / (1 + e * 2 * b2) ** 2.5


def deform_th001(
    pair: MetricPair,
    c: Optional[float] = None,
    ks: Optional[Tuple[float, float, float]] = None,
) -> MetricPair:
    """
    beta~ = beta / c with alpha unchanged; c a positive constant or c(b^2) from (k1, k2, k3)

    Raises:
        RangeViolation: c <= 0, or neither c nor ks given
    """
    if ks is not None:
        scale = _c_field(fields.beta_norm2_field(pair), ks)
        factor: ScalarFn = lambda x1, x2: 1.0 / scale(x1, x2)
    elif c is not None:
        if not c > 0:
            raise RangeViolation("c", f"must be positive, got {c}")
        factor = lambda x1, x2: 1.0 / c
    else:
        raise RangeViolation("c", "either c or (k1, k2, k3) is required")
    logger.info(f"Rescaled beta of {pair.name}")
    return fields.scaled_pair(pair, factor, name=f"{pair.name}/c")


# Named builders

builder_registry: Registry = Registry("metric builder")


def _expr(params: Dict[str, Any], key: str, default: Optional[str] = None) -> ScalarFn:
    source = params.get(key, default)
    if source is None:
        raise ConfigError(f"metric.params.{key}", "missing expression")
    if isinstance(source, (int, float)):
        value = float(source)
        return lambda x1, x2: value
    return compile_expression(str(source), f"metric.params.{key}")


def _domain(params: Dict[str, Any], default: Optional[Box] = None) -> Optional[Box]:
    raw = params.get("domain")
    if raw is None:
        return default
    try:
        return Box(*[float(v) for v in raw])
    except (TypeError, ValueError) as e:
        raise ConfigError("metric.params.domain", f"expected [lo1, hi1, lo2, hi2]: {e}") from e


def _sign(params: Dict[str, Any]) -> Sign:
    try:
        return Sign(params.get("sign", "+"))
    except ValueError as e:
        raise ConfigError("metric.params.sign", "must be '+' or '-'") from e


def _required_domain(params: Dict[str, Any]) -> Box:
    box = _domain(params)
    if box is None:
        raise ConfigError("metric.params.domain", "required for this builder")
    return box


@builder_registry.decorator("euclidean")
def _euclidean(params: Dict[str, Any]) -> BuiltMetric:
    return BuiltMetric(fields.euclidean_pair(_domain(params, Box(-1.0, 1.0, -1.0, 1.0))))


@builder_registry.decorator("flat")
def _flat(params: Dict[str, Any]) -> BuiltMetric:
    box = _domain(params, Box(-1.0, 1.0, -1.0, 1.0))
    return BuiltMetric(fields.flat_pair(_expr(params, "b1", "0"), _expr(params, "b2", "0"), box))


@builder_registry.decorator("inline")
def _inline(params: Dict[str, Any]) -> BuiltMetric:
    pair = fields.inline_pair(
        _expr(params, "a11", "1"),
        _expr(params, "a12", "0"),
        _expr(params, "a22", "1"),
        _expr(params, "b1", "0"),
        _expr(params, "b2", "0"),
        _required_domain(params),
    )
    return BuiltMetric(pair)


@builder_registry.decorator("conformal")
def _conformal(params: Dict[str, Any]) -> BuiltMetric:
    pair = fields.conformal_pair(
        _expr(params, "sigma", "0"),
        _expr(params, "xi"),
        _expr(params, "eta"),
        float(params.get("b", 1.0)),
        _required_domain(params),
        normalize=bool(params.get("normalize", True)),
    )
    return BuiltMetric(pair)


@builder_registry.decorator("th2")
def _th2(params: Dict[str, Any]) -> BuiltMetric:
    sign = _sign(params)
    f = HolomorphicPair(_expr(params, "u", "x1"), _expr(params, "v", "x2"))
    pair = build_th2(_expr(params, "B"), f, sign, _domain(params, Box(0.5, 1.5, 0.5, 1.5)))
    return BuiltMetric(pair, QuadraticFamily(sign), ClassId.DOUGLAS_COR)


def _ks(params: Dict[str, Any]) -> Tuple[float, float, float]:
    try:
        return float(params["k1"]), float(params["k2"]), float(params["k3"])
    except KeyError as e:
        raise ConfigError(f"metric.params.{e.args[0]}", "missing parameter") from e


@builder_registry.decorator("th001")
def _th001(params: Dict[str, Any]) -> BuiltMetric:
    k1, k2, k3 = _ks(params)
    th = Th001Params(
        B=_expr(params, "B"),
        f=HolomorphicPair(_expr(params, "u"), _expr(params, "v")),
        k1=k1, k2=k2, k3=k3,
    )
    pair = build_th001(th, _required_domain(params))
    return BuiltMetric(pair, QuarticODE(k1, k2, k3, s_max=float(params.get("s_max", 1.0))), ClassId.DOUGLAS_I)


@builder_registry.decorator("th001_special")
def _th001_special(params: Dict[str, Any]) -> BuiltMetric:
    k1, k2, k3 = _ks(params)
    th = special_th001_params(float(params.get("c1", 0.3)), float(params.get("c2", 0.4)), k1, k2, k3)
    pair = build_th001(th, _domain(params, Box(0.0, 1.0, 0.0, 1.0)), name="th001_special")
    return BuiltMetric(pair, QuarticODE(k1, k2, k3, s_max=float(params.get("s_max", 1.0))), ClassId.DOUGLAS_I)


@builder_registry.decorator("pf_example")
def _pf_example(params: Dict[str, Any]) -> BuiltMetric:
    pair, family = build_pf_example(
        float(params.get("c1", 0.0)),
        float(params.get("c2", 0.0)),
        float(params.get("c3", 1.0)),
        float(params.get("c4", 0.0)),
        _sign(params),
        _domain(params),
    )
    return BuiltMetric(pair, family, ClassId.PF_COR)


@builder_registry.decorator("singular")
def _singular(params: Dict[str, Any]) -> BuiltMetric:
    variant = str(params.get("variant", "singular_b"))
    pair, family = build_singular_family(
        _expr(params, "sigma", "0"),
        _expr(params, "xi"),
        _expr(params, "eta"),
        float(params.get("b", 1.0)),
        variant,
        _required_domain(params),
        c=float(params.get("c", 1.0)),
        k=float(params.get("k", 0.0)),
        m=int(params.get("m", 1)),
        ctilde=float(params.get("ctilde", 0.0)),
    )
    hint = {"singular_b": ClassId.DOUGLAS_SING, "integer_power": ClassId.DOUGLAS_III, "half_power": ClassId.DOUGLAS_IV}
    return BuiltMetric(pair, family, hint[variant])


@builder_registry.decorator("ex01")
def _ex01(params: Dict[str, Any]) -> BuiltMetric:
    pair, family = build_ex01(float(params.get("b", 1.0)), float(params.get("c", 1.0)), int(params.get("m", 1)), _domain(params))
    return BuiltMetric(pair, family, ClassId.PF_III)


@builder_registry.decorator("ex02")
def _ex02(params: Dict[str, Any]) -> BuiltMetric:
    pair, family = build_ex02(float(params.get("b", 1.0)), float(params.get("c", 1.0)), int(params.get("m", 1)), _domain(params))
    return BuiltMetric(pair, family, ClassId.PF_IV)


@builder_registry.decorator("section7")
def _section7(params: Dict[str, Any]) -> BuiltMetric:
    pair, family = section7_pair(_sign(params), float(params.get("c", 0.0)), _domain(params))
    return BuiltMetric(pair, family, ClassId.DOUGLAS_COR)


def _base(params: Dict[str, Any]) -> BuiltMetric:
    base = params.get("base")
    if not isinstance(base, dict) or "builder" not in base:
        raise ConfigError("metric.params.base", "expected {'builder': ..., 'params': {...}}")
    return build_from_spec(base["builder"], base.get("params", {}))


@builder_registry.decorator("deform_th2")
def _deform_th2(params: Dict[str, Any]) -> BuiltMetric:
    base = _base(params)
    return BuiltMetric(deform_th2(base.pair, _sign(params)), base.family)


@builder_registry.decorator("deform_th001")
def _deform_th001(params: Dict[str, Any]) -> BuiltMetric:
    base = _base(params)
    if "c" in params:
        return BuiltMetric(deform_th001(base.pair, c=float(params["c"])), base.family)
    if all(k in params for k in ("k1", "k2", "k3")):
        return BuiltMetric(deform_th001(base.pair, ks=_ks(params)), base.family)
    if isinstance(base.family, QuarticODE):
        f = base.family
        return BuiltMetric(deform_th001(base.pair, ks=(f.k1, f.k2, f.k3)), base.family)
    raise ConfigError("metric.params.c", "give c, or k1/k2/k3, or a quartic_ode base")


def build_from_spec(name: str, params: Dict[str, Any]) -> BuiltMetric:
    """
    Build a metric by registry name

    Raises:
        ConfigError: unknown builder, bad parameters or an inadmissible construction
    """
    factory = builder_registry.require(name, "metric.builder")
    try:
        return factory(params)
    except ConfigError:
        raise
    except (RangeViolation, ConstraintViolation, DegenerateForm) as e:
        raise ConfigError("metric.params", str(e)) from e
    except ABFinslerError as e:
        raise ConfigError("metric", f"construction failed: {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError("metric.params", str(e)) from e


def family_for(built: BuiltMetric, spec: Optional[Tuple[str, Dict[str, Any]]]) -> Optional[PhiFamily]:
    """Config family overrides the builder's own"""
    if spec is not None:
        return family_from_spec(*spec)
    return built.family
