"""
Metric Fields
Riemannian metrics, 1-forms and the (alpha, beta) pairs built from them
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from app.core import jets as jm
from app.core.diffcore import FinslerFunction, evaluate_components
from app.core.exceptions import DegenerateForm, SingularMetric
from app.core.jets import Jet
from app.models import Box, ExcludedLocus, Point
from app.services import phi as phi_service
from app.services.phi import PhiFamily

logger = logging.getLogger(__name__)

ScalarFn = Callable[..., object]


@dataclass(frozen=True)
class RiemannMetricField:
    """a(x1, x2) -> (a11, a12, a22); works on floats and jets"""
    a: Callable[..., Tuple[object, object, object]]
    description: str = ""


@dataclass(frozen=True)
class OneFormField:
    """b(x1, x2) -> (b1, b2); works on floats and jets"""
    b: Callable[..., Tuple[object, object]]
    description: str = ""


@dataclass(frozen=True)
class MetricPair:
    alpha: RiemannMetricField
    beta: OneFormField
    domain: Box
    excluded_loci: Tuple[ExcludedLocus, ...] = ()
    name: str = "pair"

    def is_excluded(self, p: Point, radius: float) -> bool:
        return any(locus.near(p, radius) for locus in self.excluded_loci)

    def with_domain(self, domain: Box) -> "MetricPair":
        return MetricPair(self.alpha, self.beta, domain, self.excluded_loci, self.name)


@dataclass
class MetricAt:
    """Metric data at a point: a_ij, a^ij and da[i, j, k] = d a_ij / d x^k"""
    a: np.ndarray
    a_inv: np.ndarray
    da: np.ndarray


def _components_jets(func, p: Point, what: str):
    X = (Jet.variable(p.x1, 0, 2), Jet.variable(p.x2, 1, 2))
    return evaluate_components(func, X, what)


def metric_at(pair: MetricPair, p: Point) -> MetricAt:
    """
    Evaluate a_ij with first derivatives at p

    Raises:
        SingularMetric: a_ij singular or not positive definite
    """
    a11, a12, a22 = _components_jets(pair.alpha.a, p, f"a_ij at {p}")
    a = np.array([[a11.value, a12.value], [a12.value, a22.value]])
    det = a11.value * a22.value - a12.value ** 2
    if not (det > 0 and a11.value > 0):
        raise SingularMetric(p, det)
    da = np.zeros((2, 2, 2))
    da[0, 0], da[0, 1], da[1, 0], da[1, 1] = a11.grad, a12.grad, a12.grad, a22.grad
    a_inv = np.array([[a22.value, -a12.value], [-a12.value, a11.value]]) / det
    return MetricAt(a=a, a_inv=a_inv, da=da)


def christoffel(pair: MetricPair, p: Point) -> Tuple[np.ndarray, np.ndarray]:
    """
    Levi-Civita symbols of alpha at p

    Returns:
        (Gamma, a_inv) with Gamma[i, j, k] = Gamma^i_{jk}

    Raises:
        SingularMetric: a_ij singular at p
    """
    m = metric_at(pair, p)
    da = m.da
    # lowered[l, j, k] = 1/2 (d_j a_lk + d_k a_lj - d_l a_jk)
    lowered = 0.5 * (
        np.einsum("lkj->ljk", da) + np.einsum("ljk->ljk", da) - np.einsum("jkl->ljk", da)
    )
    gamma = np.einsum("il,ljk->ijk", m.a_inv, lowered)
    gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    return gamma, m.a_inv


def one_form_at(pair: MetricPair, p: Point) -> Tuple[np.ndarray, np.ndarray]:
    """b_i and db[i, j] = d b_i / d x^j at p"""
    b1, b2 = _components_jets(pair.beta.b, p, f"b_i at {p}")
    return np.array([b1.value, b2.value]), np.array([b1.grad, b2.grad])


def beta_norm2(pair: MetricPair, p: Point) -> float:
    """b^2 = a^ij b_i b_j at p"""
    m = metric_at(pair, p)
    b, _ = one_form_at(pair, p)
    return float(b @ m.a_inv @ b)


def beta_norm2_field(pair: MetricPair) -> ScalarFn:
    """b^2 as a scalar field on floats or jets"""

    def b2(x1, x2):
        a11, a12, a22 = pair.alpha.a(x1, x2)
        b1, b2_ = pair.beta.b(x1, x2)
        det = a11 * a22 - a12 * a12
        return (a22 * b1 * b1 - 2 * a12 * b1 * b2_ + a11 * b2_ * b2_) / det

    return b2


def positive_definite(pair: MetricPair, p: Point) -> bool:
    try:
        a11, a12, a22 = (jm.value_of(v) for v in pair.alpha.a(p.x1, p.x2))
    except (ValueError, ZeroDivisionError, OverflowError):
        return False
    return bool(np.all(np.linalg.eigvalsh(np.array([[a11, a12], [a12, a22]])) > 0))


def check_pair(pair: MetricPair, points: Iterable[Point]) -> None:
    """
    Assert positive definiteness at every given point

    Raises:
        SingularMetric: the first failing point
    """
    for p in points:
        if not positive_definite(pair, p):
            raise SingularMetric(p, float("nan"))


def finsler_function(pair: MetricPair, family: PhiFamily) -> FinslerFunction:
    """F(x, y) = alpha * phi(beta / alpha) on floats or jets"""

    def F(x1, x2, y1, y2):
        a11, a12, a22 = pair.alpha.a(x1, x2)
        b1, b2 = pair.beta.b(x1, x2)
        alpha = jm.sqrt(a11 * y1 * y1 + 2 * a12 * y1 * y2 + a22 * y2 * y2)
        beta = b1 * y1 + b2 * y2
        return alpha * phi_service.phi_apply(family, beta / alpha)

    return F


def riemannian_function(pair: MetricPair) -> FinslerFunction:
    def F(x1, x2, y1, y2):
        a11, a12, a22 = pair.alpha.a(x1, x2)
        return jm.sqrt(a11 * y1 * y1 + 2 * a12 * y1 * y2 + a22 * y2 * y2)

    return F


# Constructors


def _constant(value: float) -> ScalarFn:
    return lambda x1, x2: value


def conformal_pair(
    sigma: ScalarFn,
    xi: ScalarFn,
    eta: ScalarFn,
    b: float,
    domain: Box,
    excluded_loci: Sequence[ExcludedLocus] = (),
    name: str = "conformal",
    normalize: bool = True,
) -> MetricPair:
    """
    alpha = e^sigma |y|, beta = b e^sigma (xi y1 + eta y2) / sqrt(xi^2 + eta^2)

    With normalize=False the 1-form is e^sigma (xi y1 + eta y2) and b is ignored.

    Raises:
        DegenerateForm: at evaluation, when xi = eta = 0
    """
    if normalize and not b > 0:
        raise ValueError(f"b must be positive, got {b}")

    def a(x1, x2):
        e2 = jm.exp(2 * sigma(x1, x2))
        return e2, 0.0, e2

    def one_form(x1, x2):
        e = jm.exp(sigma(x1, x2))
        u, v = xi(x1, x2), eta(x1, x2)
        if not normalize:
            return e * u, e * v
        n2 = u * u + v * v
        if jm.value_of(n2) == 0.0:
            raise DegenerateForm(Point(jm.value_of(x1), jm.value_of(x2)))
        scale = b * e / jm.sqrt(n2)
        return scale * u, scale * v

    logger.debug(f"Built conformal pair '{name}' on {domain}")
    return MetricPair(
        alpha=RiemannMetricField(a, "e^{2 sigma} delta"),
        beta=OneFormField(one_form, "conformal 1-form"),
        domain=domain,
        excluded_loci=tuple(excluded_loci),
        name=name,
    )


def flat_pair(b1: ScalarFn, b2: ScalarFn, domain: Box, name: str = "flat") -> MetricPair:
    """Euclidean alpha with the 1-form b1 y1 + b2 y2"""
    return MetricPair(
        alpha=RiemannMetricField(lambda x1, x2: (1.0, 0.0, 1.0), "delta"),
        beta=OneFormField(lambda x1, x2: (b1(x1, x2), b2(x1, x2)), "formula"),
        domain=domain,
        name=name,
    )


def euclidean_pair(domain: Box) -> MetricPair:
    return flat_pair(_constant(0.0), _constant(0.0), domain, name="euclidean")


def inline_pair(
    a11: ScalarFn,
    a12: ScalarFn,
    a22: ScalarFn,
    b1: ScalarFn,
    b2: ScalarFn,
    domain: Box,
    name: str = "inline",
) -> MetricPair:
    return MetricPair(
        alpha=RiemannMetricField(lambda x1, x2: (a11(x1, x2), a12(x1, x2), a22(x1, x2)), "inline"),
        beta=OneFormField(lambda x1, x2: (b1(x1, x2), b2(x1, x2)), "inline"),
        domain=domain,
        name=name,
    )


def scaled_pair(pair: MetricPair, factor: ScalarFn, name: Optional[str] = None) -> MetricPair:
    """Same alpha, 1-form multiplied by a scalar field"""

    def one_form(x1, x2):
        b1, b2 = pair.beta.b(x1, x2)
        f = factor(x1, x2)
        return f * b1, f * b2

    return MetricPair(
        alpha=pair.alpha,
        beta=OneFormField(one_form, f"scaled {pair.beta.description}"),
        domain=pair.domain,
        excluded_loci=pair.excluded_loci,
        name=name or f"{pair.name}-scaled",
    )
