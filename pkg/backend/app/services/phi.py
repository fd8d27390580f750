"""
Phi Families
Second-order evaluation of every phi(s) family, the Taylor map and regularity scans
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import ClassVar, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq, minimize_scalar

from app.core import jets as jm
from app.core.config import get_settings
from app.core.exceptions import (
    ConfigError,
    DomainExit,
    RandersTypeDegenerate,
    RangeViolation,
    SingularODE,
)
from app.core.integrators import gauss_legendre, rk4_integrate
from app.core.jets import Jet, TaylorSeries
from app.core.registry import Registry
from app.models import Sign

logger = logging.getLogger(__name__)


class PhiJet(NamedTuple):
    phi: float
    dphi: float
    d2phi: float


class TaylorData(NamedTuple):
    """a_i = phi^(i)(0) / i!"""
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float


# Families


@dataclass(frozen=True)
class PhiFamily:
    kind: ClassVar[str] = "abstract"

    def bound(self) -> Optional[float]:
        """Open bound on |s|, None when unbounded"""
        return None

    def check_domain(self, s: float) -> None:
        floor = get_settings().DENOMINATOR_FLOOR
        bound = self.bound()
        if bound is not None and abs(s) > bound - floor:
            raise DomainExit(f"{self.kind} at s={s:.6g}", abs(s), bound)

    def closed_form(self, s):
        """phi on float, Jet or TaylorSeries; None for quadrature and ODE families"""
        return None


@dataclass(frozen=True)
class RandersType(PhiFamily):
    """phi = eps*s + sqrt(1 + k s^2)"""
    epsilon: float = 1.0
    k: float = 0.0
    kind: ClassVar[str] = "randers"

    def bound(self) -> Optional[float]:
        return 1.0 / math.sqrt(-self.k) if self.k < 0 else None

    def closed_form(self, s):
        return self.epsilon * s + jm.sqrt(1 + self.k * s * s)


@dataclass(frozen=True)
class QuarticODE(PhiFamily):
    """phi solving {1+(k1+k3)s^2+k2 s^4} phi'' = (k1+k2 s^2)(phi - s phi'), phi(0)=1, phi'(0)=eps"""
    k1: float
    k2: float
    k3: float
    epsilon: float = 0.0
    s_max: float = 1.0
    kind: ClassVar[str] = "quartic_ode"

    def bound(self) -> Optional[float]:
        return self.s_max

    def check_domain(self, s: float) -> None:
        if abs(s) > self.s_max:
            raise DomainExit(f"{self.kind} at s={s:.6g}", abs(s), self.s_max)


@dataclass(frozen=True)
class SquareRootFamily(PhiFamily):
    """phi = sqrt(1 - k s^2) + c s^2 / sqrt(1 - k s^2)"""
    k: float
    c: float
    kind: ClassVar[str] = "square_root"

    def __post_init__(self):
        if self.c == 0:
            raise RangeViolation("c", "SquareRootFamily requires c != 0")

    def bound(self) -> Optional[float]:
        return 1.0 / math.sqrt(self.k) if self.k > 0 else None

    def closed_form(self, s):
        w = 1 - self.k * s * s
        return (w + self.c * s * s) / jm.sqrt(w)


@dataclass(frozen=True)
class QuadraticFamily(PhiFamily):
    """phi = 1 +/- s^2"""
    sign: Sign = Sign.PLUS
    kind: ClassVar[str] = "quadratic"

    def closed_form(self, s):
        return 1 + self.sign.factor * s * s


@dataclass(frozen=True)
class _SingularIntegralFamily(PhiFamily):
    b: float
    c: float
    k: float
    m: int

    def __post_init__(self):
        if not self.b > 0:
            raise RangeViolation("b", f"must be positive, got {self.b}")
        if int(self.m) != self.m or self.m < 1:
            raise RangeViolation("m", f"must be an integer >= 1, got {self.m}")

    def bound(self) -> Optional[float]:
        b = self.b
        if self.k > 0:
            b = min(b, 1.0 / math.sqrt(self.k))
        return b

    def weight(self, t):
        """(t^2 / (1 - k t^2))^power on float, Jet or TaylorSeries"""
        raise NotImplementedError

    def integrand(self, t):
        return self.c * self.weight(t) * (self.b * self.b - t * t) ** -1.5


@dataclass(frozen=True)
class IntegerPower(_SingularIntegralFamily):
    """phi = sqrt(b^2-s^2)/b + sqrt(b^2-s^2) * int_0^s c (b^2-t^2)^(-3/2) (t^2/(1-k t^2))^m dt"""
    kind: ClassVar[str] = "integer_power"

    def weight(self, t):
        m = int(self.m)
        return (t * t) ** m * (1 - self.k * t * t) ** (-m)


@dataclass(frozen=True)
class HalfPower(_SingularIntegralFamily):
    """
    As IntegerPower with exponent m - 1/2

    (t^2)^(m-1/2) is taken as t^(2m-1), so the weight is odd in t and the
    correction term of phi is even and smooth at s = 0.
    """
    kind: ClassVar[str] = "half_power"

    def weight(self, t):
        m = int(self.m)
        return t ** (2 * m - 1) * (1 - self.k * t * t) ** (0.5 - m)


@dataclass(frozen=True)
class SingularB(PhiFamily):
    """phi = (b + ctilde s^2) / sqrt(b^2 - s^2)"""
    b: float
    ctilde: float
    kind: ClassVar[str] = "singular_b"

    def __post_init__(self):
        if not self.b > 0:
            raise RangeViolation("b", f"must be positive, got {self.b}")

    def bound(self) -> Optional[float]:
        return self.b

    def closed_form(self, s):
        return (self.b + self.ctilde * s * s) / jm.sqrt(self.b * self.b - s * s)


# Quadrature for the singular integral families


def quadrature_y8_y10(family: _SingularIntegralFamily, s: float) -> float:
    """
    int_0^s c/(b^2-t^2)^(3/2) * (t^2/(1-k t^2))^power dt

    Evaluated after t = b sin(theta), which cancels the endpoint factor
    cos^3(theta) against dt down to a bounded 1/cos^2(theta).

    Raises:
        DomainExit: |s| >= b or 1 - k t^2 <= 0 on [0, s]
    """
    family.check_domain(s)
    return _integral(family, float(s))


@lru_cache(maxsize=65536)
def _integral(family: _SingularIntegralFamily, s: float) -> float:
    if s == 0.0:
        return 0.0
    b = family.b
    theta_s = math.asin(s / b)

    def g(theta: float) -> float:
        cos_t = math.cos(theta)
        return family.c * family.weight(b * math.sin(theta)) / (b * b * cos_t * cos_t)

    result = gauss_legendre(g, 0.0, theta_s, tol=get_settings().QUAD_TOL, what=f"{family.kind} at s={s:.6g}")
    return result.value


def _integral_family_jet(family: _SingularIntegralFamily, s: float) -> PhiJet:
    family.check_domain(s)
    b = family.b
    R = math.sqrt(b * b - s * s)
    dR = -s / R
    d2R = -b * b / R ** 3
    inner = 1.0 / b + _integral(family, float(s))
    f = family.integrand(Jet.variable(s, 0, 1))
    dI, d2I = f.value, float(f.grad[0])
    return PhiJet(
        phi=R * inner,
        dphi=dR * inner + R * dI,
        d2phi=d2R * inner + 2 * dR * dI + R * d2I,
    )


# Quartic ODE family


@dataclass
class OdeSolution:
    """Dense solution of the quartic-coefficient ODE on [-s_max, s_max]"""
    k1: float
    k2: float
    k3: float
    epsilon: float
    s_max: float
    nodes: np.ndarray
    phi_spline: CubicHermiteSpline
    dphi_spline: CubicHermiteSpline
    richardson_error: float
    residual: float

    def leading(self, s: float) -> float:
        return 1 + (self.k1 + self.k3) * s * s + self.k2 * s ** 4

    def rhs(self, s: float, phi: float, dphi: float) -> float:
        return (self.k1 + self.k2 * s * s) * (phi - s * dphi) / self.leading(s)

    def jet(self, s: float) -> PhiJet:
        if abs(s) > self.s_max:
            raise DomainExit(f"ODE solution at s={s:.6g}", abs(s), self.s_max)
        phi = float(self.phi_spline(s))
        dphi = float(self.dphi_spline(s))
        return PhiJet(phi, dphi, self.rhs(s, phi, dphi))


def _leading_min(k1: float, k2: float, k3: float, s_max: float) -> Tuple[float, float]:
    s = np.linspace(0.0, s_max, 4097)
    d = 1 + (k1 + k3) * s ** 2 + k2 * s ** 4
    i = int(np.argmin(d))
    return float(s[i]), float(d[i])


def _shoot(k1, k2, k3, epsilon, s_max, steps, direction: float):
    def f(s, state):
        phi, dphi = state
        lead = 1 + (k1 + k3) * s * s + k2 * s ** 4
        return np.array([dphi, (k1 + k2 * s * s) * (phi - s * dphi) / lead])

    h = direction * s_max / steps
    return rk4_integrate(f, 0.0, np.array([1.0, epsilon]), h, steps)


def ode_solve_yg3(
    k1: float,
    k2: float,
    k3: float,
    epsilon: float = 0.0,
    s_max: float = 1.0,
    tol: float = 1e-8,
    steps: Optional[int] = None,
) -> OdeSolution:
    """
    Integrate the quartic-coefficient ODE from s = 0 in both directions

    Fixed-step RK4 with h = s_max/steps, verified against the 2h solution.
    Dense output is Hermite-cubic in (phi, phi') and (phi', phi'').

    Raises:
        SingularODE: 1 + (k1+k3)s^2 + k2 s^4 vanishes on [0, s_max]
    """
    steps = steps or get_settings().ODE_STEPS
    return _ode_solution(float(k1), float(k2), float(k3), float(epsilon), float(s_max), float(tol), int(steps))


@lru_cache(maxsize=64)
def _ode_solution(k1, k2, k3, epsilon, s_max, tol, steps) -> OdeSolution:
    s_bad, lead = _leading_min(k1, k2, k3, s_max)
    if lead <= get_settings().DENOMINATOR_FLOOR:
        raise SingularODE(s_bad, lead)

    sides = []
    richardson = 0.0
    for direction in (1.0, -1.0):
        s, y = _shoot(k1, k2, k3, epsilon, s_max, steps, direction)
        _, y_coarse = _shoot(k1, k2, k3, epsilon, s_max, steps // 2, direction)
        richardson = max(richardson, float(np.max(np.abs(y[::2, 0] - y_coarse[:, 0]))) / 15.0)
        sides.append((s, y))

    (s_pos, y_pos), (s_neg, y_neg) = sides
    nodes = np.concatenate([s_neg[:0:-1], s_pos])
    values = np.concatenate([y_neg[:0:-1], y_pos])
    lead = 1 + (k1 + k3) * nodes ** 2 + k2 * nodes ** 4
    d2 = (k1 + k2 * nodes ** 2) * (values[:, 0] - nodes * values[:, 1]) / lead

    solution = OdeSolution(
        k1=k1, k2=k2, k3=k3, epsilon=epsilon, s_max=s_max, nodes=nodes,
        phi_spline=CubicHermiteSpline(nodes, values[:, 0], values[:, 1]),
        dphi_spline=CubicHermiteSpline(nodes, values[:, 1], d2),
        richardson_error=richardson,
        residual=0.0,
    )
    solution.residual = plug_back_residual(solution, 50)

    logger.debug(
        f"ODE (k1={k1}, k2={k2}, k3={k3}, eps={epsilon}) on |s|<={s_max}: "
        f"richardson={richardson:.2e}, residual={solution.residual:.2e}"
    )
    if richardson > tol or solution.residual > tol:
        logger.warning(
            f"ODE solution above tolerance {tol:.1e}: richardson={richardson:.2e}, "
            f"residual={solution.residual:.2e}"
        )
    return solution


def plug_back_residual(solution: OdeSolution, checkpoints: int = 50) -> float:
    """Max |lead(s) (phi')'(s) - (k1+k2 s^2)(phi - s phi')| at checkpoints between nodes"""
    s = np.linspace(-solution.s_max, solution.s_max, checkpoints + 2)[1:-1]
    phi = solution.phi_spline(s)
    dphi = solution.dphi_spline(s)
    d2phi = solution.dphi_spline(s, 1)
    lead = 1 + (solution.k1 + solution.k3) * s ** 2 + solution.k2 * s ** 4
    residual = lead * d2phi - (solution.k1 + solution.k2 * s ** 2) * (phi - s * dphi)
    return float(np.max(np.abs(residual)))


# Public evaluation


def phi_jet(family: PhiFamily, s: float) -> PhiJet:
    """
    (phi, phi', phi'') at s

    Raises:
        DomainExit: s outside the family's regular interval
        SingularODE: ODE leading coefficient vanishes
    """
    s = float(s)
    if isinstance(family, QuarticODE):
        family.check_domain(s)
        solution = ode_solve_yg3(family.k1, family.k2, family.k3, family.epsilon, family.s_max)
        return solution.jet(s)
    if isinstance(family, _SingularIntegralFamily):
        return _integral_family_jet(family, s)

    family.check_domain(s)
    try:
        jet = family.closed_form(Jet.variable(s, 0, 1))
    except (ValueError, ZeroDivisionError) as e:
        raise DomainExit(f"{family.kind} at s={s:.6g}") from e
    return PhiJet(jet.value, float(jet.grad[0]), float(jet.hess[0, 0]))


def phi_value(family: PhiFamily, s: float) -> float:
    return phi_jet(family, s).phi


def phi_apply(family: PhiFamily, s):
    """phi(s) for a float or a Jet argument"""
    if isinstance(s, Jet):
        pj = phi_jet(family, s.value)
        return s.apply(pj.phi, pj.dphi, pj.d2phi)
    return phi_jet(family, s).phi


def phi_series(family: PhiFamily, order: int = 6) -> TaylorSeries:
    """Taylor expansion of phi at s = 0 by truncated series arithmetic"""
    s = TaylorSeries.variable(0.0, order)
    closed = family.closed_form(s)
    if closed is not None:
        return closed

    if isinstance(family, _SingularIntegralFamily):
        R = jm.sqrt(family.b * family.b - s * s)
        integral = family.integrand(s).integral()
        return R * (integral + 1.0 / family.b)

    if isinstance(family, QuarticODE):
        lead = 1 + (family.k1 + family.k3) * s * s + family.k2 * s ** 4
        numer = family.k1 + family.k2 * s * s
        phi = 1 + family.epsilon * s
        for _ in range(order):
            d2 = numer * (phi - s * phi.derivative()) / lead
            phi = d2.integral().integral() + family.epsilon * s + 1.0
        return phi

    raise TypeError(f"No series expansion for {type(family).__name__}")


def phi_taylor(family: PhiFamily) -> TaylorData:
    return TaylorData(*[float(c) for c in phi_series(family, 6).coefficients])


def _randers_degenerate(a: TaylorData) -> bool:
    scale = max(1.0, a.a2 * a.a2, 2 * abs(a.a4))
    return abs(2 * a.a4 + a.a2 * a.a2) <= 1e-12 * scale


def is_randers_type(family: PhiFamily) -> bool:
    return _randers_degenerate(phi_taylor(family))


def taylor_to_k(family: PhiFamily) -> Tuple[float, float, float]:
    """
    (k1, k2, k3) from the Taylor coefficients a2, a4, a6

    Raises:
        RandersTypeDegenerate: 2*a4 + a2^2 = 0
    """
    a = phi_taylor(family)
    if _randers_degenerate(a):
        raise RandersTypeDegenerate(a.a2, a.a4)
    a2, a4, a6 = a.a2, a.a4, a.a6
    denom = 2 * a4 + a2 * a2
    k1 = 2 * a2
    k2 = 2 * (a4 * a2 * a2 - 5 * a2 * a6 + 12 * a4 * a4) / denom
    k3 = -(11 * a2 * a4 + 5 * a6 + 3 * a2 ** 3) / denom
    return k1, k2, k3


def check_k_admissible(k1: float, k2: float, k3: float, regular: bool = True, eps: float = 1e-12) -> None:
    """
    Raises:
        RangeViolation: k2 = k1*k3, or (regular) k2 = (2k1+3k3)(3k1+2k3)/25
    """
    scale = max(1.0, abs(k1), abs(k2), abs(k3)) ** 2
    if abs(k2 - k1 * k3) <= eps * scale:
        raise RangeViolation("k2", f"k2 = k1*k3 = {k1 * k3:.6g} is excluded")
    special = (2 * k1 + 3 * k3) * (3 * k1 + 2 * k3) / 25.0
    if regular and abs(k2 - special) <= eps * scale:
        raise RangeViolation("k2", f"k2 = (2k1+3k3)(3k1+2k3)/25 = {special:.6g} is excluded")


def square_root_from_c6(k: float, c: float, sign: Sign) -> SquareRootFamily:
    """alpha~ +/- beta~^2/alpha~ with alpha~ = sqrt(alpha^2 - k beta^2), beta~ = c beta"""
    return SquareRootFamily(k=k, c=sign.factor * c * c)


# Regularity


def regularity_margin(family: PhiFamily, rho: float, samples: int = 201) -> float:
    """
    min over |s| <= rho of phi - s phi' + (rho^2 - s^2) phi''

    Raises:
        DomainExit: rho beyond the family's domain
    """
    bound = family.bound()
    if bound is not None and rho >= bound:
        raise DomainExit(f"regularity radius for {family.kind}", rho, bound)

    def margin(s: float) -> float:
        pj = phi_jet(family, s)
        return pj.phi - s * pj.dphi + (rho * rho - s * s) * pj.d2phi

    grid = np.unique(np.concatenate([np.linspace(-rho, rho, samples), [0.0]]))
    values = np.array([margin(s) for s in grid])
    i = int(np.argmin(values))
    best = float(values[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        refined = minimize_scalar(margin, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(refined.fun))
    return best


def regularity_radius(family: PhiFamily, rho_max: float, samples: int = 200) -> Optional[float]:
    """First rho in (0, rho_max] where the regularity margin reaches zero"""
    bound = family.bound()
    if bound is not None:
        rho_max = min(rho_max, bound - 2 * get_settings().DENOMINATOR_FLOOR)
    grid = np.linspace(rho_max / samples, rho_max, samples)
    previous_rho, previous = 0.0, regularity_margin(family, 0.0)
    for rho in grid:
        current = regularity_margin(family, float(rho))
        if previous > 0 >= current:
            radius = float(brentq(lambda r: regularity_margin(family, r), previous_rho, float(rho), xtol=1e-12))
            if isinstance(family, QuadraticFamily) and family.sign is Sign.MINUS:
                logger.warning(
                    f"QuadraticFamily(-) regularity radius {radius:.6f} differs from the "
                    f"stated regularity bound b < 1/2"
                )
            return radius
        previous_rho, previous = float(rho), current
    return None


# Named families

family_registry: Registry = Registry("phi family")


def _sign(value: Union[str, Sign]) -> Sign:
    return value if isinstance(value, Sign) else Sign(value)


family_registry.register("randers", lambda p: RandersType(epsilon=p.get("epsilon", 1.0), k=p.get("k", 0.0)))
family_registry.register(
    "quartic_ode",
    lambda p: QuarticODE(p["k1"], p["k2"], p["k3"], p.get("epsilon", 0.0), p.get("s_max", 1.0)),
)
family_registry.register("square_root", lambda p: SquareRootFamily(k=p["k"], c=p["c"]))
family_registry.register("quadratic", lambda p: QuadraticFamily(_sign(p.get("sign", "+"))))
family_registry.register("integer_power", lambda p: IntegerPower(p["b"], p["c"], p.get("k", 0.0), int(p["m"])))
family_registry.register("half_power", lambda p: HalfPower(p["b"], p["c"], p.get("k", 0.0), int(p["m"])))
family_registry.register("singular_b", lambda p: SingularB(p["b"], p["ctilde"]))


def family_from_spec(name: str, params: Dict[str, object]) -> PhiFamily:
    """
    Build a family by registry name

    Raises:
        ConfigError: unknown family name or missing parameter
    """
    factory = family_registry.require(name, "family.name")
    try:
        return factory(params)
    except KeyError as e:
        raise ConfigError(f"family.params.{e.args[0]}", "missing parameter") from e
    except RangeViolation as e:
        raise ConfigError(f"family.params.{e.parameter}", str(e)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError("family.params", str(e)) from e
