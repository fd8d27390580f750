"""
Verification Checks
Douglas fits, Hamel residuals, class equations with recovered scalars, projective factors, conformality, scans and geodesics
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import get_settings
from app.core.diffcore import FinslerFunction, x_jet, xy_jet
from app.core.exceptions import (
    ABFinslerError,
    ConfigError,
    DomainExit,
    InsufficientSamples,
    PrerequisiteFailed,
    RandersTypeDegenerate,
    RankDeficient,
)
from app.core.exclusion import ExclusionStats
from app.models import Box, ClassId, ConformalityMode, Direction, Point, Sign, Verdict
from app.services import phi as phi_service
from app.services.betacalc import BetaDecomposition, contractions, decompose
from app.services.fields import MetricPair, beta_norm2, beta_norm2_field, christoffel, finsler_function
from app.services.phi import (
    HalfPower,
    IntegerPower,
    PhiFamily,
    QuadraticFamily,
    QuarticODE,
    SingularB,
    SquareRootFamily,
)
from app.services.sampling import unit_directions
from app.services.spray import (
    GeodesicTrace,
    geodesic_trace,
    pf_condition_residual,
    projective_factor,
    riemann_spray,
    spray_ab,
    spray_generic,
)

logger = logging.getLogger(__name__)

GProvider = Callable[[Point, Direction], np.ndarray]

MIN_DOUGLAS_ANGLES = 8


@dataclass
class RecoveredScalars:
    """Free scalars fitted pointwise, aligned with the report's points"""
    tau: List[Optional[float]] = field(default_factory=list)
    d: List[Optional[float]] = field(default_factory=list)
    rho: List[Optional[Tuple[float, float]]] = field(default_factory=list)
    lam: List[Optional[float]] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not any(v is not None for v in self.tau + self.d + self.rho + self.lam)

    def to_dict(self) -> Dict[str, list]:
        out: Dict[str, list] = {}
        for name in ("tau", "d", "rho", "lam"):
            values = getattr(self, name)
            if any(v is not None for v in values):
                out[name] = [list(v) if isinstance(v, tuple) else v for v in values]
        return out


@dataclass
class VerificationReport:
    check: str
    grid: str
    tolerance: float
    points: List[Tuple[float, float]] = field(default_factory=list)
    residuals: List[Optional[float]] = field(default_factory=list)
    recovered: RecoveredScalars = field(default_factory=RecoveredScalars)
    stats: Optional[ExclusionStats] = None
    verdict: Verdict = Verdict.INCONCLUSIVE
    finding: str = ""
    details: Dict[str, object] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def max_residual(self) -> Optional[float]:
        usable = [r for r in self.residuals if r is not None]
        return max(usable) if usable else None

    @property
    def mean_residual(self) -> Optional[float]:
        usable = [r for r in self.residuals if r is not None]
        return float(np.mean(usable)) if usable else None

    def decide(self) -> "VerificationReport":
        """pass iff max residual <= tolerance, unless too many points were excluded"""
        worst = self.max_residual
        if worst is None or (self.stats is not None and self.stats.is_inconclusive()):
            self.verdict = Verdict.INCONCLUSIVE
        elif worst <= self.tolerance:
            self.verdict = Verdict.PASS
        else:
            self.verdict = Verdict.FAIL
        logger.info(
            f"{self.check}: {self.verdict.value} (max residual "
            f"{'n/a' if worst is None else f'{worst:.3e}'}, tol {self.tolerance:.1e})"
        )
        return self

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": self.check,
            "grid": self.grid,
            "tolerance": self.tolerance,
            "verdict": self.verdict.value,
            "finding": self.finding,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "points": [list(p) for p in self.points],
            "residuals": self.residuals,
            "recovered": self.recovered.to_dict(),
            "exclusions": self.stats.to_dict() if self.stats else None,
            "details": self.details,
            "seed": self.seed,
        }


def _run_grid(
    report: VerificationReport,
    points: Sequence[Point],
    evaluate: Callable[[Point], Tuple[float, Dict[str, object]]],
) -> VerificationReport:
    """Evaluate every point with failures isolated and recorded"""
    stats = ExclusionStats(report.check)
    report.stats = stats
    for p in points:
        report.points.append((p.x1, p.x2))
        try:
            residual, recovered = evaluate(p)
        except RankDeficient as e:
            stats.record_flagged(str(p), str(e))
            residual, recovered = None, {}
        except ABFinslerError as e:
            stats.record_excluded(str(p), e)
            residual, recovered = None, {}
        else:
            stats.record_included()
        report.residuals.append(residual)
        report.recovered.tau.append(recovered.get("tau"))
        report.recovered.d.append(recovered.get("d"))
        report.recovered.rho.append(recovered.get("rho"))
        report.recovered.lam.append(recovered.get("lam"))
    if stats.excluded or stats.flagged:
        logger.warning(
            f"{report.check}: {stats.excluded} excluded, {stats.flagged} flagged of {stats.total} points"
        )
    return report.decide()


# Douglas polynomial fit


@dataclass(frozen=True)
class DouglasFit:
    residual: float
    usable: int
    excluded: int
    coefficients: np.ndarray


def douglas_fit(G_provider: GProvider, p: Point, n_angles: Optional[int] = None) -> DouglasFit:
    """
    Fit G^1 y^2 - G^2 y^1 on the unit circle to span{cos^3, cos^2 sin, cos sin^2, sin^3}

    The residual is max|misfit| / max|data|, 0/0 -> 0. Data no larger than
    DOUGLAS_DATA_FLOOR * max|G| is rounding noise and counts as zero.

    Raises:
        InsufficientSamples: fewer than 8 angles evaluated
    """
    settings = get_settings()
    n_angles = n_angles or settings.N_ANGLES
    rows, data, g_norms = [], [], []
    excluded = 0
    for k in range(n_angles):
        theta = 2.0 * math.pi * k / n_angles
        y = Direction.at_angle(theta)
        try:
            G = G_provider(p, y)
        except ABFinslerError as e:
            excluded += 1
            logger.debug(f"Douglas fit at {p}: angle {theta:.4f} excluded ({type(e).__name__})")
            continue
        c, s = y.y1, y.y2
        rows.append([c ** 3, c * c * s, c * s * s, s ** 3])
        data.append(G[0] * s - G[1] * c)
        g_norms.append(float(np.max(np.abs(G))))

    if len(data) < MIN_DOUGLAS_ANGLES:
        raise InsufficientSamples(len(data), MIN_DOUGLAS_ANGLES)

    A, d = np.array(rows), np.array(data)
    coef, *_ = np.linalg.lstsq(A, d, rcond=None)
    misfit = float(np.max(np.abs(d - A @ coef)))
    scale = float(np.max(np.abs(d)))
    if scale <= settings.DOUGLAS_DATA_FLOOR * max(g_norms):
        residual = 0.0
    else:
        residual = misfit / scale
    return DouglasFit(residual=residual, usable=len(data), excluded=excluded, coefficients=coef)


def douglas_fit_residual(G_provider: GProvider, p: Point, n_angles: Optional[int] = None) -> float:
    return douglas_fit(G_provider, p, n_angles).residual


def restricted_spray(pair: MetricPair, family: PhiFamily, s_limit: Optional[float] = None) -> GProvider:
    """
    spray_ab as a G provider, refusing directions with |beta/alpha| > s_limit * b

    Raises (per call):
        DomainExit: direction outside the restriction
    """

    def provider(p: Point, y: Direction) -> np.ndarray:
        if s_limit is not None:
            _check_s_limit(pair, p, y, s_limit)
        return spray_ab(pair, family, p, y).G

    return provider


def _check_s_limit(pair: MetricPair, p: Point, y: Direction, s_limit: float) -> None:
    a11, a12, a22 = (float(v) for v in pair.alpha.a(p.x1, p.x2))
    b1, b2 = (float(v) for v in pair.beta.b(p.x1, p.x2))
    alpha = math.sqrt(a11 * y.y1 ** 2 + 2 * a12 * y.y1 * y.y2 + a22 * y.y2 ** 2)
    det = a11 * a22 - a12 * a12
    b = math.sqrt((a22 * b1 * b1 - 2 * a12 * b1 * b2 + a11 * b2 * b2) / det)
    s = (b1 * y.y1 + b2 * y.y2) / alpha
    if abs(s) > s_limit * b:
        raise DomainExit(f"|s| at {p}", abs(s), s_limit * b)


def douglas_check(
    pair: MetricPair,
    family: PhiFamily,
    points: Sequence[Point],
    n_angles: Optional[int] = None,
    tol: Optional[float] = None,
    s_limit: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    settings = get_settings()
    provider = restricted_spray(pair, family, s_limit)
    report = VerificationReport(
        check="douglas",
        grid=grid_description,
        tolerance=tol if tol is not None else settings.TOL_DOUGLAS,
        details={"n_angles": n_angles or settings.N_ANGLES},
    )
    return _run_grid(report, points, lambda p: (douglas_fit_residual(provider, p, n_angles), {}))


# Hamel


def hamel_residual(F: FinslerFunction, p: Point, y: Direction) -> np.ndarray:
    """F_{x^m y^l} y^m - F_{x^l}"""
    mj = xy_jet(F, p, y)
    return mj.F_xy.T @ y.as_array() - mj.F_x


def hamel_relative(F: FinslerFunction, p: Point, y: Direction) -> float:
    """|hamel residual| / |F_x|, 0 when both vanish"""
    mj = xy_jet(F, p, y)
    res = float(np.linalg.norm(mj.F_xy.T @ y.as_array() - mj.F_x))
    scale = float(np.linalg.norm(mj.F_x))
    if scale == 0.0:
        return res
    return res / scale


def hamel_check(
    pair: MetricPair,
    family: PhiFamily,
    points: Sequence[Point],
    n_directions: Optional[int] = None,
    s_limit: Optional[float] = None,
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """Max over directions of the relative Hamel residual at each grid point"""
    settings = get_settings()
    F = finsler_function(pair, family)
    directions = unit_directions(n_directions)

    def evaluate(p: Point):
        worst, used = 0.0, 0
        for y in directions:
            if s_limit is not None:
                try:
                    _check_s_limit(pair, p, y, s_limit)
                except DomainExit:
                    continue
            worst = max(worst, hamel_relative(F, p, y))
            used += 1
        if used == 0:
            raise DomainExit(f"all directions at {p} beyond s limit")
        return worst, {}

    report = VerificationReport(
        check="hamel",
        grid=grid_description,
        tolerance=tol if tol is not None else settings.TOL_HAMEL,
        details={"n_directions": len(directions), "s_limit": s_limit},
    )
    return _run_grid(report, points, evaluate)


# Class parameters


@dataclass(frozen=True)
class ClassParams:
    """Constants a class equation binds"""
    k1: Optional[float] = None
    k2: Optional[float] = None
    k3: Optional[float] = None
    c: Optional[float] = None
    k: Optional[float] = None
    b: Optional[float] = None
    m: Optional[int] = None
    sign: Sign = Sign.PLUS

    @classmethod
    def from_family(cls, family: PhiFamily, **overrides) -> "ClassParams":
        values: Dict[str, object] = {}
        if isinstance(family, QuarticODE):
            values.update(k1=family.k1, k2=family.k2, k3=family.k3)
        elif isinstance(family, SquareRootFamily):
            values.update(c=family.c, k=family.k)
        elif isinstance(family, QuadraticFamily):
            values.update(sign=family.sign)
        elif isinstance(family, (IntegerPower, HalfPower)):
            values.update(b=family.b, k=family.k, m=int(family.m))
        elif isinstance(family, SingularB):
            values.update(b=family.b)
        if "k1" not in values:
            try:
                k1, k2, k3 = phi_service.taylor_to_k(family)
                values.update(k1=k1, k2=k2, k3=k3)
            except (RandersTypeDegenerate, TypeError):
                pass
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def require(self, class_id: ClassId, *names: str) -> Tuple:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"params.{missing[0]}", f"required by {class_id.value}")
        return tuple(getattr(self, n) for n in names)


# Class equations on b_{i|j}


@dataclass(frozen=True)
class _BetaEquation:
    data: np.ndarray
    fixed: np.ndarray
    unknowns: List[np.ndarray]
    full: bool
    d_formula: Optional[float] = None
    d_column: Optional[np.ndarray] = None


def _sym(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.outer(u, v) + np.outer(v, u)


def _beta_equation(class_id: ClassId, dec: BetaDecomposition, params: ClassParams) -> _BetaEquation:
    cid = class_id.beta_class
    a, b, b2 = dec.a, dec.b, dec.b2
    bb = np.outer(b, b)
    bs = _sym(b, dec.s_i)
    zero = np.zeros((2, 2))

    if cid is ClassId.DOUGLAS_I:
        k1, k2, k3 = params.require(class_id, "k1", "k2", "k3")
        T = 2.0 * ((1 + k1 * b2) * a + (k2 * b2 + k3) * bb)
        return _BetaEquation(dec.bij, zero, [T], full=True)

    if cid is ClassId.DOUGLAS_II:
        c, k = params.require(class_id, "c", "k")
        T = 2.0 * ((1 + (2 * c - k) * b2) * a - (k + 3 * c - (k + c) * k * b2) * bb)
        denom = 1 - (k + c) * b2
        if abs(denom) < get_settings().DENOMINATOR_FLOOR:
            raise DomainExit("1 - (k+c) b^2", denom, 0.0)
        d = (3 * c - k - (2 * c - k) * k * b2) / denom
        return _BetaEquation(dec.r, d * bs, [T], full=False, d_formula=d, d_column=bs)

    if cid in (ClassId.DOUGLAS_III, ClassId.DOUGLAS_IV, ClassId.DOUGLAS_SING):
        if b2 < get_settings().DENOMINATOR_FLOOR:
            raise RankDeficient(f"{cid.value} with b^2 = {b2:.3e}", 0, 1)
        fixed = -bs / b2
        unknowns = [2.0 * (b2 * a - bb)] if cid is ClassId.DOUGLAS_SING else []
        return _BetaEquation(dec.r, fixed, unknowns, full=False)

    if cid is ClassId.DOUGLAS_COR:
        e = params.sign.factor
        T = 2.0 * ((1 + e * 2 * b2) * a - e * 3 * bb)
        denom = e - b2
        if abs(denom) < get_settings().DENOMINATOR_FLOOR:
            raise DomainExit("+/-1 - b^2", denom, 0.0)
        return _BetaEquation(dec.r, 3.0 / denom * bs, [T], full=False)

    raise ConfigError("class", f"no b_(i|j) equation for {class_id.value}")


def _entries(M: np.ndarray, full: bool) -> np.ndarray:
    if full:
        return M.reshape(-1)
    return np.array([M[0, 0], M[0, 1], M[1, 1]])


def _fit(columns: List[np.ndarray], rhs: np.ndarray, what: str) -> np.ndarray:
    if not columns:
        return np.zeros(0)
    A = np.column_stack(columns)
    coef, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficient(what, int(rank), A.shape[1])
    return coef


def class_beta_at(class_id: ClassId, pair: MetricPair, params: ClassParams, p: Point) -> Tuple[float, Dict[str, object]]:
    """Post-fit Frobenius residual of the class equation at p with the recovered scalars"""
    dec = decompose(pair, p)
    eq = _beta_equation(class_id, dec, params)
    rhs = _entries(eq.data - eq.fixed, eq.full)
    coef = _fit([_entries(T, eq.full) for T in eq.unknowns], rhs, f"{class_id.value} at {p}")
    model = eq.fixed + sum((t * T for t, T in zip(coef, eq.unknowns)), np.zeros((2, 2)))
    misfit = eq.data - model
    if not eq.full:
        # r-equations leave the antisymmetric part free
        misfit = 0.5 * (misfit + misfit.T)
    recovered: Dict[str, object] = {}
    if eq.unknowns:
        recovered["tau"] = float(coef[0])
    if eq.d_formula is not None:
        recovered["d"] = _recover_d(eq, rhs)
    return float(np.linalg.norm(misfit)), recovered


def _recover_d(eq: _BetaEquation, rhs: np.ndarray) -> Optional[float]:
    """Fit tau and d jointly; None where s_i vanishes"""
    column = _entries(eq.d_column, eq.full)
    if float(np.linalg.norm(column)) < 1e-12:
        return None
    target = rhs + _entries(eq.fixed, eq.full)
    try:
        coef = _fit([_entries(eq.unknowns[0], eq.full), column], target, "tau, d")
    except RankDeficient:
        return None
    return float(coef[1])


def class_beta_residual(
    class_id: ClassId,
    pair: MetricPair,
    params: ClassParams,
    points: Sequence[Point],
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """
    Pointwise least-squares fit of the class equation on r_ij (or the full b_ij)

    tau is reported as the scalar in front of the 2(...) bracket. For
    DOUGLAS_II the fitted d is compared with its closed form.
    """
    report = VerificationReport(
        check=f"class_beta:{class_id.value}",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_CLASS,
    )
    _run_grid(report, points, lambda p: class_beta_at(class_id, pair, params, p))

    if class_id.beta_class is ClassId.DOUGLAS_II:
        deviations = []
        for p, d in zip(report.points, report.recovered.d):
            if d is None:
                continue
            dec = decompose(pair, Point(*p))
            c, k = params.c, params.k
            d_closed = (3 * c - k - (2 * c - k) * k * dec.b2) / (1 - (k + c) * dec.b2)
            deviations.append(abs(d - d_closed))
        report.details["d_max_deviation"] = max(deviations) if deviations else None
    return report


# Class equations on the Riemannian spray


def _spray_columns(
    class_id: ClassId, dec: BetaDecomposition, params: ClassParams, y: Direction
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Columns multiplying (c1, c2[, tau]) and the fixed part of the class right-hand side

    G^i_alpha = (c1 y^1 + c2 y^2) y^i + tau U^i + V^i
    """
    v = y.as_array()
    alpha2 = float(v @ dec.a @ v)
    beta = float(dec.b @ v)
    beta2 = beta * beta
    b2 = dec.b2
    columns = [v[0] * v, v[1] * v]
    zero = np.zeros(2)

    if class_id is ClassId.PF_I:
        k1, k2, _ = params.require(class_id, "k1", "k2", "k3")
        columns.append(-(k1 * alpha2 + k2 * beta2) * dec.b_up)
        return columns, zero

    if class_id is ClassId.PF_II:
        c, k = params.require(class_id, "c", "k")
        columns.append(-((2 * c - k) * alpha2 + (c + k) * k * beta2) * dec.b_up)
        denom = 1 - (c + k) * b2
        if abs(denom) < get_settings().DENOMINATOR_FLOOR:
            raise DomainExit("1 - (c+k) b^2", denom, 0.0)
        fixed = ((2 * c - k) * (1 - k * b2) * alpha2 + c * k * beta2) / denom * dec.s_up
        return columns, fixed

    if class_id in (ClassId.PF_III, ClassId.PF_IV):
        b_param, k, m = params.require(class_id, "b", "k", "m")
        if b2 < get_settings().DENOMINATOR_FLOOR:
            raise RankDeficient(f"{class_id.value} with b^2 = {b2:.3e}", 0, 1)
        if class_id is ClassId.PF_III:
            fixed = -((2 * m - 1) * alpha2 + k * beta2) / (2 * m * b2) * dec.s_up
        else:
            fixed = -(2 * (m - 1) * alpha2 + k * beta2) / ((2 * m - 1) * b2) * dec.s_up
        return columns, fixed

    if class_id is ClassId.PF_COR:
        e = params.sign.factor
        columns.append(-e * 2.0 * alpha2 * dec.b_up)
        denom = b2 - e
        if abs(denom) < get_settings().DENOMINATOR_FLOOR:
            raise DomainExit("b^2 -/+ 1", denom, 0.0)
        return columns, -2.0 * alpha2 / denom * dec.s_up

    raise ConfigError("class", f"{class_id.value} is not a projectively flat class")


@dataclass(frozen=True)
class SprayFit:
    residual: float
    rho: Tuple[float, float]
    tau: Optional[float]


def class_spray_fit(
    class_id: ClassId,
    pair: MetricPair,
    params: ClassParams,
    p: Point,
    n_directions: Optional[int] = None,
) -> SprayFit:
    """Least-squares recovery of rho = c1 y^1 + c2 y^2 (and tau) from G_alpha over unit directions"""
    gamma, _ = christoffel(pair, p)
    dec = decompose(pair, p)
    rows, rhs = [], []
    n_unknowns = 0
    for y in unit_directions(n_directions):
        columns, fixed = _spray_columns(class_id, dec, params, y)
        n_unknowns = len(columns)
        target = riemann_spray(gamma, y) - fixed
        for i in range(2):
            rows.append([col[i] for col in columns])
            rhs.append(target[i])
    A, d = np.array(rows), np.array(rhs)
    coef, _, rank, _ = np.linalg.lstsq(A, d, rcond=None)
    if rank < n_unknowns:
        raise RankDeficient(f"{class_id.value} spray fit at {p}", int(rank), n_unknowns)
    residual = float(np.max(np.abs(d - A @ coef)))
    tau = float(coef[2]) if n_unknowns == 3 else None
    return SprayFit(residual=residual, rho=(float(coef[0]), float(coef[1])), tau=tau)


def class_spray_residual(
    class_id: ClassId,
    pair: MetricPair,
    params: ClassParams,
    points: Sequence[Point],
    n_directions: Optional[int] = None,
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    if not class_id.is_projectively_flat:
        raise ConfigError("class", f"{class_id.value} has no spray identity")

    def evaluate(p: Point):
        fit = class_spray_fit(class_id, pair, params, p, n_directions)
        recovered: Dict[str, object] = {"rho": fit.rho}
        if fit.tau is not None:
            recovered["tau"] = fit.tau
        return fit.residual, recovered

    report = VerificationReport(
        check=f"class_spray:{class_id.value}",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_CLASS,
        details={"n_directions": len(unit_directions(n_directions))},
    )
    return _run_grid(report, points, evaluate)


# Projective factor formulas


@dataclass(frozen=True)
class FactorComparison:
    P_formula: float
    P_direct: float

    @property
    def difference(self) -> float:
        return abs(self.P_formula - self.P_direct)

    @property
    def relative(self) -> float:
        scale = abs(self.P_direct)
        return self.difference / scale if scale > 0 else self.difference


def projective_factor_formula(
    class_id: ClassId,
    params: ClassParams,
    family: PhiFamily,
    dec: BetaDecomposition,
    y: Direction,
    rho: Tuple[float, float],
    tau: Optional[float],
) -> float:
    """Closed-form P of a projectively flat class with the recovered rho and tau"""
    v = y.as_array()
    alpha = math.sqrt(float(v @ dec.a @ v))
    s = float(dec.b @ v) / alpha
    s0 = contractions(dec, y).s0
    b2 = dec.b2
    P = rho[0] * v[0] + rho[1] * v[1]
    tau = tau or 0.0

    if class_id is ClassId.PF_I:
        k1, k2, k3 = params.require(class_id, "k1", "k2", "k3")
        pj = phi_service.phi_jet(family, s)
        bracket = (1 + (k1 + k3) * s * s + k2 * s ** 4) * pj.dphi / pj.phi - (k1 + k2 * s * s) * s
        return P + tau * alpha * bracket

    if class_id is ClassId.PF_II:
        c, k = params.require(class_id, "c", "k")
        sigma1 = ((k - 2 * c) * (c - k) * k * b2 + 4 * c * c - 3 * k * c + k * k) * s * s + (2 * c - k) * (1 - k * b2)
        sigma2 = (1 - (c + k) * b2) * (1 + (c - k) * s * s)
        return P - 4 * c * c * s ** 3 * tau * alpha / (1 + (c - k) * s * s) + sigma1 / sigma2 * s0

    if class_id is ClassId.PF_III:
        _, k, m = params.require(class_id, "b", "k", "m")
        pj = phi_service.phi_jet(family, s)
        numer = s * (1 - k * s * s) * pj.dphi + ((2 * m - 1) + k * s * s) * pj.phi
        return P - numer / (2 * m * b2 * pj.phi) * s0

    if class_id is ClassId.PF_IV:
        _, k, m = params.require(class_id, "b", "k", "m")
        pj = phi_service.phi_jet(family, s)
        numer = s * (1 - k * b2) * pj.dphi + (2 * (m - 1) + k * s * s) * pj.phi
        return P - numer / ((2 * m - 1) * b2 * pj.phi) * s0

    if class_id is ClassId.PF_COR:
        e = params.sign.factor
        return (
            P
            - 4 * s ** 3 * tau * alpha / (1 + e * s * s)
            - 2 * (2 * s * s + e) / ((b2 - e) * (s * s + e)) * s0
        )

    raise ConfigError("class", f"{class_id.value} has no projective factor formula")


def projective_factor_check(
    class_id: ClassId,
    pair: MetricPair,
    family: PhiFamily,
    p: Point,
    y: Direction,
    params: Optional[ClassParams] = None,
    tol: Optional[float] = None,
) -> FactorComparison:
    """
    Compare the class's closed-form P with F_{x^m} y^m / (2F)

    Raises:
        PrerequisiteFailed: the class spray identity does not hold at p
    """
    params = params or ClassParams.from_family(family)
    tol = tol if tol is not None else get_settings().TOL_CLASS
    fit = class_spray_fit(class_id, pair, params, p)
    if fit.residual > tol:
        raise PrerequisiteFailed(f"class_spray:{class_id.value}", fit.residual, tol)
    dec = decompose(pair, p)
    formula = projective_factor_formula(class_id, params, family, dec, y, fit.rho, fit.tau)
    direct = projective_factor(finsler_function(pair, family), p, y)
    return FactorComparison(P_formula=formula, P_direct=direct)


def projective_factor_report(
    class_id: ClassId,
    pair: MetricPair,
    family: PhiFamily,
    params: ClassParams,
    points: Sequence[Point],
    n_directions: Optional[int] = None,
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """Max relative |P_formula - P_direct| over grid x directions"""
    settings = get_settings()
    directions = unit_directions(n_directions)

    def evaluate(p: Point):
        worst = 0.0
        for y in directions:
            worst = max(worst, projective_factor_check(class_id, pair, family, p, y, params).relative)
        return worst, {}

    report = VerificationReport(
        check=f"projective_factor:{class_id.value}",
        grid=grid_description,
        tolerance=tol if tol is not None else settings.TOL_CLASS,
    )
    _run_grid(report, points, evaluate)
    prerequisite = report.stats.reasons.get(PrerequisiteFailed.__name__, 0) if report.stats else 0
    if prerequisite:
        report.finding = f"spray identity failed at {prerequisite} point(s)"
    return report


# Conformality


def conformality_at(pair: MetricPair, mode: ConformalityMode, p: Point) -> Tuple[float, Dict[str, object], float]:
    dec = decompose(pair, p)
    a = dec.a
    target = dec.r if mode is ConformalityMode.THM2 else dec.bij
    lam = float(np.sum(target * a) / np.sum(a * a))
    residual = float(np.linalg.norm(target - lam * a))
    antisym = float(np.max(np.abs(dec.s)))
    return residual, {"lam": lam}, antisym


def conformality_residual(
    pair: MetricPair,
    mode: ConformalityMode,
    points: Sequence[Point],
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """
    Fit r_ij = lambda a_ij (THM2) or b_{i|j} = lambda a_ij (THM001) pointwise

    In THM001 mode the residual includes the antisymmetric part, so a pass
    also certifies that the 1-form is closed.
    """
    antisym: List[float] = []

    def evaluate(p: Point):
        residual, recovered, s_max = conformality_at(pair, mode, p)
        antisym.append(s_max)
        return residual, recovered

    report = VerificationReport(
        check=f"conformality:{mode.value}",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_CONFORMAL,
    )
    _run_grid(report, points, evaluate)
    report.details["max_antisymmetric"] = max(antisym) if antisym else None
    return report


# Reported scans


def _reported(report: VerificationReport, holds: str, fails: str) -> VerificationReport:
    """Turn a thresholded report into a finding that does not count toward the overall verdict"""
    if report.verdict is Verdict.PASS:
        report.finding = holds
    elif report.verdict is Verdict.FAIL:
        report.finding = fails
    else:
        report.finding = "undetermined"
    report.verdict = Verdict.REPORTED
    return report


def closedness_report(
    pair: MetricPair,
    points: Sequence[Point],
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """|s_12| per grid point; finding "closed" or "not closed" """
    report = VerificationReport(
        check="closedness",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_CLOSED,
    )
    _run_grid(report, points, lambda p: (abs(decompose(pair, p).s12), {}))
    return _reported(report, "closed", "not closed")


def b_constancy_report(
    pair: MetricPair,
    points: Sequence[Point],
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """|grad b^2| per grid point; finding "constant" or "not constant" """
    field_b2 = beta_norm2_field(pair)
    report = VerificationReport(
        check="b_constancy",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_B_CONSTANT,
    )
    _run_grid(report, points, lambda p: (float(np.linalg.norm(x_jet(field_b2, p).grad)), {}))
    return _reported(report, "constant", "not constant")


# Sampled checks


def _run_samples(
    report: VerificationReport,
    samples: Sequence[Tuple[Point, Direction]],
    evaluate: Callable[[Point, Direction], float],
) -> VerificationReport:
    stats = ExclusionStats(report.check)
    report.stats = stats
    for p, y in samples:
        report.points.append((p.x1, p.x2))
        try:
            residual: Optional[float] = evaluate(p, y)
        except ABFinslerError as e:
            stats.record_excluded(f"{p} y=({y.y1:.4f}, {y.y2:.4f})", e)
            residual = None
        else:
            stats.record_included()
        report.residuals.append(residual)
    return report.decide()


def _within_s_limit(pair: MetricPair, s_limit: Optional[float]):
    def keep(sample: Tuple[Point, Direction]) -> bool:
        if s_limit is None:
            return True
        try:
            _check_s_limit(pair, *sample, s_limit)
        except (DomainExit, ValueError, ZeroDivisionError):
            return False
        return True

    return keep


def spray_agreement_report(
    pair: MetricPair,
    family: PhiFamily,
    samples: Sequence[Tuple[Point, Direction]],
    s_limit: Optional[float] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> VerificationReport:
    """|G_generic - G_ab| / max(1, |G_generic|) at seeded random samples"""
    F = finsler_function(pair, family)
    usable = [sample for sample in samples if _within_s_limit(pair, s_limit)(sample)]

    def evaluate(p: Point, y: Direction) -> float:
        G_generic = spray_generic(F, p, y)
        G_ab = spray_ab(pair, family, p, y).G
        return float(np.linalg.norm(G_generic - G_ab)) / max(1.0, float(np.linalg.norm(G_generic)))

    report = VerificationReport(
        check="spray",
        grid=f"{len(usable)} seeded samples",
        tolerance=tol if tol is not None else get_settings().TOL_SPRAY,
        details={"skipped_s_limit": len(samples) - len(usable), "s_limit": s_limit},
        seed=seed,
    )
    return _run_samples(report, usable, evaluate)


def pf_condition_report(
    pair: MetricPair,
    family: PhiFamily,
    points: Sequence[Point],
    n_directions: Optional[int] = None,
    s_limit: Optional[float] = None,
    tol: Optional[float] = None,
    grid_description: str = "",
) -> VerificationReport:
    """Class-agnostic projective flatness: |pf condition| / max(1, alpha^2 |a G|) over grid x directions"""
    directions = unit_directions(n_directions)
    keep = _within_s_limit(pair, s_limit)

    def evaluate(p: Point):
        worst, used = 0.0, 0
        for y in directions:
            if not keep((p, y)):
                continue
            residual = pf_condition_residual(pair, family, p, y)
            data = spray_ab(pair, family, p, y)
            dec = decompose(pair, p)
            scale = max(1.0, data.alpha ** 2 * float(np.linalg.norm(dec.a @ data.G)))
            worst = max(worst, float(np.linalg.norm(residual)) / scale)
            used += 1
        if used == 0:
            raise DomainExit(f"all directions at {p} beyond s limit")
        return worst, {}

    report = VerificationReport(
        check="pf_condition",
        grid=grid_description,
        tolerance=tol if tol is not None else get_settings().TOL_HAMEL,
        details={"n_directions": len(directions), "s_limit": s_limit},
    )
    return _run_grid(report, points, evaluate)


def regularity_report(
    pair: MetricPair,
    family: PhiFamily,
    points: Sequence[Point],
    grid_description: str = "",
) -> VerificationReport:
    """
    Regularity margin of the family at the largest b over the grid

    Passes iff the margin is nonnegative. Families defined only for
    |s| < b are evaluated at S_LIMIT times their bound.
    """
    norms = []
    for p in points:
        try:
            norms.append((math.sqrt(beta_norm2(pair, p)), p))
        except ABFinslerError:
            continue
    report = VerificationReport(check="regularity", grid=grid_description, tolerance=0.0)
    if not norms:
        return report.decide()
    rho, where = max(norms, key=lambda item: item[0])
    bound = family.bound()
    if bound is not None and rho >= bound:
        rho = get_settings().S_LIMIT * bound
        report.details["clipped_to"] = rho
    report.details["rho"] = rho
    report.points.append((where.x1, where.x2))
    stats = ExclusionStats(report.check)
    report.stats = stats
    try:
        margin = phi_service.regularity_margin(family, rho)
    except ABFinslerError as e:
        stats.record_excluded(str(where), e)
        report.residuals.append(None)
        return report.decide()
    stats.record_included()
    report.details["margin"] = margin
    report.residuals.append(max(0.0, -margin))
    try:
        report.details["radius"] = phi_service.regularity_radius(family, max(1.0, 2.0 * rho))
    except ABFinslerError as e:
        logger.debug(f"regularity radius unavailable: {e}")
    return report.decide()


# Geodesics


def geodesic_check(
    F: FinslerFunction,
    starts: Sequence[Tuple[Point, Direction]],
    domain: Optional[Box] = None,
    arclen: Optional[float] = None,
    steps: Optional[int] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> Tuple[VerificationReport, List[Optional[GeodesicTrace]]]:
    """
    Chord deviation of one trace per start; truncated traces are excluded

    Returns the report and the traces aligned with `starts` (None where the
    start itself failed).
    """
    settings = get_settings()
    report = VerificationReport(
        check="geodesic",
        grid=f"{len(starts)} traces",
        tolerance=tol if tol is not None else settings.TOL_GEODESIC,
        details={
            "arclength": arclen if arclen is not None else settings.GEODESIC_ARCLENGTH,
            "steps": steps or settings.GEODESIC_STEPS,
        },
        seed=seed,
    )
    traces: List[Optional[GeodesicTrace]] = []
    stats = ExclusionStats(report.check)
    report.stats = stats
    errors: List[Optional[float]] = []
    for p, y in starts:
        report.points.append((p.x1, p.x2))
        try:
            trace = geodesic_trace(F, p, y, arclen=arclen, steps=steps, domain=domain, richardson=True)
        except ABFinslerError as e:
            stats.record_excluded(str(p), e)
            traces.append(None)
            report.residuals.append(None)
            continue
        traces.append(trace)
        if trace.truncated:
            stats.record_excluded(str(p), DomainExit(trace.reason))
            report.residuals.append(None)
        else:
            stats.record_included()
            report.residuals.append(trace.deviation)
            errors.append(trace.endpoint_error)
    report.details["max_endpoint_error"] = max((e for e in errors if e is not None), default=None)
    return report.decide(), traces
