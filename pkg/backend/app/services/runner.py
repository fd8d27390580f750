"""
Check Runner
Loads run configs, builds the metric and runs named checks with per-check error isolation
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from app.core.config import get_settings
from app.core.exceptions import ABFinslerError, ConfigError
from app.core.registry import Registry
from app.models import ClassId, ConformalityMode, Direction, Point, Sign, Verdict
from app.schemas import RunConfig
from app.services import sampling
from app.services import verify
from app.services.constructs import BuiltMetric, build_from_spec, family_for
from app.services.fields import MetricPair, finsler_function, riemannian_function
from app.services.phi import HalfPower, IntegerPower, PhiFamily, SingularB
from app.services.spray import GeodesicTrace
from app.services.verify import ClassParams, VerificationReport

logger = logging.getLogger(__name__)


# Config loading


def load_config(path: Path) -> RunConfig:
    """
    Read and validate a JSON run config

    Raises:
        ConfigError: unreadable file, invalid JSON or schema violation
    """
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON in {path}: {e}") from e
    return validate_config(raw)


def validate_config(raw: Dict[str, Any]) -> RunConfig:
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(where, first["msg"]) from e
    if config.schema_version != get_settings().SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {config.schema_version}")
    return config


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """
    Command-line values over config values, re-validated

    Keys `tol_douglas`, `tol_hamel` and `tol_class` land in `tolerances`.
    """
    data = config.model_dump(by_alias=True, exclude_none=True)
    tolerances = dict(data.get("tolerances", {}))
    for key, target in (("tol_douglas", "douglas"), ("tol_hamel", "hamel"), ("tol_class", "class")):
        value = overrides.get(key)
        if value is not None:
            tolerances[target] = value
    data["tolerances"] = tolerances
    for key in ("grid", "angles", "seed", "margin", "output"):
        value = overrides.get(key)
        if value is not None:
            data[key] = value
    return validate_config(data)


# Run context


@dataclass
class RunContext:
    config: RunConfig
    built: BuiltMetric
    family: Optional[PhiFamily]
    points: List[Point]
    grid_description: str
    seed: int
    margin: float
    traces: List[Tuple[Point, Direction, GeodesicTrace]] = field(default_factory=list)

    @property
    def pair(self) -> MetricPair:
        return self.built.pair

    def tolerance(self, name: str) -> float:
        configured = getattr(self.config.tolerances, name)
        if configured is not None:
            return configured
        settings_name = "TOL_CLASS" if name == "class_" else f"TOL_{name.upper()}"
        return getattr(get_settings(), settings_name)

    def require_family(self, check: str) -> PhiFamily:
        if self.family is None:
            raise ConfigError("family", f"required by check '{check}'")
        return self.family

    @property
    def s_limit(self) -> Optional[float]:
        """Configured limit, or the default for families singular at |s| = b"""
        if self.config.s_limit is not None:
            return self.config.s_limit
        if isinstance(self.family, (IntegerPower, HalfPower, SingularB)):
            return get_settings().S_LIMIT
        return None

    def class_params(self) -> ClassParams:
        overrides = dict(self.config.class_params)
        if "sign" in overrides:
            overrides["sign"] = _sign_value(overrides["sign"])
        try:
            if self.family is not None:
                return ClassParams.from_family(self.family, **overrides)
            return ClassParams(**overrides)
        except TypeError as e:
            raise ConfigError("class_params", str(e)) from e


def _sign_value(value: Any) -> Sign:
    try:
        return Sign(value)
    except ValueError as e:
        raise ConfigError("class_params.sign", "must be '+' or '-'") from e


def build_context(config: RunConfig) -> RunContext:
    """
    Build the metric, resolve the family and lay out the grid

    Raises:
        ConfigError: unknown builder or family, or inadmissible parameters
    """
    settings = get_settings()
    built = build_from_spec(config.metric.builder, config.metric.params)
    if config.box is not None:
        built = BuiltMetric(built.pair.with_domain(config.box), built.family, built.class_hint)
    family_spec = (config.family.name, config.family.params) if config.family else None
    family = family_for(built, family_spec)

    n = config.grid or settings.GRID_SIZE
    margin = settings.MARGIN if config.margin is None else config.margin
    points = sampling.grid(built.pair, n=n, margin=margin)
    return RunContext(
        config=config,
        built=built,
        family=family,
        points=points,
        grid_description=sampling.describe_grid(built.pair, points, n, margin),
        seed=settings.SEED if config.seed is None else config.seed,
        margin=margin,
    )


# Checks

CheckFn = Callable[[RunContext], List[VerificationReport]]

check_registry: Registry = Registry("check")


@check_registry.decorator("douglas")
def _douglas(ctx: RunContext) -> List[VerificationReport]:
    family = ctx.require_family("douglas")
    return [
        verify.douglas_check(
            ctx.pair,
            family,
            ctx.points,
            n_angles=ctx.config.angles,
            tol=ctx.tolerance("douglas"),
            s_limit=ctx.s_limit,
            grid_description=ctx.grid_description,
        )
    ]


@check_registry.decorator("hamel")
def _hamel(ctx: RunContext) -> List[VerificationReport]:
    family = ctx.require_family("hamel")
    return [
        verify.hamel_check(
            ctx.pair,
            family,
            ctx.points,
            n_directions=ctx.config.directions,
            s_limit=ctx.s_limit,
            tol=ctx.tolerance("hamel"),
            grid_description=ctx.grid_description,
        )
    ]


@check_registry.decorator("closedness")
def _closedness(ctx: RunContext) -> List[VerificationReport]:
    return [verify.closedness_report(ctx.pair, ctx.points, ctx.tolerance("closed"), ctx.grid_description)]


@check_registry.decorator("b_constancy")
def _b_constancy(ctx: RunContext) -> List[VerificationReport]:
    return [verify.b_constancy_report(ctx.pair, ctx.points, ctx.tolerance("b_constant"), ctx.grid_description)]


@check_registry.decorator("spray")
def _spray(ctx: RunContext) -> List[VerificationReport]:
    family = ctx.require_family("spray")
    samples = sampling.random_samples(ctx.pair, ctx.config.samples, ctx.seed, ctx.margin)
    return [verify.spray_agreement_report(ctx.pair, family, samples, ctx.s_limit, ctx.tolerance("spray"), ctx.seed)]


@check_registry.decorator("pf_condition")
def _pf_condition(ctx: RunContext) -> List[VerificationReport]:
    family = ctx.require_family("pf_condition")
    return [
        verify.pf_condition_report(
            ctx.pair,
            family,
            ctx.points,
            n_directions=ctx.config.directions,
            s_limit=ctx.s_limit,
            tol=ctx.tolerance("hamel"),
            grid_description=ctx.grid_description,
        )
    ]


@check_registry.decorator("regularity")
def _regularity(ctx: RunContext) -> List[VerificationReport]:
    family = ctx.require_family("regularity")
    return [verify.regularity_report(ctx.pair, family, ctx.points, ctx.grid_description)]


def trace_starts(ctx: RunContext) -> List[Tuple[Point, Direction]]:
    """
    Configured starts, else N_TRACES seeded random ones

    Raises:
        ConfigError: a configured start lies outside the domain
    """
    if ctx.config.traces:
        starts = []
        for i, start in enumerate(ctx.config.traces):
            if not ctx.pair.domain.contains(start.point):
                raise ConfigError(f"traces.{i}", f"start {start.point} outside domain {ctx.pair.domain}")
            starts.append((start.point, start.direction))
        return starts
    count = ctx.config.n_traces or get_settings().N_TRACES
    return sampling.random_samples(ctx.pair, count, ctx.seed, ctx.margin)


@check_registry.decorator("geodesic")
def _geodesic(ctx: RunContext) -> List[VerificationReport]:
    F = finsler_function(ctx.pair, ctx.family) if ctx.family is not None else riemannian_function(ctx.pair)
    starts = trace_starts(ctx)
    report, traces = verify.geodesic_check(
        F,
        starts,
        domain=ctx.pair.domain,
        arclen=ctx.config.arclength,
        steps=ctx.config.steps,
        tol=ctx.tolerance("geodesic"),
        seed=ctx.seed,
    )
    ctx.traces = [(p, y, trace) for (p, y), trace in zip(starts, traces) if trace is not None]
    return [report]


def _class_check(class_id: ClassId) -> CheckFn:
    def run(ctx: RunContext) -> List[VerificationReport]:
        params = ctx.class_params()
        tol = ctx.tolerance("class_")
        reports = [
            verify.class_beta_residual(class_id, ctx.pair, params, ctx.points, tol, ctx.grid_description)
        ]
        if class_id.is_projectively_flat:
            family = ctx.require_family(f"class:{class_id.value}")
            reports.append(
                verify.class_spray_residual(
                    class_id, ctx.pair, params, ctx.points, ctx.config.directions, tol, ctx.grid_description
                )
            )
            reports.append(
                verify.projective_factor_report(
                    class_id, ctx.pair, family, params, ctx.points, ctx.config.directions, tol, ctx.grid_description
                )
            )
        return reports

    return run


def _conformality_check(mode: ConformalityMode) -> CheckFn:
    def run(ctx: RunContext) -> List[VerificationReport]:
        return [verify.conformality_residual(ctx.pair, mode, ctx.points, ctx.tolerance("conformal"), ctx.grid_description)]

    return run


def resolve_check(name: str, index: int = 0) -> CheckFn:
    """
    Map a check name to its runner

    Raises:
        ConfigError: unknown check, class or conformality mode
    """
    where = f"checks.{index}"
    prefix, _, suffix = name.partition(":")
    if prefix == "class" and suffix:
        try:
            return _class_check(ClassId(suffix))
        except ValueError as e:
            known = ", ".join(c.value for c in ClassId)
            raise ConfigError(where, f"unknown class '{suffix}' (known: {known})") from e
    if prefix == "conformality" and suffix:
        try:
            return _conformality_check(ConformalityMode(suffix))
        except ValueError as e:
            raise ConfigError(where, f"unknown conformality mode '{suffix}'") from e
    return check_registry.require(name, where)


def _failed_report(name: str, error: Exception) -> VerificationReport:
    report = VerificationReport(check=name, grid="", tolerance=0.0)
    report.verdict = Verdict.INCONCLUSIVE
    report.finding = f"{type(error).__name__}: {error}"
    return report


def run_checks(ctx: RunContext, names: Sequence[str]) -> List[VerificationReport]:
    """
    Run every named check; a check that raises yields an inconclusive report

    Raises:
        ConfigError: unknown check name or a check missing its configuration
    """
    resolved = [(name, resolve_check(name, i)) for i, name in enumerate(names)]
    reports: List[VerificationReport] = []
    for name, check in resolved:
        logger.info(f"Running {name} on {ctx.pair.name}")
        try:
            reports.extend(check(ctx))
        except ConfigError:
            raise
        except (ABFinslerError, ArithmeticError, ValueError) as e:
            error_type = type(e).__name__
            logger.error(f"{name}: check failed - {error_type}: {e}")
            reports.append(_failed_report(name, e))
    return reports


def overall_verdict(reports: Sequence[VerificationReport]) -> Verdict:
    """fail if any check fails; inconclusive if no counted check passed; else pass"""
    counted = [r.verdict for r in reports if r.verdict is not Verdict.REPORTED]
    if Verdict.FAIL in counted:
        return Verdict.FAIL
    if counted and Verdict.PASS not in counted:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS
