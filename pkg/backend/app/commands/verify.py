"""
Verify Command
Runs the configured checks and writes the JSON report
"""
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.commands import ExitCode
from app.core.config import get_settings
from app.core.exceptions import ConfigError
from app.schemas import CheckReport, ReportFile, RunConfig
from app.services import runner
from app.services.verify import VerificationReport

logger = logging.getLogger(__name__)


def build_report(config: RunConfig, reports: List[VerificationReport], wall_clock: float) -> ReportFile:
    settings = get_settings()
    return ReportFile(
        schema_version=settings.SCHEMA_VERSION,
        tool=settings.APP_NAME,
        version=settings.VERSION,
        config=config.echo(),
        checks=[CheckReport.model_validate(r.to_dict()) for r in reports],
        verdict=runner.overall_verdict(reports).value,
        wall_clock=wall_clock,
    )


def render(report: ReportFile) -> str:
    """Stable JSON: sorted keys, fixed indentation"""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def cmd_verify(config_path: Path, overrides: Optional[Dict[str, Any]] = None) -> int:
    """
    Load a config, run its checks and write the report

    Returns:
        Exit status: 0 pass, 1 fail, 2 inconclusive, 3 config error
    """
    started = time.perf_counter()
    try:
        config = runner.apply_overrides(runner.load_config(config_path), overrides or {})
        ctx = runner.build_context(config)
        reports = runner.run_checks(ctx, config.checks)
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        return ExitCode.CONFIG_ERROR

    report = build_report(config, reports, time.perf_counter() - started)
    text = render(report)
    if config.output:
        out = Path(config.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(text)

    for check in report.checks:
        logger.info(f"{check.check}: {check.verdict}{f' ({check.finding})' if check.finding else ''}")
    logger.info(f"Overall verdict: {report.verdict}")
    return ExitCode.for_verdict(runner.overall_verdict(reports))
