"""
Trace Command
Integrates geodesics from the configured starts and writes CSV traces with a straightness summary
"""
import csv
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from app.commands import ExitCode
from app.core.config import get_settings
from app.core.exceptions import ConfigError
from app.schemas import TraceSummary, TraceSummaryFile
from app.services import runner
from app.services.spray import GeodesicTrace

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "x1", "x2", "y1", "y2")


def write_trace_csv(path: Path, trace: GeodesicTrace) -> None:
    """One row per step: t, x1, x2, y1, y2"""
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for t, x, v in zip(trace.t, trace.points, trace.velocities):
            writer.writerow([repr(float(t)), repr(float(x[0])), repr(float(x[1])), repr(float(v[0])), repr(float(v[1]))])


def cmd_trace(config_path: Path, overrides: Optional[Dict[str, Any]] = None) -> int:
    """
    Trace every start, write trace_<n>.csv files and summary.json

    Returns:
        Exit status of the geodesic verdict, 3 on config errors
    """
    started = time.perf_counter()
    try:
        config = runner.apply_overrides(runner.load_config(config_path), overrides or {})
        ctx = runner.build_context(config)
        starts = runner.trace_starts(ctx)
        reports = runner.run_checks(ctx, ["geodesic"])
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        return ExitCode.CONFIG_ERROR

    report = reports[0]
    out_dir = Path(config.output or "traces")
    out_dir.mkdir(parents=True, exist_ok=True)
    traced = {(p.x1, p.x2, y.y1, y.y2): trace for p, y, trace in ctx.traces}

    summaries = []
    for n, (p, y) in enumerate(starts):
        summary = TraceSummary(index=n, start=[p.x1, p.x2], direction=[y.y1, y.y2])
        trace = traced.get((p.x1, p.x2, y.y1, y.y2))
        if trace is None:
            summary.truncated = True
            summary.reason = "trace could not start"
        else:
            path = out_dir / f"trace_{n}.csv"
            write_trace_csv(path, trace)
            summary.file = path.name
            summary.points = len(trace.t)
            summary.truncated = trace.truncated
            summary.reason = trace.reason
            summary.deviation = None if trace.truncated else trace.deviation
            summary.endpoint_error = trace.endpoint_error
        summaries.append(summary)

    deviations = [s.deviation for s in summaries if s.deviation is not None]
    summary_file = TraceSummaryFile(
        schema_version=get_settings().SCHEMA_VERSION,
        config=config.echo(),
        traces=summaries,
        max_deviation=float(np.max(deviations)) if deviations else None,
        verdict=report.verdict.value,
        wall_clock=time.perf_counter() - started,
    )
    (out_dir / "summary.json").write_text(
        json.dumps(summary_file.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
    )
    logger.info(f"Wrote {len(ctx.traces)} traces to {out_dir} (verdict {report.verdict.value})")
    return ExitCode.for_verdict(report.verdict)
