"""
ABFinsler Command Line
Entry point: python -m app.main verify|trace CONFIG [flags]
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.commands.trace import cmd_trace
from app.commands.verify import cmd_verify
from app.core.config import get_settings
from app.core.logging_config import configure_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="abfinsler",
        description="Numeric verification of Douglas and projectively flat (alpha, beta)-metrics",
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("verify", "run the configured checks and write a JSON report"),
        ("trace", "integrate geodesics and write CSV traces with a summary"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", type=Path, help="JSON run config")
        cmd.add_argument("--tol-douglas", type=float, help="Douglas fit threshold")
        cmd.add_argument("--tol-hamel", type=float, help="Hamel threshold")
        cmd.add_argument("--tol-class", type=float, help="class equation threshold")
        cmd.add_argument("--grid", type=int, help="grid points per axis")
        cmd.add_argument("--angles", type=int, help="angles for the Douglas fit")
        cmd.add_argument("--seed", type=int, help="random seed")
        cmd.add_argument("--margin", type=float, help="domain margin as a fraction of its size")
        cmd.add_argument("--out", dest="output", help="report file (verify) or output directory (trace)")
        cmd.add_argument("--log-level", default=None, help="log level (default from settings)")
        cmd.add_argument("--log-format", choices=("text", "json"), default=None, help="log output format")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_format)
    overrides = {
        key: getattr(args, key)
        for key in ("tol_douglas", "tol_hamel", "tol_class", "grid", "angles", "seed", "margin", "output")
    }
    if args.command == "verify":
        return int(cmd_verify(args.config, overrides))
    return int(cmd_trace(args.config, overrides))


if __name__ == "__main__":
    sys.exit(main())
