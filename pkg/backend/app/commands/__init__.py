"""
Commands
Entry points behind the verify and trace subcommands
"""
import enum

from app.models import Verdict


class ExitCode(int, enum.Enum):
    PASS = 0
    FAIL = 1
    INCONCLUSIVE = 2
    CONFIG_ERROR = 3

    @classmethod
    def for_verdict(cls, verdict: Verdict) -> "ExitCode":
        return {
            Verdict.PASS: cls.PASS,
            Verdict.FAIL: cls.FAIL,
            Verdict.INCONCLUSIVE: cls.INCONCLUSIVE,
        }.get(verdict, cls.PASS)
