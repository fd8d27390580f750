"""
Exclusion Accounting
Tracks included, excluded and flagged sample points of a grid check
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.core.config import get_settings

logger = logging.getLogger(__name__)


@dataclass
class ExclusionStats:
    """Per-check sample accounting"""
    check: str
    included: int = 0
    excluded: int = 0
    flagged: int = 0
    reasons: Counter = field(default_factory=Counter)
    samples: List[Tuple[str, str]] = field(default_factory=list)
    max_samples: int = 10

    @property
    def total(self) -> int:
        return self.included + self.excluded + self.flagged

    @property
    def excluded_fraction(self) -> float:
        if self.total == 0:
            return 0.0
        return (self.excluded + self.flagged) / self.total

    def record_included(self) -> None:
        self.included += 1

    def record_excluded(self, where: str, error: Exception) -> None:
        """Record a point dropped because evaluation raised"""
        self.excluded += 1
        self._remember(where, type(error).__name__)
        logger.debug(f"{self.check}: excluded {where}: {error}")

    def record_flagged(self, where: str, reason: str) -> None:
        """Record a point evaluated but unusable (e.g. rank-deficient fit)"""
        self.flagged += 1
        self._remember(where, reason)
        logger.warning(f"{self.check}: flagged {where}: {reason}")

    def _remember(self, where: str, reason: str) -> None:
        self.reasons[reason] += 1
        if len(self.samples) < self.max_samples:
            self.samples.append((where, reason))

    def is_inconclusive(self, threshold: Optional[float] = None) -> bool:
        """More than `threshold` of the points were excluded or flagged, or none were usable"""
        if threshold is None:
            threshold = get_settings().INCONCLUSIVE_FRACTION
        return self.included == 0 or self.excluded_fraction > threshold

    def to_dict(self) -> Dict[str, object]:
        return {
            "included": self.included,
            "excluded": self.excluded,
            "flagged": self.flagged,
            "excluded_fraction": self.excluded_fraction,
            "reasons": dict(sorted(self.reasons.items())),
        }
