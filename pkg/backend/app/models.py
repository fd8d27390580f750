"""
Domain Models
Points, directions, domain boxes and the enums shared across services
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np


# Enums
class Sign(str, enum.Enum):
    """Upper/lower sign choice of the +/- constructions"""
    PLUS = "+"
    MINUS = "-"

    @property
    def factor(self) -> float:
        return 1.0 if self is Sign.PLUS else -1.0


class ClassId(str, enum.Enum):
    """Douglas and projectively flat classes with their defining equations"""
    DOUGLAS_I = "DOUGLAS_I"
    DOUGLAS_II = "DOUGLAS_II"
    DOUGLAS_III = "DOUGLAS_III"
    DOUGLAS_IV = "DOUGLAS_IV"
    DOUGLAS_COR = "DOUGLAS_COR"
    DOUGLAS_SING = "DOUGLAS_SING"
    PF_I = "PF_I"
    PF_II = "PF_II"
    PF_III = "PF_III"
    PF_IV = "PF_IV"
    PF_COR = "PF_COR"

    @property
    def is_projectively_flat(self) -> bool:
        return self.value.startswith("PF_")

    @property
    def beta_class(self) -> "ClassId":
        """Douglas equation on r_ij that a projectively flat class carries"""
        return _PF_BETA_CLASS.get(self, self)


_PF_BETA_CLASS = {
    ClassId.PF_I: ClassId.DOUGLAS_I,
    ClassId.PF_II: ClassId.DOUGLAS_II,
    ClassId.PF_III: ClassId.DOUGLAS_III,
    ClassId.PF_IV: ClassId.DOUGLAS_IV,
    ClassId.PF_COR: ClassId.DOUGLAS_COR,
}


class ConformalityMode(str, enum.Enum):
    THM2 = "THM2"
    THM001 = "THM001"


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"
    REPORTED = "reported"


# Value types
@dataclass(frozen=True)
class Point:
    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise ValueError(f"Point coordinates must be finite, got ({self.x1}, {self.x2})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])

    def __str__(self) -> str:
        return f"({self.x1:.6g}, {self.x2:.6g})"


@dataclass(frozen=True)
class Direction:
    y1: float
    y2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2])

    @property
    def is_zero(self) -> bool:
        return self.y1 == 0.0 and self.y2 == 0.0

    @classmethod
    def at_angle(cls, theta: float) -> "Direction":
        return cls(math.cos(theta), math.sin(theta))


@dataclass(frozen=True)
class Box:
    """Closed coordinate rectangle [lo1, hi1] x [lo2, hi2]"""
    lo1: float
    hi1: float
    lo2: float
    hi2: float

    def __post_init__(self):
        if not (self.lo1 < self.hi1 and self.lo2 < self.hi2):
            raise ValueError(f"Empty box {self}")

    @property
    def size(self) -> float:
        return max(self.hi1 - self.lo1, self.hi2 - self.lo2)

    def contains(self, p: Point) -> bool:
        return self.lo1 <= p.x1 <= self.hi1 and self.lo2 <= p.x2 <= self.hi2

    def shrink(self, margin: float) -> "Box":
        """Inner box at distance margin * size from the boundary"""
        d = margin * self.size
        return Box(self.lo1 + d, self.hi1 - d, self.lo2 + d, self.hi2 - d)

    def as_list(self) -> List[Tuple[float, float]]:
        return [(self.lo1, self.hi1), (self.lo2, self.hi2)]


@dataclass(frozen=True)
class ExcludedLocus:
    """
    Region where evaluation is forbidden

    `distance` returns a nonnegative proxy for the distance to the locus;
    sampling drops points where it falls below margin * box size.
    """
    description: str
    distance: Callable[[float, float], float] = field(compare=False)

    def near(self, p: Point, radius: float) -> bool:
        try:
            return self.distance(p.x1, p.x2) < radius
        except (ValueError, ZeroDivisionError, OverflowError):
            return True
