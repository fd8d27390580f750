"""
Sampling
Deterministic grids, unit directions and seeded random samples over a pair's domain
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from app.core.config import get_settings
from app.models import Box, Direction, Point
from app.services.fields import MetricPair

logger = logging.getLogger(__name__)


def grid(pair: MetricPair, n: Optional[int] = None, margin: Optional[float] = None) -> List[Point]:
    """
    n x n uniform grid over the domain shrunk by margin * size

    Points within margin * size of an excluded locus are dropped. Order is
    row-major in (x1, x2).
    """
    settings = get_settings()
    n = n or settings.GRID_SIZE
    margin = settings.MARGIN if margin is None else margin
    box = pair.domain.shrink(margin)
    radius = margin * pair.domain.size

    points = [
        Point(float(x1), float(x2))
        for x1 in np.linspace(box.lo1, box.hi1, n)
        for x2 in np.linspace(box.lo2, box.hi2, n)
    ]
    kept = [p for p in points if not pair.is_excluded(p, radius)]
    if len(kept) < len(points):
        logger.debug(f"{pair.name}: dropped {len(points) - len(kept)} grid points near excluded loci")
    return kept


def describe_grid(pair: MetricPair, points: List[Point], n: int, margin: float) -> str:
    box = pair.domain.shrink(margin)
    return (
        f"{n}x{n} on [{box.lo1:.6g}, {box.hi1:.6g}]x[{box.lo2:.6g}, {box.hi2:.6g}], "
        f"margin {margin:g}, {len(points)} points"
    )


def unit_directions(n: Optional[int] = None) -> List[Direction]:
    """n equally spaced Euclidean unit directions starting at angle 0"""
    n = n or get_settings().N_DIRECTIONS
    return [Direction.at_angle(2.0 * math.pi * k / n) for k in range(n)]


def random_samples(
    pair: MetricPair,
    count: Optional[int] = None,
    seed: Optional[int] = None,
    margin: Optional[float] = None,
    box: Optional[Box] = None,
) -> List[Tuple[Point, Direction]]:
    """Seeded uniform (point, unit direction) samples away from excluded loci"""
    settings = get_settings()
    count = count or settings.N_SAMPLES
    seed = settings.SEED if seed is None else seed
    margin = settings.MARGIN if margin is None else margin
    inner = box or pair.domain.shrink(margin)
    radius = margin * pair.domain.size

    rng = np.random.default_rng(seed)
    samples: List[Tuple[Point, Direction]] = []
    attempts = 0
    while len(samples) < count and attempts < 100 * count:
        attempts += 1
        x1 = float(rng.uniform(inner.lo1, inner.hi1))
        x2 = float(rng.uniform(inner.lo2, inner.hi2))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        p = Point(x1, x2)
        if pair.is_excluded(p, radius):
            continue
        samples.append((p, Direction.at_angle(theta)))
    if len(samples) < count:
        logger.warning(f"{pair.name}: only {len(samples)} of {count} random samples avoid excluded loci")
    return samples
