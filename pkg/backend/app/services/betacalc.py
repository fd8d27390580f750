"""
Beta Calculus
Covariant derivative of the 1-form, its r/s decomposition and grid scans
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from app.core.diffcore import x_jet
from app.core.exceptions import ABFinslerError
from app.core.exclusion import ExclusionStats
from app.models import Direction, Point
from app.services.fields import MetricPair, beta_norm2_field, christoffel, metric_at, one_form_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BetaDecomposition:
    """
    b_{i|j} and everything derived from it at one point

    Lower indices are covariant; `s_up` is s^i = a^ik s_k and `b_up` is b^i.
    """
    bij: np.ndarray
    r: np.ndarray
    s: np.ndarray
    r_i: np.ndarray
    s_i: np.ndarray
    s_up: np.ndarray
    b2: float
    b: np.ndarray
    b_up: np.ndarray
    a: np.ndarray
    a_inv: np.ndarray

    @property
    def s12(self) -> float:
        return float(self.s[0, 1])

    @property
    def s_mixed(self) -> np.ndarray:
        """s^i_j = a^ik s_kj"""
        return self.a_inv @ self.s


@dataclass(frozen=True)
class ContractionsAt:
    r00: float
    s0: float
    s0_up: np.ndarray


def decompose(pair: MetricPair, p: Point) -> BetaDecomposition:
    """
    Split b_{i|j} = d_j b_i - b_k Gamma^k_ij into symmetric and antisymmetric parts

    Raises:
        SingularMetric: a_ij singular at p
    """
    gamma, a_inv = christoffel(pair, p)
    b, db = one_form_at(pair, p)
    bij = db - np.einsum("k,kij->ij", b, gamma)
    r = 0.5 * (bij + bij.T)
    s = 0.5 * (bij - bij.T)
    b_up = a_inv @ b
    s_i = b_up @ s
    return BetaDecomposition(
        bij=bij,
        r=r,
        s=s,
        r_i=b_up @ r,
        s_i=s_i,
        s_up=a_inv @ s_i,
        b2=float(b @ b_up),
        b=b,
        b_up=b_up,
        a=metric_at(pair, p).a,
        a_inv=a_inv,
    )


def contractions(dec: BetaDecomposition, y: Direction) -> ContractionsAt:
    """r_00 = r_ij y^i y^j, s_0 = s_i y^i and s^i_0 = a^ik s_kj y^j"""
    v = y.as_array()
    return ContractionsAt(
        r00=float(v @ dec.r @ v),
        s0=float(dec.s_i @ v),
        s0_up=dec.s_mixed @ v,
    )


def _scan(name: str, values, grid: Iterable[Point], stats: Optional[ExclusionStats]) -> float:
    worst = 0.0
    for p in grid:
        try:
            value = values(p)
        except ABFinslerError as e:
            if stats is None:
                raise
            stats.record_excluded(str(p), e)
            continue
        if stats is not None:
            stats.record_included()
        worst = max(worst, value)
    logger.debug(f"{name} scan max = {worst:.3e}")
    return worst


def closedness_scan(pair: MetricPair, grid: Iterable[Point], stats: Optional[ExclusionStats] = None) -> float:
    """
    max |s_12| over the grid

    With `stats`, points whose evaluation raises are recorded there and
    skipped; without it the first failure propagates.
    """
    return _scan("closedness", lambda p: abs(decompose(pair, p).s12), grid, stats)


def b_constancy_scan(pair: MetricPair, grid: Iterable[Point], stats: Optional[ExclusionStats] = None) -> float:
    """max |grad(b^2)| over the grid"""
    field = beta_norm2_field(pair)
    return _scan(
        "b-constancy",
        lambda p: float(np.linalg.norm(x_jet(field, p).grad)),
        grid,
        stats,
    )
