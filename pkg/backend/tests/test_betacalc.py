"""
Tests for the 1-form decomposition, grid scans and sampling
"""
import math

import numpy as np
import pytest

from app.core.exceptions import SingularMetric
from app.core.exclusion import ExclusionStats
from app.models import Box, Direction, Point
from app.services import sampling
from app.services.betacalc import b_constancy_scan, closedness_scan, contractions, decompose
from app.services.fields import conformal_pair, flat_pair, inline_pair


class TestDecompose:
    """Test b_{i|j} = r_ij + s_ij"""

    def test_parallel_form(self, unit_box):
        """Test a constant form on the flat metric is parallel"""
        pair = flat_pair(lambda x1, x2: 0.3, lambda x1, x2: -0.2, unit_box)
        dec = decompose(pair, Point(0.1, 0.4))

        np.testing.assert_allclose(dec.r, np.zeros((2, 2)))
        np.testing.assert_allclose(dec.s, np.zeros((2, 2)))
        assert dec.b2 == pytest.approx(0.13)

    def test_rotation_form(self, unit_box):
        """Test x2 dx1 - x1 dx2 has s_12 = 1 and r = 0"""
        pair = flat_pair(lambda x1, x2: x2, lambda x1, x2: -x1, unit_box)
        dec = decompose(pair, Point(0.2, -0.3))

        assert dec.s12 == pytest.approx(1.0)
        np.testing.assert_allclose(dec.r, np.zeros((2, 2)), atol=1e-15)

    def test_parts_recombine(self, unit_box):
        """Test r + s = b_{i|j} and the symmetry of each part on a curved metric"""
        pair = conformal_pair(
            lambda x1, x2: 0.4 * x1 - x2 * x2,
            lambda x1, x2: 1 + x1 * x2,
            lambda x1, x2: x1,
            0.6,
            unit_box,
        )
        dec = decompose(pair, Point(0.3, 0.2))

        np.testing.assert_allclose(dec.r + dec.s, dec.bij, atol=1e-14)
        np.testing.assert_allclose(dec.r, dec.r.T)
        np.testing.assert_allclose(dec.s, -dec.s.T)
        assert dec.b2 == pytest.approx(0.36, rel=1e-12)

    def test_normalized_form_is_orthogonal_to_its_derivative(self, unit_box):
        """Test constant b^2 forces b^i b_{i|j} = 0"""
        pair = conformal_pair(
            lambda x1, x2: x1 * x2,
            lambda x1, x2: 2 + x2,
            lambda x1, x2: x1 - 1,
            0.5,
            unit_box,
        )
        dec = decompose(pair, Point(-0.2, 0.1))

        np.testing.assert_allclose(dec.b_up @ dec.bij, [0.0, 0.0], atol=1e-13)

    def test_contractions(self, randers_nonclosed):
        """Test r_00, s_0 and s^i_0 for beta = x2 y1"""
        dec = decompose(randers_nonclosed, Point(0.0, 0.4))
        c = contractions(dec, Direction(1.0, 2.0))

        # b = (0.4, 0), s_12 = 1/2, r_12 = 1/2
        assert c.r00 == pytest.approx(2.0)
        assert c.s0 == pytest.approx(0.4)
        np.testing.assert_allclose(c.s0_up, [1.0, -0.5])

    def test_singular_metric(self, unit_box):
        """Test decomposition refuses a degenerate alpha"""
        pair = inline_pair(
            lambda x1, x2: 1.0,
            lambda x1, x2: 1.0,
            lambda x1, x2: 1.0,
            lambda x1, x2: 0.0,
            lambda x1, x2: 0.0,
            unit_box,
        )
        with pytest.raises(SingularMetric):
            decompose(pair, Point(0.0, 0.0))


class TestScans:
    """Test grid scans of closedness and constant length"""

    def test_closed_form(self, randers_closed):
        """Test d(x1^2/2) is closed everywhere"""
        points = sampling.grid(randers_closed, n=5)

        assert closedness_scan(randers_closed, points) == pytest.approx(0.0, abs=1e-15)

    def test_nonclosed_form(self, randers_nonclosed):
        """Test x2 dx1 has |s_12| = 1/2"""
        points = sampling.grid(randers_nonclosed, n=5)

        assert closedness_scan(randers_nonclosed, points) == pytest.approx(0.5)

    def test_b_constancy(self):
        """Test |grad b^2| = 2|x1| for beta = x1 y1, maximal at the box edge"""
        pair = flat_pair(lambda x1, x2: x1, lambda x1, x2: 0.0, Box(-0.5, 0.5, -0.5, 0.5))
        points = sampling.grid(pair, n=5, margin=0.0)

        assert b_constancy_scan(pair, points) == pytest.approx(1.0)

    def test_exclusions_recorded(self, unit_box):
        """Test points with a singular alpha are excluded, not fatal"""
        pair = inline_pair(
            lambda x1, x2: x1,
            lambda x1, x2: 0.0,
            lambda x1, x2: 1.0,
            lambda x1, x2: 0.0,
            lambda x1, x2: 0.0,
            unit_box,
        )
        stats = ExclusionStats(check="closedness")
        points = [Point(-0.2, 0.0), Point(0.2, 0.0), Point(0.3, 0.1)]

        closedness_scan(pair, points, stats)

        assert stats.included == 2
        assert stats.excluded == 1
        assert stats.reasons["SingularMetric"] == 1

    def test_first_failure_propagates_without_stats(self, unit_box):
        """Test scans without accounting raise the first failure"""
        pair = inline_pair(
            lambda x1, x2: x1,
            lambda x1, x2: 0.0,
            lambda x1, x2: 1.0,
            lambda x1, x2: 0.0,
            lambda x1, x2: 0.0,
            unit_box,
        )
        with pytest.raises(SingularMetric):
            closedness_scan(pair, [Point(-0.2, 0.0)])


class TestSampling:
    """Test grids, directions and random samples"""

    def test_grid_row_major(self, euclidean):
        """Test an n x n grid without margin covers the box corners in order"""
        points = sampling.grid(euclidean, n=3, margin=0.0)

        assert len(points) == 9
        assert points[0] == Point(-0.5, -0.5)
        assert points[1] == Point(-0.5, 0.0)
        assert points[-1] == Point(0.5, 0.5)

    def test_grid_drops_excluded(self, pf_example_plus):
        """Test points at the pole of the construction are dropped"""
        pair, _ = pf_example_plus
        points = sampling.grid(pair, n=5)

        assert Point(0.0, 0.0) not in points
        assert len(points) < 25

    def test_unit_directions(self):
        """Test directions are unit and equally spaced"""
        dirs = sampling.unit_directions(8)

        assert len(dirs) == 8
        for y in dirs:
            assert math.hypot(y.y1, y.y2) == pytest.approx(1.0)
        assert dirs[2].y2 == pytest.approx(1.0)

    def test_random_samples_reproducible(self, euclidean):
        """Test the same seed gives the same samples"""
        first = sampling.random_samples(euclidean, 5, seed=3)
        second = sampling.random_samples(euclidean, 5, seed=3)
        other = sampling.random_samples(euclidean, 5, seed=4)

        assert first == second
        assert first != other
        assert all(euclidean.domain.contains(p) for p, _ in first)
