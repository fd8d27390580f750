"""
Tests for phi families, the Taylor map and regularity scans
"""
import logging
import math

import pytest
from scipy import integrate

from app.core.exceptions import (
    ConfigError,
    DomainExit,
    RandersTypeDegenerate,
    RangeViolation,
    SingularODE,
)
from app.models import Sign
from app.services.phi import (
    HalfPower,
    IntegerPower,
    QuadraticFamily,
    QuarticODE,
    RandersType,
    SingularB,
    SquareRootFamily,
    check_k_admissible,
    family_from_spec,
    is_randers_type,
    ode_solve_yg3,
    phi_jet,
    phi_taylor,
    phi_value,
    quadrature_y8_y10,
    regularity_margin,
    regularity_radius,
    square_root_from_c6,
    taylor_to_k,
)


def _central(family, s, h=1e-4):
    return (phi_value(family, s + h) - phi_value(family, s - h)) / (2 * h)


class TestClosedForms:
    """Test closed-form families"""

    def test_quadratic_jet(self, quadratic_plus):
        """Test 1 + s^2 at s = 0.3"""
        pj = phi_jet(quadratic_plus, 0.3)

        assert pj.phi == pytest.approx(1.09)
        assert pj.dphi == pytest.approx(0.6)
        assert pj.d2phi == pytest.approx(2.0)

    def test_singular_b_domain(self):
        """Test SingularB refuses |s| >= b"""
        family = SingularB(b=0.5, ctilde=1.0)

        assert phi_value(family, 0.0) == pytest.approx(1.0)
        with pytest.raises(DomainExit):
            phi_jet(family, 0.5)

    def test_square_root_requires_nonzero_c(self):
        """Test c = 0 is rejected"""
        with pytest.raises(RangeViolation):
            SquareRootFamily(k=1.0, c=0.0)

    def test_square_root_from_sign(self):
        """Test the minus sign variant flips c"""
        family = square_root_from_c6(k=1.0, c=2.0, sign=Sign.MINUS)

        assert family.c == pytest.approx(-4.0)


class TestTaylorMap:
    """Test phi -> (k1, k2, k3)"""

    @pytest.mark.parametrize(
        "sign,expected",
        [(Sign.PLUS, (2.0, 0.0, -3.0)), (Sign.MINUS, (-2.0, 0.0, 3.0))],
    )
    def test_quadratic(self, sign, expected):
        """Test 1 +/- s^2 maps to (+/-2, 0, -/+3)"""
        k = taylor_to_k(QuadraticFamily(sign))

        assert k == pytest.approx(expected, abs=1e-12)

    def test_square_root(self):
        """Test SquareRootFamily(k=1, c=1) maps to (1, 2, -4)"""
        k = taylor_to_k(SquareRootFamily(k=1.0, c=1.0))

        assert k == pytest.approx((1.0, 2.0, -4.0), abs=1e-10)

    @pytest.mark.parametrize("k", [0.0, 0.5, -2.0])
    def test_randers_type_degenerate(self, k):
        """Test eps*s + sqrt(1 + k s^2) is Randers type"""
        family = RandersType(epsilon=1.0, k=k)

        assert is_randers_type(family)
        with pytest.raises(RandersTypeDegenerate):
            taylor_to_k(family)

    def test_integer_power_series(self):
        """Test the leading coefficients of the integral family"""
        a = phi_taylor(IntegerPower(b=1.0, c=1.0, k=0.0, m=1))

        assert a.a0 == pytest.approx(1.0)
        assert a.a1 == pytest.approx(0.0, abs=1e-14)
        assert a.a2 == pytest.approx(-0.5)
        assert a.a3 == pytest.approx(1.0 / 3.0)

    def test_ode_series_round_trip(self):
        """Test the ODE family for (2, 0, -3) expands back to 1 + s^2"""
        family = QuarticODE(k1=2.0, k2=0.0, k3=-3.0, s_max=0.5)

        assert taylor_to_k(family) == pytest.approx((2.0, 0.0, -3.0), abs=1e-10)

    def test_admissibility(self):
        """Test both excluded k2 values are rejected"""
        check_k_admissible(2.0, 0.5, 0.0)
        with pytest.raises(RangeViolation):
            check_k_admissible(2.0, 0.0, 0.0)
        with pytest.raises(RangeViolation):
            check_k_admissible(2.0, 0.96, 0.0)
        check_k_admissible(2.0, 0.96, 0.0, regular=False)


class TestIntegralFamilies:
    """Test the quadrature-defined families"""

    def test_quadrature_closed_form(self):
        """Test int_0^s t^2 (1-t^2)^(-3/2) dt = s/sqrt(1-s^2) - asin(s)"""
        family = IntegerPower(b=1.0, c=1.0, k=0.0, m=1)
        expected = 0.5 / math.sqrt(0.75) - math.asin(0.5)

        assert quadrature_y8_y10(family, 0.5) == pytest.approx(expected, rel=1e-11)

    def test_quadrature_matches_scipy(self):
        """Test a k != 0 integrand against scipy"""
        family = IntegerPower(b=0.8, c=1.5, k=0.4, m=2)
        reference, _ = integrate.quad(family.integrand, 0.0, 0.6, epsabs=1e-14, epsrel=1e-13)

        assert quadrature_y8_y10(family, 0.6) == pytest.approx(reference, rel=1e-9)

    @pytest.mark.parametrize(
        "family",
        [IntegerPower(b=1.0, c=1.0, k=0.0, m=1), HalfPower(b=1.0, c=2.0, k=0.0, m=1)],
        ids=["integer", "half"],
    )
    def test_derivative_matches_difference(self, family):
        """Test phi' agrees with a central difference"""
        s = 0.45

        assert phi_jet(family, s).dphi == pytest.approx(_central(family, s), rel=1e-6)

    def test_singular_endpoint(self):
        """Test s at the bound is a domain exit"""
        with pytest.raises(DomainExit):
            quadrature_y8_y10(IntegerPower(b=1.0, c=1.0, k=0.0, m=1), 1.0)

    def test_m_must_be_integer(self):
        """Test m = 0 is rejected"""
        with pytest.raises(RangeViolation):
            IntegerPower(b=1.0, c=1.0, k=0.0, m=0)


class TestQuarticODE:
    """Test the quartic-coefficient ODE solver"""

    def test_reproduces_quadratic(self):
        """Test (2, 0, -3) integrates to 1 + s^2"""
        family = QuarticODE(k1=2.0, k2=0.0, k3=-3.0, s_max=0.5)

        assert phi_value(family, 0.4) == pytest.approx(1.16, abs=1e-9)
        assert phi_value(family, -0.25) == pytest.approx(1.0625, abs=1e-9)
        assert phi_jet(family, 0.4).d2phi == pytest.approx(2.0, abs=1e-8)

    def test_error_estimates_small(self):
        """Test Richardson and plug-back residuals of a smooth solution"""
        solution = ode_solve_yg3(1.0, 0.5, 0.5, epsilon=0.2, s_max=0.6)

        assert solution.richardson_error < 1e-8
        assert solution.residual < 1e-6

    def test_singular_leading_coefficient(self):
        """Test 1 - 4 s^2 vanishing inside [0, s_max] is refused"""
        with pytest.raises(SingularODE):
            ode_solve_yg3(0.0, 0.0, -4.0, s_max=0.6)

    def test_outside_interval(self):
        """Test evaluation beyond s_max"""
        with pytest.raises(DomainExit):
            phi_jet(QuarticODE(k1=2.0, k2=0.0, k3=-3.0, s_max=0.5), 0.7)


class TestRegularity:
    """Test the regularity margin and radius"""

    def test_margin_quadratic_plus(self, quadratic_plus):
        """Test the margin of 1 + s^2 is 1 - rho^2"""
        assert regularity_margin(quadratic_plus, 0.9) == pytest.approx(0.19, abs=1e-9)

    def test_radius_quadratic_plus(self, quadratic_plus):
        """Test the radius of 1 + s^2 is 1"""
        assert regularity_radius(quadratic_plus, 2.0) == pytest.approx(1.0, abs=1e-6)

    def test_radius_quadratic_minus_warns(self, caplog):
        """Test the radius of 1 - s^2 is 1/sqrt(2) and the mismatch is logged"""
        with caplog.at_level(logging.WARNING):
            radius = regularity_radius(QuadraticFamily(Sign.MINUS), 1.0)

        assert radius == pytest.approx(1 / math.sqrt(2), abs=1e-6)
        assert "regularity radius" in caplog.text

    def test_radius_square_root(self):
        """Test SquareRootFamily(1, 1) loses regularity at 1/sqrt(2)"""
        radius = regularity_radius(SquareRootFamily(k=1.0, c=1.0), 0.99)

        assert radius == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_rho_beyond_bound(self):
        """Test rho at the family bound is a domain exit"""
        with pytest.raises(DomainExit):
            regularity_margin(SingularB(b=0.5, ctilde=1.0), 0.5)


class TestFamilyRegistry:
    """Test building families from config specs"""

    def test_known_family(self):
        """Test the quadratic family with a sign parameter"""
        family = family_from_spec("quadratic", {"sign": "-"})

        assert family == QuadraticFamily(Sign.MINUS)

    def test_unknown_family(self):
        """Test unknown names list the known ones"""
        with pytest.raises(ConfigError) as exc:
            family_from_spec("cubic", {})

        assert exc.value.field == "family.name"
        assert "quadratic" in str(exc.value)

    def test_missing_parameter(self):
        """Test a missing parameter names its field"""
        with pytest.raises(ConfigError) as exc:
            family_from_spec("square_root", {"k": 1.0})

        assert exc.value.field == "family.params.c"

    def test_range_violation_is_config_error(self):
        """Test invalid parameter values surface as config errors"""
        with pytest.raises(ConfigError) as exc:
            family_from_spec("singular_b", {"b": -1.0, "ctilde": 1.0})

        assert exc.value.field == "family.params.b"
