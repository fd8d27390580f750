"""
Tests for the verification checks and their reports
"""
import math
from pathlib import Path

import pytest

from app.core.exceptions import ConfigError, DomainExit, InsufficientSamples, PrerequisiteFailed
from app.core.exclusion import ExclusionStats
from app.models import Box, ClassId, ConformalityMode, Direction, Point, Sign, Verdict
from app.services import constructs, runner, sampling, verify
from app.services.constructs import HolomorphicPair
from app.services.fields import christoffel, finsler_function, flat_pair, riemannian_function
from app.services.phi import QuadraticFamily, square_root_from_c6
from app.services.spray import riemann_spray
from app.services.verify import ClassParams, VerificationReport

EXAMPLES_DIR = Path(__file__).resolve().parent.parent / "examples"
UPPER_BOX = Box(0.5, 1.5, 0.5, 1.5)
IDENTITY = HolomorphicPair(u=lambda x1, x2: x1, v=lambda x1, x2: x2, description="z")


@pytest.fixture
def ex01():
    return constructs.build_ex01(b=1.0, c=1.0, m=1)


class TestReport:
    """Test verdicts and serialization"""

    def test_pass_and_fail(self):
        """Test the verdict is set by the worst residual"""
        report = VerificationReport(check="x", grid="", tolerance=1e-3, residuals=[1e-5, 2e-4])
        assert report.decide().verdict is Verdict.PASS

        report.residuals.append(0.1)
        assert report.decide().verdict is Verdict.FAIL
        assert report.max_residual == pytest.approx(0.1)

    def test_no_residuals_inconclusive(self):
        """Test an empty report cannot pass"""
        report = VerificationReport(check="x", grid="", tolerance=1.0)

        assert report.decide().verdict is Verdict.INCONCLUSIVE

    def test_too_many_exclusions_inconclusive(self):
        """Test a small residual does not pass when most points were excluded"""
        stats = ExclusionStats("x")
        stats.record_included()
        for i in range(3):
            stats.record_excluded(f"p{i}", DomainExit("test"))
        report = VerificationReport(check="x", grid="", tolerance=1.0, residuals=[0.0, None, None, None], stats=stats)

        assert report.decide().verdict is Verdict.INCONCLUSIVE

    def test_to_dict(self, randers_closed):
        """Test the serialized report carries points, residuals and exclusions"""
        points = sampling.grid(randers_closed, n=3)
        data = verify.closedness_report(randers_closed, points, grid_description="3x3").to_dict()

        assert data["check"] == "closedness"
        assert data["verdict"] == "reported"
        assert data["finding"] == "closed"
        assert len(data["points"]) == len(data["residuals"]) == len(points)
        assert data["exclusions"]["included"] == len(points)


class TestDouglas:
    """Test the Douglas polynomial fit"""

    def test_closed_randers_passes(self, randers_closed, randers):
        """Test a closed Randers metric is Douglas"""
        report = verify.douglas_check(randers_closed, randers, sampling.grid(randers_closed, n=5))

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-8

    def test_nonclosed_randers_fails(self, randers_nonclosed, randers):
        """Test a non-closed Randers metric is not Douglas"""
        report = verify.douglas_check(randers_nonclosed, randers, sampling.grid(randers_nonclosed, n=5))

        assert report.verdict is Verdict.FAIL
        assert report.max_residual >= 1e-4

    def test_small_curl_fails(self, unit_box, randers):
        """Test a 1-form with curl 1e-8 is caught although P y dominates G"""
        eps = 1e-8
        pair = flat_pair(lambda x1, x2: 0.5 * x1 + eps * x2, lambda x1, x2: 0.0, unit_box)
        provider = verify.restricted_spray(pair, randers)

        assert verify.douglas_fit_residual(provider, Point(0.3, 0.2)) >= 0.5
        assert verify.douglas_check(pair, randers, sampling.grid(pair, n=3)).verdict is Verdict.FAIL

    def test_rounding_noise_counts_as_zero(self, unit_box, randers):
        """Test a closed 1-form whose data is only rounding noise fits exactly"""
        pair = flat_pair(lambda x1, x2: 0.5 * x1, lambda x1, x2: 0.0, unit_box)
        provider = verify.restricted_spray(pair, randers)

        assert verify.douglas_fit_residual(provider, Point(0.3, 0.2)) == 0.0

    def test_riemannian_spray_fits(self):
        """Test a quadratic spray leaves no misfit"""
        pair = constructs.section7_pair(Sign.PLUS)[0]
        provider = lambda p, y: riemann_spray(christoffel(pair, p)[0], y)

        assert verify.douglas_fit_residual(provider, Point(0.2, 0.1)) <= 1e-12

    def test_section7_is_douglas(self, section7_plus):
        """Test the closing rotation example with a non-closed form"""
        pair, family = section7_plus
        report = verify.douglas_check(pair, family, sampling.grid(pair, n=5))

        assert report.verdict is Verdict.PASS

    def test_too_few_angles(self, randers_closed, randers):
        """Test the fit refuses fewer than eight directions"""
        provider = verify.restricted_spray(randers_closed, randers)

        with pytest.raises(InsufficientSamples):
            verify.douglas_fit(provider, Point(0.1, 0.1), n_angles=4)

    def test_th2_constant_b_is_douglas(self):
        """Test f(z) = z with B = 1/4 and the plus sign fits a cubic"""
        pair = constructs.build_th2(lambda x1, x2: 0.25, IDENTITY, Sign.PLUS, UPPER_BOX)
        provider = verify.restricted_spray(pair, QuadraticFamily(Sign.PLUS))

        for p in sampling.grid(pair, n=4):
            assert verify.douglas_fit_residual(provider, p) <= 1e-7

    @pytest.mark.parametrize("case", ["randers_closed", "section7", "th2"])
    def test_residual_stable_under_doubled_angles(self, case, randers_closed, randers, section7_plus):
        """Test going from 64 to 128 angles changes a passing residual by at most a factor 2"""
        if case == "randers_closed":
            pair, family = randers_closed, randers
        elif case == "section7":
            pair, family = section7_plus
        else:
            pair = constructs.build_th2(lambda x1, x2: 0.25, IDENTITY, Sign.PLUS, UPPER_BOX)
            family = QuadraticFamily(Sign.PLUS)
        provider = verify.restricted_spray(pair, family)

        for p in sampling.grid(pair, n=3):
            coarse = verify.douglas_fit_residual(provider, p, n_angles=64)
            fine = verify.douglas_fit_residual(provider, p, n_angles=128)
            assert coarse <= 1e-7
            # absolute floor at roundoff
            assert fine <= 2 * coarse + 1e-12
            assert coarse <= 2 * fine + 1e-12


class TestHamel:
    """Test the Hamel projective-flatness residual"""

    def test_residual_vector(self, randers_closed, randers_nonclosed, randers):
        """Test F_{x^m y^l} y^m - F_{x^l} is zero for dbeta = 0 and (y2, -y1) for beta = x2 y1"""
        p, y = Point(0.2, 0.3), Direction(0.6, 0.8)

        closed = verify.hamel_residual(finsler_function(randers_closed, randers), p, y)
        curled = verify.hamel_residual(finsler_function(randers_nonclosed, randers), p, y)

        assert list(closed) == pytest.approx([0.0, 0.0], abs=1e-12)
        assert list(curled) == pytest.approx([0.8, -0.6], abs=1e-12)

    def test_pf_example_is_flat(self, pf_example_plus):
        """Test the rotation example satisfies Hamel's equations"""
        pair, family = pf_example_plus
        report = verify.hamel_check(pair, family, sampling.grid(pair, n=5), n_directions=8)

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-7

    def test_pf_example_form_not_closed(self, pf_example_plus):
        """Test projective flatness here does not come from a closed form"""
        pair, _ = pf_example_plus
        report = verify.closedness_report(pair, sampling.grid(pair, n=5))

        assert report.finding == "not closed"
        assert report.max_residual >= 1e-3

    def test_nonclosed_randers_fails(self, randers_nonclosed, randers):
        """Test Hamel's equations detect a non-closed Randers form"""
        report = verify.hamel_check(randers_nonclosed, randers, sampling.grid(randers_nonclosed, n=3))

        assert report.verdict is Verdict.FAIL

    def test_ex01_within_s_limit(self, ex01):
        """Test the singular integral family is projectively flat away from |s| = b"""
        pair, family = ex01
        report = verify.hamel_check(pair, family, sampling.grid(pair, n=4), n_directions=12, s_limit=0.8)

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-6


class TestFlatImpliesDouglas:
    """Test projectively flat pairs also pass the Douglas fit"""

    @pytest.mark.parametrize("sign", [Sign.PLUS, Sign.MINUS])
    def test_pf_example(self, sign):
        """Test both signs of the rotation example pass Hamel and Douglas"""
        pair, family = constructs.build_pf_example(0.0, 0.0, 1.0, 0.0, sign)
        points = sampling.grid(pair, n=5)

        assert verify.hamel_check(pair, family, points, n_directions=8).verdict is Verdict.PASS
        assert verify.douglas_check(pair, family, points).verdict is Verdict.PASS

    def test_ex01(self, ex01):
        """Test the singular integral family within the s limit"""
        pair, family = ex01
        points = sampling.grid(pair, n=3)

        assert verify.hamel_check(pair, family, points, n_directions=8, s_limit=0.8).verdict is Verdict.PASS
        assert verify.douglas_check(pair, family, points, s_limit=0.8).verdict is Verdict.PASS

    @pytest.mark.parametrize("path", sorted(EXAMPLES_DIR.glob("*.json")), ids=lambda path: path.stem)
    def test_bundled_config(self, path):
        """Test every bundled config that passes Hamel also passes Douglas"""
        config = runner.apply_overrides(runner.load_config(path), {"grid": 3})
        ctx = runner.build_context(config)
        if ctx.family is None:
            pytest.skip(f"{path.stem} has no family")

        [hamel] = runner.run_checks(ctx, ["hamel"])
        if hamel.verdict is not Verdict.PASS:
            pytest.skip(f"{path.stem} is not projectively flat")
        [douglas] = runner.run_checks(ctx, ["douglas"])

        assert douglas.verdict is Verdict.PASS

    @pytest.mark.slow
    def test_pf_example_geodesics_straight(self, pf_example_plus):
        """Test eight seeded traces from the rotation example stay straight"""
        pair, family = pf_example_plus
        starts = sampling.random_samples(pair, count=8, seed=0, box=Box(-0.15, 0.15, -0.15, 0.15))
        report, _ = verify.geodesic_check(finsler_function(pair, family), starts, pair.domain, arclen=0.2, steps=256)

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-5


class TestClassBeta:
    """Test class equations on b_{i|j}"""

    def test_parallel_form_douglas_i(self, unit_box):
        """Test a constant form on the flat metric has zero residual and tau"""
        pair = flat_pair(lambda x1, x2: 0.3, lambda x1, x2: 0.2, unit_box)
        params = ClassParams(k1=2.0, k2=0.5, k3=0.0)
        report = verify.class_beta_residual(ClassId.DOUGLAS_I, pair, params, sampling.grid(pair, n=3))

        assert report.verdict is Verdict.PASS
        assert report.max_residual == pytest.approx(0.0, abs=1e-14)
        assert all(abs(t) < 1e-14 for t in report.recovered.tau)

    def test_section7_douglas_cor(self, section7_plus):
        """Test the rotation example solves the DOUGLAS_COR equation with tau = 0"""
        pair, family = section7_plus
        params = ClassParams.from_family(family)
        report = verify.class_beta_residual(ClassId.DOUGLAS_COR, pair, params, sampling.grid(pair, n=5))

        assert report.verdict is Verdict.PASS
        assert max(abs(t) for t in report.recovered.tau if t is not None) < 1e-8

    def test_ex01_douglas_iii(self, ex01):
        """Test r_ij = -(b_i s_j + b_j s_i) / b^2 for the rotation field"""
        pair, family = ex01
        params = ClassParams.from_family(family)
        report = verify.class_beta_residual(ClassId.DOUGLAS_III, pair, params, sampling.grid(pair, n=4))

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-8

    def test_special_th001_douglas_i(self):
        """Test the special closed-conformal triple has a parallel form"""
        params = constructs.special_th001_params(0.3, 0.4, 0.0, 1.0, 0.0)
        pair = constructs.build_th001(params, Box(0.5, 1.5, 0.5, 1.5))
        report = verify.class_beta_residual(
            ClassId.DOUGLAS_I, pair, ClassParams(k1=0.0, k2=1.0, k3=0.0), sampling.grid(pair, n=3)
        )

        assert report.verdict is Verdict.PASS

    def test_th2_douglas_ii(self):
        """Test a conformal-Douglas pair with varying B solves DOUGLAS_II with d = 3/(1 - b^2)"""
        B = lambda x1, x2: 0.1 + 0.1 * x1
        pair = constructs.build_th2(B, IDENTITY, Sign.PLUS, UPPER_BOX)
        params = ClassParams.from_family(square_root_from_c6(0.0, 1.0, Sign.PLUS))
        report = verify.class_beta_residual(ClassId.DOUGLAS_II, pair, params, sampling.grid(pair, n=4))

        assert (params.c, params.k) == (1.0, 0.0)
        assert report.verdict is Verdict.PASS
        assert report.max_residual <= report.tolerance
        assert report.details["d_max_deviation"] is not None
        assert report.details["d_max_deviation"] <= 1e-6
        for p, d in zip(report.points, report.recovered.d):
            assert d == pytest.approx(3.0 / (1.0 - B(*p)), abs=1e-6)

    def test_closed_form_leaves_d_unrecovered(self):
        """Test constant B gives a closed form, so d is not determined"""
        pair = constructs.build_th2(lambda x1, x2: 0.25, IDENTITY, Sign.PLUS, UPPER_BOX)
        params = ClassParams.from_family(square_root_from_c6(0.0, 1.0, Sign.PLUS))
        report = verify.class_beta_residual(ClassId.DOUGLAS_II, pair, params, sampling.grid(pair, n=3))

        assert report.verdict is Verdict.PASS
        assert all(d is None for d in report.recovered.d)
        assert report.details["d_max_deviation"] is None

    def test_missing_parameter(self):
        """Test a class without its constants is a config error"""
        with pytest.raises(ConfigError) as exc:
            ClassParams().require(ClassId.PF_II, "c", "k")

        assert exc.value.field == "params.c"


class TestClassSpray:
    """Test class equations on the Riemannian spray"""

    def test_pf_example_pf_cor(self, pf_example_plus):
        """Test G_alpha has the PF_COR form with rho = -2x/D"""
        pair, family = pf_example_plus
        params = ClassParams.from_family(family)
        report = verify.class_spray_residual(ClassId.PF_COR, pair, params, sampling.grid(pair, n=5))

        assert report.verdict is Verdict.PASS
        p = report.points[0]
        rho = report.recovered.rho[0]
        D = 1 - p[0] ** 2 - p[1] ** 2
        assert rho == pytest.approx((-2 * p[0] / D, -2 * p[1] / D), abs=1e-8)

    def test_pf_example_pf_ii(self, pf_example_plus):
        """Test the square-root identity with c = 1, k = 0 recovers the PF_COR rho"""
        pair, _ = pf_example_plus
        points = sampling.grid(pair, n=4)
        params = ClassParams.from_family(square_root_from_c6(0.0, 1.0, Sign.PLUS))
        general = verify.class_spray_residual(ClassId.PF_II, pair, params, points)
        special = verify.class_spray_residual(ClassId.PF_COR, pair, ClassParams(sign=Sign.PLUS), points)

        assert general.verdict is Verdict.PASS
        assert general.max_residual <= 1e-7
        for rho, expected in zip(general.recovered.rho, special.recovered.rho):
            assert rho == pytest.approx(expected, abs=1e-8)

    def test_section7_fails_pf_ii(self, section7_plus):
        """Test the Douglas rotation example has no PF_II spray identity"""
        pair, _ = section7_plus
        params = ClassParams.from_family(square_root_from_c6(0.0, 1.0, Sign.PLUS))
        report = verify.class_spray_residual(ClassId.PF_II, pair, params, sampling.grid(pair, n=5))

        assert report.verdict is Verdict.FAIL

    def test_section7_fails_pf_cor(self, section7_plus):
        """Test the Douglas rotation example is not projectively flat"""
        pair, family = section7_plus
        report = verify.class_spray_residual(
            ClassId.PF_COR, pair, ClassParams.from_family(family), sampling.grid(pair, n=5)
        )

        assert report.verdict is Verdict.FAIL

    def test_ex01_pf_iii(self, ex01):
        """Test the integer-power example satisfies its spray identity"""
        pair, family = ex01
        report = verify.class_spray_residual(
            ClassId.PF_III, pair, ClassParams.from_family(family), sampling.grid(pair, n=4)
        )

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-7

    def test_ex02_pf_iv(self):
        """Test the half-power example on a flat alpha"""
        pair, family = constructs.build_ex02(b=1.0, c=2.0, m=1)
        report = verify.class_spray_residual(
            ClassId.PF_IV, pair, ClassParams.from_family(family), sampling.grid(pair, n=4)
        )

        assert report.verdict is Verdict.PASS

    def test_douglas_class_has_no_spray_identity(self, section7_plus):
        """Test asking for a Douglas class spray is refused"""
        pair, family = section7_plus

        with pytest.raises(ConfigError):
            verify.class_spray_residual(ClassId.DOUGLAS_COR, pair, ClassParams(), [Point(0.2, 0.1)])


class TestProjectiveFactor:
    """Test closed-form projective factors against F_x y / (2F)"""

    def test_pf_example_formula(self, pf_example_plus):
        """Test the projective factor formula on the rotation example"""
        pair, family = pf_example_plus
        for y in sampling.unit_directions(6):
            comparison = verify.projective_factor_check(ClassId.PF_COR, pair, family, Point(0.2, -0.1), y)
            assert comparison.relative <= 1e-6

    def test_prerequisite_failure(self, section7_plus):
        """Test a failing spray identity blocks the formula"""
        pair, family = section7_plus

        with pytest.raises(PrerequisiteFailed):
            verify.projective_factor_check(ClassId.PF_COR, pair, family, Point(0.2, 0.1), Direction(1.0, 0.0))

    def test_report_counts_prerequisite_failures(self, section7_plus):
        """Test the report names the points where the identity failed"""
        pair, family = section7_plus
        points = [Point(0.2, 0.1), Point(-0.1, 0.3)]
        report = verify.projective_factor_report(
            ClassId.PF_COR, pair, family, ClassParams.from_family(family), points, n_directions=4
        )

        assert report.finding == "spray identity failed at 2 point(s)"
        assert report.verdict is Verdict.INCONCLUSIVE


class TestConformality:
    """Test r~ = lambda a~ after deformation"""

    def test_th2_round_trip(self):
        """Test deforming a constructed pair gives a conformal form"""
        f = HolomorphicPair(u=lambda x1, x2: x1, v=lambda x1, x2: x2, description="z")
        pair = constructs.build_th2(lambda x1, x2: 0.25, f, Sign.PLUS, Box(0.5, 1.5, 0.5, 1.5))
        deformed = constructs.deform_th2(pair, Sign.PLUS)
        report = verify.conformality_residual(deformed, ConformalityMode.THM2, sampling.grid(deformed, n=4))

        assert report.verdict is Verdict.PASS
        assert report.max_residual <= 1e-8

    def test_section7_deformation(self, section7_plus):
        """Test the deformed rotation example"""
        pair, _ = section7_plus
        deformed = constructs.deform_th2(pair, Sign.PLUS)
        report = verify.conformality_residual(deformed, ConformalityMode.THM2, sampling.grid(deformed, n=5))

        assert report.max_residual <= 1e-8

    def test_th001_rescaled(self):
        """Test the rescaled special triple is parallel, so closed with lambda = 0"""
        params = constructs.special_th001_params(0.3, 0.4, 0.0, 1.0, 0.0)
        pair = constructs.build_th001(params, Box(0.5, 1.5, 0.5, 1.5))
        rescaled = constructs.deform_th001(pair, ks=(0.0, 1.0, 0.0))
        report = verify.conformality_residual(rescaled, ConformalityMode.THM001, sampling.grid(rescaled, n=3))

        assert report.verdict is Verdict.PASS
        assert report.details["max_antisymmetric"] <= 1e-10
        assert all(abs(lam) < 1e-8 for lam in report.recovered.lam)

    def test_nonclosed_fails_th001(self, randers_nonclosed):
        """Test the antisymmetric part counts in the full-tensor mode"""
        report = verify.conformality_residual(
            randers_nonclosed, ConformalityMode.THM001, sampling.grid(randers_nonclosed, n=3)
        )

        assert report.verdict is Verdict.FAIL
        assert report.details["max_antisymmetric"] == pytest.approx(0.5)


class TestReportedScans:
    """Test scans that report a finding instead of a verdict"""

    def test_b_constancy(self, section7_plus, ex01):
        """Test |beta| = |x| varies while the normalized example is constant"""
        pair, _ = section7_plus
        assert verify.b_constancy_report(pair, sampling.grid(pair, n=4)).finding == "not constant"

        pair, _ = ex01
        report = verify.b_constancy_report(pair, sampling.grid(pair, n=4))
        assert report.finding == "constant"
        assert report.verdict is Verdict.REPORTED


class TestSampledChecks:
    """Test the spray agreement and projective-flatness reports"""

    def test_spray_agreement(self, section7_plus):
        """Test both spray formulas agree on seeded samples"""
        pair, family = section7_plus
        samples = sampling.random_samples(pair, 10, seed=11)
        report = verify.spray_agreement_report(pair, family, samples, seed=11)

        assert report.verdict is Verdict.PASS
        assert report.seed == 11

    def test_spray_agreement_skips_beyond_s_limit(self, ex01):
        """Test samples too close to |s| = b are skipped and counted"""
        pair, family = ex01
        samples = sampling.random_samples(pair, 20, seed=5)
        report = verify.spray_agreement_report(pair, family, samples, s_limit=0.5)

        assert report.details["skipped_s_limit"] > 0
        assert len(report.residuals) == 20 - report.details["skipped_s_limit"]

    def test_pf_condition(self, pf_example_plus, section7_plus):
        """Test the condition separates the two rotation examples"""
        pair, family = pf_example_plus
        assert verify.pf_condition_report(pair, family, sampling.grid(pair, n=4)).verdict is Verdict.PASS

        pair, family = section7_plus
        assert verify.pf_condition_report(pair, family, sampling.grid(pair, n=4)).verdict is Verdict.FAIL


class TestRegularityReport:
    """Test the regularity margin over a grid"""

    def test_quadratic_plus(self, section7_plus):
        """Test 1 + s^2 stays regular for b^2 = |x|^2 <= 0.32"""
        pair, family = section7_plus
        report = verify.regularity_report(pair, family, sampling.grid(pair, n=5))

        assert report.verdict is Verdict.PASS
        assert report.details["margin"] > 0
        assert report.details["radius"] == pytest.approx(1.0, abs=1e-6)

    def test_singular_family_clipped(self, ex01):
        """Test a family bounded by b is evaluated below its bound"""
        pair, family = ex01
        report = verify.regularity_report(pair, family, sampling.grid(pair, n=3))

        assert report.details["clipped_to"] == pytest.approx(0.8)


class TestGeodesicCheck:
    """Test geodesic straightness reports"""

    def test_closed_randers_straight(self, randers_closed, randers):
        """Test a projectively flat metric has straight traces"""
        F = finsler_function(randers_closed, randers)
        starts = [(Point(-0.2, 0.0), Direction(1.0, 0.2)), (Point(0.0, -0.2), Direction(0.1, 1.0))]
        report, traces = verify.geodesic_check(F, starts, randers_closed.domain, arclen=0.2, steps=64)

        assert report.verdict is Verdict.PASS
        assert len(traces) == 2
        assert report.details["max_endpoint_error"] < 1e-6

    def test_truncated_start_excluded(self, euclidean):
        """Test a trace leaving the box is excluded from the verdict"""
        F = riemannian_function(euclidean)
        starts = [(Point(0.0, 0.0), Direction(0.0, 1.0)), (Point(0.45, 0.0), Direction(1.0, 0.0))]
        report, traces = verify.geodesic_check(F, starts, euclidean.domain, arclen=0.2, steps=32)

        assert traces[1].truncated
        assert report.residuals[1] is None
        assert report.stats.excluded == 1

    def test_conformal_control_bends(self):
        """Test a non-flat conformal metric has curved geodesics"""
        pair, _ = constructs.section7_pair(Sign.PLUS)
        F = riemannian_function(pair)
        report, _ = verify.geodesic_check(
            F, [(Point(0.2, 0.0), Direction(0.0, 1.0))], pair.domain, arclen=0.3, steps=64
        )

        assert report.verdict is Verdict.FAIL
        assert math.isfinite(report.max_residual)
