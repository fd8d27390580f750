"""
Domain Exceptions
Error types raised by the numeric layers and the config loader
"""
from typing import Optional


class ABFinslerError(Exception):
    """Base class for every error raised by the toolkit"""


class NumericalBlowup(ABFinslerError):
    """Raised when an evaluation produces a non-finite intermediate"""

    def __init__(self, what: str, detail: str = ""):
        self.what = what
        self.detail = detail
        message = f"Non-finite value while evaluating {what}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class DegenerateDirection(ABFinslerError):
    """Raised when a Finsler function is evaluated at y = 0"""

    def __init__(self, point):
        self.point = point
        super().__init__(f"Zero direction at {point}")


class DomainExit(ABFinslerError):
    """Raised when an evaluation leaves its admissible region"""

    def __init__(self, what: str, value: Optional[float] = None, bound: Optional[float] = None):
        self.what = what
        self.value = value
        self.bound = bound
        message = f"{what} outside admissible domain"
        if value is not None and bound is not None:
            message += f" ({value:.6g} vs bound {bound:.6g})"
        super().__init__(message)


class SingularMetric(ABFinslerError):
    """Raised when a_ij is singular or not positive definite"""

    def __init__(self, point, determinant: float):
        self.point = point
        self.determinant = determinant
        super().__init__(f"Riemannian metric singular at {point} (det={determinant:.3e})")


class DegenerateForm(ABFinslerError):
    """Raised when a 1-form constructor sees xi = eta = 0"""

    def __init__(self, point):
        self.point = point
        super().__init__(f"Degenerate 1-form direction at {point}")


class SingularODE(ABFinslerError):
    """Raised when the leading ODE coefficient vanishes on the integration path"""

    def __init__(self, s: float, coefficient: float):
        self.s = s
        self.coefficient = coefficient
        super().__init__(f"ODE leading coefficient {coefficient:.3e} vanishes near s={s:.6g}")


class RandersTypeDegenerate(ABFinslerError):
    """Raised by the Taylor map when 2*a4 + a2^2 = 0"""

    def __init__(self, a2: float, a4: float):
        self.a2 = a2
        self.a4 = a4
        super().__init__(
            f"Family is of Randers type: 2*a4 + a2^2 = {2 * a4 + a2 * a2:.3e}"
        )


class SprayFormulaSingular(ABFinslerError):
    """Raised when phi - s*phi' or Delta vanishes in the (alpha, beta) spray formula"""

    def __init__(self, quantity: str, value: float):
        self.quantity = quantity
        self.value = value
        super().__init__(f"Spray formula singular: {quantity} = {value:.3e}")


class SingularFundamentalTensor(ABFinslerError):
    """Raised when g_ij is not invertible"""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(f"Fundamental tensor singular (det={determinant:.3e})")


class NotPositive(ABFinslerError):
    """Raised when F(x, y) <= 0 where a positive value is required"""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Finsler function not positive: F = {value:.6g}")


class InsufficientSamples(ABFinslerError):
    """Raised when too few usable samples remain for a fit"""

    def __init__(self, usable: int, required: int):
        self.usable = usable
        self.required = required
        super().__init__(f"Only {usable} usable samples, need at least {required}")


class PrerequisiteFailed(ABFinslerError):
    """Raised when a check needs a passing prerequisite that did not pass"""

    def __init__(self, check: str, residual: float, tolerance: float):
        self.check = check
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Prerequisite {check} failed: residual {residual:.3e} > {tolerance:.1e}"
        )


class RangeViolation(ABFinslerError):
    """Raised when a parameter is outside the range a construction requires"""

    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f"{parameter}: {message}")


class ConstraintViolation(ABFinslerError):
    """Raised when construction parameters violate a required PDE system"""

    def __init__(self, constraint: str, residual: float, tolerance: float):
        self.constraint = constraint
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Constraint {constraint} violated: residual {residual:.3e} > {tolerance:.1e}"
        )


class ConfigError(ABFinslerError):
    """Raised for invalid run configurations; names the offending field"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ExpressionError(ConfigError):
    """Raised when an inline field formula cannot be compiled"""


class RankDeficient(ABFinslerError):
    """Raised when a pointwise least-squares fit cannot determine its unknowns"""

    def __init__(self, what: str, rank: int, unknowns: int):
        self.rank = rank
        self.unknowns = unknowns
        super().__init__(f"{what}: rank {rank} < {unknowns} unknowns")
