"""
Forward-Mode Jets
Second-order multivariate jets and truncated univariate Taylor series
"""
import math
from numbers import Integral, Real
from typing import Callable, Iterable

import numpy as np


class Jet:
    """
    Value, gradient and Hessian of a scalar carried through arithmetic

    A Jet over n variables is the second-order truncation of a Taylor
    expansion. Products and compositions follow the product and chain
    rules, so evaluating any closed-form expression on Jet inputs
    yields its first and second partials exact to roundoff.
    """

    __slots__ = ("value", "grad", "hess")
    __array_ufunc__ = None

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet":
        """Independent variable number `index` out of n"""
        grad = np.zeros(n)
        grad[index] = 1.0
        return cls(value, grad, np.zeros((n, n)))

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet":
        return cls(value, np.zeros(n), np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def apply(self, f0: float, f1: float, f2: float) -> "Jet":
        """Compose with a scalar function given its value and first two derivatives"""
        g = self.grad
        return Jet(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.value)
            and bool(np.all(np.isfinite(self.grad)))
            and bool(np.all(np.isfinite(self.hess)))
        )

    # Arithmetic

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        if isinstance(other, Real):
            return Jet(self.value + other, self.grad, self.hess)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value - other.value, self.grad - other.grad, self.hess - other.hess)
        if isinstance(other, Real):
            return Jet(self.value - other, self.grad, self.hess)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Real):
            return Jet(other - self.value, -self.grad, -self.hess)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            cross = np.outer(a.grad, b.grad)
            return Jet(
                a.value * b.value,
                a.value * b.grad + b.value * a.grad,
                a.value * b.hess + b.value * a.hess + cross + cross.T,
            )
        if isinstance(other, Real):
            return Jet(self.value * other, self.grad * other, self.hess * other)
        return NotImplemented

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("jet division by zero")
        return self.apply(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if isinstance(other, Real):
            if other == 0:
                raise ZeroDivisionError("jet division by zero")
            return Jet(self.value / other, self.grad / other, self.hess / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Real):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, power):
        if isinstance(power, Jet):
            return exp(power * log(self))
        if isinstance(power, Integral) or (isinstance(power, float) and power.is_integer()):
            p = int(power)
            if p >= 0:
                return _int_power(self, p, Jet.constant(1.0, self.n))
            return _int_power(self, -p, Jet.constant(1.0, self.n)).reciprocal()
        v = self.value
        if v <= 0.0:
            raise ValueError("math domain error")
        p = float(power)
        return self.apply(v ** p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))

    def __rpow__(self, base):
        if isinstance(base, Real):
            return exp(self * math.log(base))
        return NotImplemented

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, grad={self.grad.tolist()!r})"


class TaylorSeries:
    """
    Univariate Taylor polynomial truncated at a fixed order

    Coefficients are c[k] = f^(k)(s0)/k!. Used to extract phi^(i)(0)/i!
    exactly from closed forms, quadratures and the ODE family.
    """

    __slots__ = ("coefficients",)
    __array_ufunc__ = None

    def __init__(self, coefficients: Iterable[float]):
        self.coefficients = np.asarray(list(coefficients), dtype=float)

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1

    @classmethod
    def variable(cls, s0: float = 0.0, order: int = 6) -> "TaylorSeries":
        c = np.zeros(order + 1)
        c[0] = s0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value: float, order: int = 6) -> "TaylorSeries":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @property
    def value(self) -> float:
        return float(self.coefficients[0])

    def __getitem__(self, k: int) -> float:
        return float(self.coefficients[k])

    def _like(self, other) -> "TaylorSeries":
        if isinstance(other, TaylorSeries):
            return other
        return TaylorSeries.constant(float(other), self.order)

    def __add__(self, other):
        if isinstance(other, (TaylorSeries, Real)):
            return TaylorSeries(self.coefficients + self._like(other).coefficients)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return TaylorSeries(-self.coefficients)

    def __sub__(self, other):
        if isinstance(other, (TaylorSeries, Real)):
            return TaylorSeries(self.coefficients - self._like(other).coefficients)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Real):
            return TaylorSeries(self._like(other).coefficients - self.coefficients)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Real):
            return TaylorSeries(self.coefficients * other)
        if isinstance(other, TaylorSeries):
            n = self.order + 1
            return TaylorSeries(np.convolve(self.coefficients, other.coefficients)[:n])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            return TaylorSeries(self.coefficients / other)
        if not isinstance(other, TaylorSeries):
            return NotImplemented
        a, b = self.coefficients, other.coefficients
        if b[0] == 0.0:
            raise ZeroDivisionError("series division by zero")
        c = np.zeros_like(a)
        for n in range(len(a)):
            c[n] = (a[n] - np.dot(b[1:n + 1], c[n - 1::-1][:n])) / b[0]
        return TaylorSeries(c)

    def __rtruediv__(self, other):
        if isinstance(other, Real):
            return self._like(other) / self
        return NotImplemented

    def __pow__(self, power):
        if isinstance(power, Integral) or (isinstance(power, float) and power.is_integer()):
            p = int(power)
            if p >= 0:
                return _int_power(self, p, TaylorSeries.constant(1.0, self.order))
            return 1.0 / _int_power(self, -p, TaylorSeries.constant(1.0, self.order))
        a = self.coefficients
        if a[0] <= 0.0:
            raise ValueError("math domain error")
        p = float(power)
        b = np.zeros_like(a)
        b[0] = a[0] ** p
        for n in range(1, len(a)):
            k = np.arange(1, n + 1)
            b[n] = np.sum(((p + 1.0) * k - n) * a[k] * b[n - k]) / (n * a[0])
        return TaylorSeries(b)

    def derivative(self) -> "TaylorSeries":
        c = self.coefficients
        d = np.zeros_like(c)
        d[:-1] = c[1:] * np.arange(1, len(c))
        return TaylorSeries(d)

    def integral(self) -> "TaylorSeries":
        """Antiderivative vanishing at the expansion point, truncated to the same order"""
        c = self.coefficients
        d = np.zeros_like(c)
        d[1:] = c[:-1] / np.arange(1, len(c))
        return TaylorSeries(d)

    def __repr__(self) -> str:
        return f"TaylorSeries({self.coefficients.tolist()!r})"


def _int_power(x, p: int, one):
    result = one
    base = x
    while p:
        if p & 1:
            result = result * base
        p >>= 1
        if p:
            base = base * base
    return result


def _series_exp(a: np.ndarray) -> np.ndarray:
    b = np.zeros_like(a)
    b[0] = math.exp(a[0])
    for n in range(1, len(a)):
        k = np.arange(1, n + 1)
        b[n] = np.sum(k * a[k] * b[n - k]) / n
    return b


def _series_log(a: np.ndarray) -> np.ndarray:
    if a[0] <= 0.0:
        raise ValueError("math domain error")
    b = np.zeros_like(a)
    b[0] = math.log(a[0])
    for n in range(1, len(a)):
        k = np.arange(1, n)
        b[n] = (a[n] - np.sum(k * b[k] * a[n - k]) / n) / a[0]
    return b


def _series_sincos(a: np.ndarray):
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0], c[0] = math.sin(a[0]), math.cos(a[0])
    for n in range(1, len(a)):
        k = np.arange(1, n + 1)
        s[n] = np.sum(k * a[k] * c[n - k]) / n
        c[n] = -np.sum(k * a[k] * s[n - k]) / n
    return s, c


# Elementary functions dispatching on float, Jet and TaylorSeries


def exp(x):
    if isinstance(x, Jet):
        e = math.exp(x.value)
        return x.apply(e, e, e)
    if isinstance(x, TaylorSeries):
        return TaylorSeries(_series_exp(x.coefficients))
    return math.exp(x)


def log(x):
    if isinstance(x, Jet):
        v = x.value
        if v <= 0.0:
            raise ValueError("math domain error")
        return x.apply(math.log(v), 1.0 / v, -1.0 / (v * v))
    if isinstance(x, TaylorSeries):
        return TaylorSeries(_series_log(x.coefficients))
    return math.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        v = x.value
        if v <= 0.0:
            raise ValueError("math domain error")
        r = math.sqrt(v)
        return x.apply(r, 0.5 / r, -0.25 / (r * v))
    if isinstance(x, TaylorSeries):
        return x ** 0.5
    return math.sqrt(x)


def sin(x):
    if isinstance(x, Jet):
        s, c = math.sin(x.value), math.cos(x.value)
        return x.apply(s, c, -s)
    if isinstance(x, TaylorSeries):
        return TaylorSeries(_series_sincos(x.coefficients)[0])
    return math.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = math.sin(x.value), math.cos(x.value)
        return x.apply(c, -s, -c)
    if isinstance(x, TaylorSeries):
        return TaylorSeries(_series_sincos(x.coefficients)[1])
    return math.cos(x)


def value_of(x) -> float:
    """Plain float value of a float, Jet or TaylorSeries"""
    if isinstance(x, (Jet, TaylorSeries)):
        return x.value
    return float(x)


def lift(x, n: int) -> Jet:
    """Promote a constant to a Jet over n variables"""
    if isinstance(x, Jet):
        return x
    return Jet.constant(float(x), n)


def compose(x, f: Callable[[float], float], df: Callable[[float], float], d2f: Callable[[float], float]):
    """Apply a univariate function known through its first two derivatives"""
    if isinstance(x, Jet):
        v = x.value
        return x.apply(f(v), df(v), d2f(v))
    return f(float(x))
