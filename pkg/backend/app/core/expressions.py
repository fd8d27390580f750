"""
Field Expressions
Compiles inline formulas in x1, x2 into callables that accept floats or jets
"""
import ast
import logging
import math
from typing import Callable, Dict

from app.core import jets as jm
from app.core.exceptions import ExpressionError

logger = logging.getLogger(__name__)

ScalarFn = Callable[[object, object], object]


def _power(base, exponent):
    result = base ** exponent
    if isinstance(result, complex):
        raise ValueError("math domain error")
    return result


FUNCTIONS: Dict[str, Callable] = {
    "exp": jm.exp,
    "ln": jm.log,
    "log": jm.log,
    "sin": jm.sin,
    "cos": jm.cos,
    "sqrt": jm.sqrt,
    "pow": _power,
}

CONSTANTS: Dict[str, float] = {"pi": math.pi, "e": math.e}

VARIABLES = ("x1", "x2")

_BINARY = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: _power,
}


class _Compiler:
    def __init__(self, source: str, field: str):
        self.source = source
        self.field = field

    def fail(self, message: str) -> ExpressionError:
        return ExpressionError(self.field, f"{message} in '{self.source}'")

    def build(self, node: ast.AST) -> Callable[[Dict[str, object]], object]:
        if isinstance(node, ast.Expression):
            return self.build(node.body)

        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise self.fail(f"unsupported literal {node.value!r}")
            value = float(node.value) if isinstance(node.value, float) else node.value
            return lambda env: value

        if isinstance(node, ast.Name):
            name = node.id
            if name in VARIABLES:
                return lambda env: env[name]
            if name in CONSTANTS:
                value = CONSTANTS[name]
                return lambda env: value
            raise self.fail(f"unknown name '{name}'")

        if isinstance(node, ast.UnaryOp):
            operand = self.build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: -operand(env)
            if isinstance(node.op, ast.UAdd):
                return operand
            raise self.fail("unsupported unary operator")

        if isinstance(node, ast.BinOp):
            op = _BINARY.get(type(node.op))
            if op is None:
                raise self.fail(f"unsupported operator {type(node.op).__name__}")
            left, right = self.build(node.left), self.build(node.right)
            return lambda env: op(left(env), right(env))

        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise self.fail("unknown function")
            if node.keywords:
                raise self.fail("keyword arguments are not allowed")
            func = FUNCTIONS[node.func.id]
            expected = 2 if node.func.id == "pow" else 1
            if len(node.args) != expected:
                raise self.fail(f"{node.func.id} takes {expected} argument(s)")
            args = [self.build(a) for a in node.args]
            return lambda env: func(*(a(env) for a in args))

        raise self.fail(f"unsupported syntax {type(node).__name__}")


def compile_expression(source: str, field: str = "expression") -> ScalarFn:
    """
    Compile a formula over x1, x2

    Grammar: numbers, x1, x2, pi, e, + - * / ** (or pow), unary minus,
    exp, ln/log, sin, cos, sqrt.

    Raises:
        ExpressionError: syntax error or anything outside the grammar
    """
    if not isinstance(source, str) or not source.strip():
        raise ExpressionError(field, "empty expression")
    try:
        tree = ast.parse(source.strip().replace("^", "**"), mode="eval")
    except SyntaxError as e:
        raise ExpressionError(field, f"syntax error in '{source}': {e.msg}") from e

    body = _Compiler(source, field).build(tree)
    logger.debug(f"Compiled {field} = {source}")

    def fn(x1, x2):
        return body({"x1": x1, "x2": x2})

    fn.__doc__ = source
    return fn
