"""A tiny arithmetic grammar evaluated on numpy arrays.

Used for angular kernels (variables ``theta``, ``phi``) and for sampled test
functions such as ``log(r)`` or ``r <= 1`` (variables ``x``, ``y``, ``z``,
``x1``, ``x2``, ``x3``, ``r``).  Only the node types listed below are accepted,
so config files can never execute arbitrary code.
"""
import ast
import operator

import numpy as np

FUNCTIONS = {
    "cos": np.cos,
    "sin": np.sin,
    "tan": np.tan,
    "sign": np.sign,
    "abs": np.abs,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "min": np.minimum,
    "max": np.maximum,
}
CONSTANTS = {"pi": np.pi, "e": np.e}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: np.power,
    ast.Mod: np.mod,
}
_CMPOPS = {
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
    ast.Eq: np.equal,
    ast.NotEq: np.not_equal,
}


class ExpressionError(ValueError):
    pass


class Expression:
    """Parsed, validated expression; call with keyword arrays."""

    def __init__(self, text: str, variables):
        self.text = text.strip()
        self.variables = frozenset(variables)
        try:
            self._tree = ast.parse(self.text, mode="eval").body
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
        self._check(self._tree)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ExpressionError(f"unsupported literal {node.value!r}")
        elif isinstance(node, ast.Name):
            if node.id not in self.variables and node.id not in CONSTANTS:
                raise ExpressionError(f"unknown name {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd, ast.Not)):
                raise ExpressionError("unary operator not allowed")
            self._check(node.operand)
        elif isinstance(node, ast.Compare):
            if any(type(op) not in _CMPOPS for op in node.ops):
                raise ExpressionError("comparison not allowed")
            self._check(node.left)
            for c in node.comparators:
                self._check(c)
        elif isinstance(node, ast.BoolOp):
            for v in node.values:
                self._check(v)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS or node.keywords:
                raise ExpressionError(f"call not allowed in {self.text!r}")
            for a in node.args:
                self._check(a)
        else:
            raise ExpressionError(f"syntax {type(node).__name__} not allowed in {self.text!r}")

    def __call__(self, **env):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._eval(self._tree, env)
        return np.asarray(out, dtype=float)

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else CONSTANTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.Not):
                return np.logical_not(v).astype(float)
            return v
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, env)
            result = True
            for op, comp in zip(node.ops, node.comparators):
                right = self._eval(comp, env)
                result = np.logical_and(result, _CMPOPS[type(op)](left, right))
                left = right
            return np.asarray(result, dtype=float)
        if isinstance(node, ast.BoolOp):
            vals = [np.asarray(self._eval(v, env)) != 0 for v in node.values]
            fn = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
            acc = vals[0]
            for v in vals[1:]:
                acc = fn(acc, v)
            return acc.astype(float)
        if isinstance(node, ast.Call):
            return FUNCTIONS[node.func.id](*[self._eval(a, env) for a in node.args])
        raise ExpressionError("unreachable")  # pragma: no cover

    def __repr__(self):
        return f"Expression({self.text!r})"


SPATIAL_VARIABLES = ("x", "y", "z", "x1", "x2", "x3", "r")


def spatial_env(coords):
    """Variable bindings for an expression sampled on grid coordinates."""
    env = {f"x{i + 1}": c for i, c in enumerate(coords)}
    for name, c in zip(("x", "y", "z"), coords):
        env[name] = c
    env["r"] = np.sqrt(sum(c * c for c in coords))
    return env
