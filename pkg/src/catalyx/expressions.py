"""Minimal closed-form expressions for initial data.

Grammar: numbers, the coordinates ``x`` and ``y``, constants ``pi`` and
``e``, the operators ``+ - * /`` and ``**``, and the functions ``pow``,
``sin``, ``cos`` and ``exp``. Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import ast
import math

import numpy as np

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "pow": np.power}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("x", "y")
_BINOPS = {
    ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
    ast.Div: np.divide, ast.Pow: np.power,
}


class ExpressionError(ValueError):
    pass


def _check(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExpressionError(f"unsupported literal {node.value!r}")
    elif isinstance(node, ast.Name):
        if node.id not in _VARS and node.id not in _CONSTS:
            raise ExpressionError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise ExpressionError("only unary + and - are allowed")
        _check(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
            raise ExpressionError("only sin, cos, exp and pow calls are allowed")
        want = 2 if node.func.id == "pow" else 1
        if len(node.args) != want:
            raise ExpressionError(f"{node.func.id} takes {want} argument(s)")
        for a in node.args:
            _check(a)
    else:
        raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


class Expression:
    def __init__(self, source: str):
        self.source = str(source)
        try:
            self._tree = ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from exc
        _check(self._tree)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        env = dict(_CONSTS)
        env["x"] = pts[:, 0]
        env["y"] = pts[:, 1] if pts.shape[1] > 1 else np.zeros(len(pts))
        out = _eval(self._tree.body, env)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(pts),)).copy()

    def __repr__(self):
        return f"Expression({self.source!r})"


def _eval(node, env):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        val = _eval(node.operand, env)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](*(_eval(a, env) for a in node.args))
    raise ExpressionError(f"unsupported syntax: {type(node).__name__}")
