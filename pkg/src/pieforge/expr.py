"""Safe numeric expressions in one variable, e.g. ``"sin(10*t)/(10*t + 1e-5)"``.

Expressions are parsed with :mod:`ast` and only arithmetic, a fixed set of
numpy functions, the constants ``pi`` and ``e`` and a single free variable
are accepted.  ``^`` is read as a power.
"""
from __future__ import annotations

import ast
import operator

import numpy as np

__all__ = ["ExprError", "compile_expr"]

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "tanh": np.tanh, "sinh": np.sinh, "cosh": np.cosh, "abs": np.abs,
    "arctan": np.arctan, "heaviside": lambda x: np.heaviside(x, 1.0),
}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


class ExprError(ValueError):
    """Malformed or disallowed expression."""


def _check(node, var):
    if isinstance(node, ast.Expression):
        return _check(node.body, var)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return
    if isinstance(node, ast.Name):
        if node.id != var and node.id not in _CONSTS:
            raise ExprError(f"unknown name {node.id!r} at column {node.col_offset}")
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left, var)
        _check(node.right, var)
        return
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        _check(node.operand, var)
        return
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and len(node.args) == 1 and not node.keywords:
        _check(node.args[0], var)
        return
    raise ExprError(f"disallowed syntax {type(node).__name__} at column {getattr(node, 'col_offset', 0)}")


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else _CONSTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNOPS[type(node.op)](_eval(node.operand, env))
    return _FUNCS[node.func.id](_eval(node.args[0], env))


def compile_expr(text, var: str = "t"):
    """Return a vectorized callable ``f(var_values)`` for ``text``.

    Numbers are accepted too and give constant functions.
    """
    if isinstance(text, (int, float)) or hasattr(text, "numerator"):
        value = float(text)
        return lambda x: np.full(np.shape(x), value) if np.ndim(x) else value
    try:
        tree = ast.parse(str(text).replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from exc
    _check(tree, var)

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = _eval(tree, {var: x})
        return np.broadcast_to(out, x.shape).astype(float) if np.ndim(x) else float(out)

    fn.source = text
    return fn
