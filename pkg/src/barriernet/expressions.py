"""Closed-form field expressions used in config files.

Vocabulary: numbers, the coordinates ``x`` (and ``y`` in 2D), ``pi``, the
operators ``+ - * / **`` (``**`` only with a numeric exponent), and

``sin(e)``, ``cos(e)``, ``exp(e)``
    elementwise functions of a sub-expression.
``inv_pow(x0, gamma)`` / ``inv_pow(x0, y0, gamma)``
    ``|x - x0|**(-gamma)``; the distance is clipped from below at half the
    sampling spacing so that a node sitting on ``x0`` stays finite.
``bump(x0, w, A)`` / ``bump(x0, y0, w, A)``
    ``A`` times the unit-mass C-infinity bump of radius ``w`` centred at ``x0``;
    a "dirac-like" spike of mass ``A`` as ``w -> 0``.

Expressions are parsed once into a closure over numpy arrays; nothing is ever
passed to ``eval``.
"""

from __future__ import annotations

import ast
import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ConfigError

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
}
_UNARY = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def _std_bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_mass(dim):
    if dim == 1:
        val = 2 * integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    else:
        val = integrate.quad(lambda r: 2 * math.pi * r * math.exp(-1.0 / (1.0 - r * r)), 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    return val


class FieldExpr:
    """A parsed field expression; call with coordinate arrays."""

    def __init__(self, text, dim=1):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = repr(float(text))
        if not isinstance(text, str) or not text.strip():
            raise ConfigError(f"field expression must be a non-empty string, got {text!r}")
        self.text = text.strip()
        self.dim = dim
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"malformed expression {self.text!r}: {exc.msg}") from None
        self._fn = self._compile(tree.body)
        self.is_constant = not _uses_coords(tree.body)

    def __repr__(self):
        return f"FieldExpr({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, FieldExpr) and (self.text, self.dim) == (other.text, other.dim)

    def __hash__(self):
        return hash((self.text, self.dim))

    def __call__(self, *coords, clip=0.0):
        if len(coords) != self.dim:
            raise ValueError(f"expression is {self.dim}D, got {len(coords)} coordinate arrays")
        coords = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        out = self._fn(coords, clip)
        return np.broadcast_to(np.asarray(out, dtype=float), coords[0].shape).copy()

    def constant_value(self):
        if not self.is_constant:
            raise ValueError(f"{self.text!r} is not constant")
        return float(self._fn((np.zeros(1),) * self.dim, 0.0))

    # -- compilation ---------------------------------------------------
    def _err(self, node, what):
        raise ConfigError(f"{what} in expression {self.text!r} (column {getattr(node, 'col_offset', 0) + 1})")

    def _compile(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            v = float(node.value)
            return lambda c, clip: v
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return lambda c, clip: math.pi
            axes = {"x": 0, "y": 1}
            if node.id in axes and axes[node.id] < self.dim:
                k = axes[node.id]
                return lambda c, clip: c[k]
            self._err(node, f"unknown name {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            f = self._compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda c, clip: -f(c, clip)
            return f
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                p = self._literal(node.right)
                f = self._compile(node.left)
                return lambda c, clip: np.power(f(c, clip), p)
            op = _BINOPS.get(type(node.op))
            if op is None:
                self._err(node, "unsupported operator")
            f, g = self._compile(node.left), self._compile(node.right)
            return lambda c, clip: op(f(c, clip), g(c, clip))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            name = node.func.id
            if name in _UNARY:
                if len(node.args) != 1:
                    self._err(node, f"{name} takes one argument")
                f, fn = self._compile(node.args[0]), _UNARY[name]
                return lambda c, clip: fn(f(c, clip))
            if name == "inv_pow":
                return self._inv_pow(node)
            if name == "bump":
                return self._bump(node)
            self._err(node, f"unknown function {name!r}")
        self._err(node, "unsupported syntax")

    def _literal(self, node):
        try:
            val = ast.literal_eval(node)
        except ValueError:
            self._err(node, "expected a numeric literal")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self._err(node, "expected a numeric literal")
        return float(val)

    def _center_args(self, node, n_extra, name):
        if len(node.args) != self.dim + n_extra:
            self._err(node, f"{name} takes {self.dim + n_extra} numeric arguments in {self.dim}D")
        vals = [self._literal(a) for a in node.args]
        return vals[: self.dim], vals[self.dim :]

    def _inv_pow(self, node):
        center, (gamma,) = self._center_args(node, 1, "inv_pow")
        if gamma <= 0:
            self._err(node, "inv_pow exponent must be positive")

        def f(c, clip):
            r = np.sqrt(sum((ci - x0) ** 2 for ci, x0 in zip(c, center)))
            return np.maximum(r, clip) ** (-gamma)

        return f

    def _bump(self, node):
        center, (w, amp) = self._center_args(node, 2, "bump")
        if w <= 0:
            self._err(node, "bump width must be positive")
        scale = amp / (_bump_mass(self.dim) * w**self.dim)

        def f(c, clip):
            r = np.sqrt(sum((ci - x0) ** 2 for ci, x0 in zip(c, center)))
            return scale * _std_bump(r / w)

        return f


def _uses_coords(node):
    # inv_pow and bump read the coordinates implicitly
    return any(
        (isinstance(n, ast.Name) and n.id in ("x", "y"))
        or (isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id in ("inv_pow", "bump"))
        for n in ast.walk(node)
    )


def as_expr(value, dim=1) -> FieldExpr:
    if isinstance(value, FieldExpr):
        return value
    return FieldExpr(value, dim)


def sample(expr, grid):
    """Sample an expression on all nodes of ``grid`` (clip distance ``min(h) / 2``)."""
    from .grid import DiscreteField

    expr = as_expr(expr, grid.dim)
    vals = expr(*grid.mesh, clip=0.5 * min(grid.h))
    return DiscreteField(grid, vals, expr=expr)
