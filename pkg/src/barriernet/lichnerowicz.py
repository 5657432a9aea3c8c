"""Constant-mean-curvature Hamiltonian constraint written as a Laurent-sum problem.

In local coordinates the conformal factor ``phi`` solves

    -div(a grad phi) + (R/8) phi + (tau^2/12) phi^5 - sigma^2 phi^-7 - 2 kappa rho_m phi^-3 = 0.

The Laplacian keeps unit weight, i.e. the equation is taken in the form where
the usual factor 8 in front of the conformal Laplacian has been divided out
and absorbed into the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, HypothesisViolation
from .expressions import FieldExpr, as_expr
from .grid import Grid
from .problem import ProblemSpec

TOP_POSITIVITY = "b^K positivity fails"
LOW_NEGATIVITY = "b^1 negativity fails"


@dataclass(frozen=True)
class HamiltonianData:
    """Physical constraint data; field entries are expression strings or numbers."""

    R: object = 0.0
    tau2: float = 12.0
    sigma2: object = 1.0
    rho_m: object = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.tau2) or self.tau2 < 0:
            raise ConfigError(f"tau2 must be a nonnegative constant, got {self.tau2}")
        if not self.kappa > 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")


def _text(value):
    return value.text if isinstance(value, FieldExpr) else str(value)


def _is_zero(expr):
    return expr.is_constant and expr.constant_value() == 0.0


def assemble_hamiltonian(data: HamiltonianData, grid: Grid, a=1.0, rho=1.0) -> ProblemSpec:
    """Build the problem with terms ``(5, tau2/12)``, ``(1, R/8)``, ``(-3, -2 kappa rho_m)``, ``(-7, -sigma2)``.

    Terms with identically zero coefficient are dropped.  Sign hypotheses are
    checked on the raw grid samples: ``tau2 > 0`` and ``min sigma2 > 0``
    (:class:`HypothesisViolation` otherwise), and ``rho_m >= 0``.

    >>> from barriernet.grid import build_grid
    >>> spec = assemble_hamiltonian(HamiltonianData(), build_grid(1, [0, 1], 9))
    >>> spec.exponents
    [-7, 5]
    """
    if data.tau2 <= 0:
        raise HypothesisViolation(TOP_POSITIVITY, f"{TOP_POSITIVITY}: tau^2 = {data.tau2} (maximal slice) gives no phi^5 term")
    dim = grid.dim
    candidates = [
        (5, f"({float(data.tau2)!r}) / 12"),
        (1, f"({_text(data.R)}) / 8"),
        (-3, f"-2 * ({float(data.kappa)!r}) * ({_text(data.rho_m)})"),
        (-7, f"-({_text(data.sigma2)})"),
    ]
    terms = []
    for n, text in candidates:
        expr = as_expr(text, dim)
        if not _is_zero(expr):
            terms.append((n, expr))

    mesh = grid.mesh
    clip = 0.5 * min(grid.h)
    sigma2 = as_expr(_text(data.sigma2), dim)(*mesh, clip=clip)
    if sigma2.min() <= 0:
        raise HypothesisViolation(LOW_NEGATIVITY, f"{LOW_NEGATIVITY}: min sigma^2 = {sigma2.min():.3g} on the grid")
    rho_m = as_expr(_text(data.rho_m), dim)(*mesh, clip=clip)
    if rho_m.min() < 0:
        raise HypothesisViolation("matter density nonnegativity", f"rho_m must be nonnegative (min {rho_m.min():.3g})")
    return ProblemSpec.build(grid, a, rho, terms)
