"""Semilinear Dirichlet problems ``-div(a grad u) + sum_i b_i u**n_i = 0``, ``u = rho`` on the boundary.

:class:`ProblemSpec` holds the symbolic data; :func:`regularize_problem` turns
it into a :class:`RegularizedProblem` at one mollification scale ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .barriers import LaurentSum, LaurentTerm
from .errors import ConfigError, ContractError
from .expressions import FieldExpr, as_expr, sample
from .grid import DiscreteField, Grid, SparseOperator, assemble_operator
from .mollify import ExtensionMethod, Mollifier, regularize

# padded node count above which a regularization is refused (2D vanishing-moment kernels get huge)
MAX_PADDED_NODES = 20_000_000


@dataclass(frozen=True)
class ProblemSpec:
    """Symbolic problem data on a grid.

    ``terms`` is a sequence of ``(exponent, coefficient expression)`` pairs.
    """

    grid: Grid
    a: FieldExpr
    rho: FieldExpr
    terms: tuple

    @classmethod
    def build(cls, grid, a, rho, terms):
        a = as_expr(a, grid.dim)
        rho = as_expr(rho, grid.dim)
        pairs = tuple((int(n), as_expr(b, grid.dim)) for n, b in terms)
        exps = [n for n, _ in pairs]
        if len(set(exps)) != len(exps):
            raise ConfigError(f"exponents must be distinct, got {exps}")
        if not pairs:
            raise ConfigError("at least one nonlinearity term is required")
        return cls(grid, a, rho, tuple(sorted(pairs, key=lambda p: p[0])))

    @property
    def exponents(self):
        return [n for n, _ in self.terms]


@dataclass(frozen=True, eq=False)
class RegularizedProblem:
    """One ``eps``-instance of a problem: sampled fields, envelopes and the assembled operator."""

    eps: float | None
    grid: Grid
    a: DiscreteField
    rho: DiscreteField
    coeffs: tuple
    lsum: LaurentSum
    op: SparseOperator = field(repr=False)

    @property
    def exponents(self):
        return self.lsum.exponents

    @property
    def ellipticity(self) -> float:
        """``lambda = min a`` over nodes."""
        return self.a.min()

    @property
    def coefficient_bound(self) -> float:
        """``Lambda``: largest sup-norm among the nonlinearity coefficients."""
        return max(t.magnitude for t in self.lsum.terms)

    @cached_property
    def coeff_arrays(self):
        return tuple(t.coefficient.values for t in self.lsum.terms)

    def nonlinearity(self, u) -> np.ndarray:
        """``sum_i b_i u**n_i`` at every node of a full nodal array ``u``."""
        return self.lsum.evaluate_field(self.coeff_arrays, np.asarray(u, dtype=float))


def _regularized(expr, grid, mollifier, eps, extension):
    base = sample(expr, grid)
    if mollifier is None or eps is None or expr.is_constant:
        # constants are reproduced exactly by any unit-mass kernel
        return base
    reach = [mollifier.reach(hh, eps) for hh in grid.h]
    padded = int(np.prod([s + 2 * r for s, r in zip(grid.shape, reach)]))
    if padded > MAX_PADDED_NODES:
        raise ContractError(
            f"kernel reach {reach} nodes needs a {padded}-node padded grid; use a positive-bump kernel or smaller eps"
        )
    return regularize(base, mollifier, eps, extension)


def regularize_problem(
    spec: ProblemSpec,
    mollifier: Mollifier | None,
    eps: float | None,
    extension: str | ExtensionMethod = "natural",
    check_ellipticity: bool = True,
) -> RegularizedProblem:
    """Sample and mollify all fields of ``spec`` at scale ``eps``.

    With ``mollifier=None`` (or ``eps=None``) the fields are sampled directly,
    which is the continuous-coefficient path.  Envelopes of each coefficient
    are taken over every grid node, boundary included.
    """
    grid = spec.grid
    a = _regularized(spec.a, grid, mollifier, eps, extension)
    rho = _regularized(spec.rho, grid, mollifier, eps, extension)
    coeffs = tuple(_regularized(b, grid, mollifier, eps, extension) for _, b in spec.terms)
    lsum = LaurentSum([LaurentTerm.from_field(n, c) for (n, _), c in zip(spec.terms, coeffs)])
    op = assemble_operator(grid, a, check_ellipticity=check_ellipticity)
    return RegularizedProblem(eps, grid, a, rho, coeffs, lsum, op)
