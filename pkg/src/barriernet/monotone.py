"""Monotone sub/super-solution iteration.

Starting from the constant sub-solution ``u_0 = alpha`` each step solves

    (L + M) u_j = M u_{j-1} - sum_i b_i u_{j-1}**n_i,     u_j = rho on the boundary,

with ``M`` at least the Lipschitz constant of the nonlinearity on
``[alpha, beta]``.  The discrete maximum principle then makes ``u_j``
nondecreasing and trapped in ``[alpha, beta]``; both facts are checked at
every step rather than enforced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .barriers import Barriers, LaurentSum
from .elliptic import ShiftedSolver, verify_maximum_principle
from .errors import ConfigError, DomainError, IterationIntegrityError, PreconditionError
from .grid import DiscreteField
from .problem import RegularizedProblem

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class IterationConfig:
    """Stopping rule and integrity tolerances.

    Iteration stops once ``max |u_j - u_{j-1}| < tol_sup``.  ``direction="down"``
    starts from ``beta`` instead (diagnostic mode).
    """

    tol_sup: float = 1e-10
    max_iter: int = 20000
    slack: float = 1e-10
    direction: str = "up"

    def __post_init__(self):
        if not self.tol_sup > 0:
            raise ConfigError("tol_sup must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.slack < 0:
            raise ConfigError("slack must be nonnegative")
        if self.direction not in ("up", "down"):
            raise ConfigError(f"direction must be 'up' or 'down', got {self.direction!r}")


@dataclass
class IterationTrace:
    """Per-iteration diagnostics of one monotone run."""

    M: float
    direction: str = "up"
    update_sup: list = field(default_factory=list)
    residual_sup: list = field(default_factory=list)
    u_min: list = field(default_factory=list)
    u_max: list = field(default_factory=list)
    violation: list = field(default_factory=list)
    verdict: str = ""

    @property
    def iterations(self) -> int:
        return len(self.update_sup)

    @property
    def final_residual(self) -> float:
        return self.residual_sup[-1] if self.residual_sup else float("nan")

    @property
    def max_violation(self) -> float:
        return max(self.violation, default=0.0)

    def as_rows(self):
        return list(zip(range(1, self.iterations + 1), self.update_sup, self.residual_sup, self.u_min, self.u_max, self.violation))


def lipschitz_shift(lsum: LaurentSum, alpha: float, beta: float) -> float:
    """Upper bound on ``|d/dt sum_i b_i t**n_i|`` over ``t`` in ``[alpha, beta]``.

    ``sum_i max(|sup b_i|, |inf b_i|) |n_i| max(alpha**(n_i - 1), beta**(n_i - 1))``;
    ``t**(n - 1)`` is monotone on ``(0, inf)``, so the endpoints suffice.

    >>> lipschitz_shift(LaurentSum.constant([(5, 1), (-7, -1)]), 0.5, 2.0)
    1872.0
    """
    if not alpha > 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    if beta < alpha:
        raise PreconditionError(f"need alpha <= beta, got [{alpha}, {beta}]")
    total = 0.0
    for t in lsum.terms:
        if t.n == 0:
            continue
        k = t.n - 1
        total += t.magnitude * abs(t.n) * max(alpha**k, beta**k)
    return float(total)


def semilinear_residual(problem: RegularizedProblem, u) -> float:
    """``max |L u + sum_i b_i u**n_i|`` over interior nodes."""
    vals = u.values if isinstance(u, DiscreteField) else np.asarray(u, dtype=float)
    if np.any(vals <= 0):
        raise DomainError(f"u must be positive at every node (min {vals.min():.3g})")
    return float(np.max(np.abs(_residual_vector(problem, vals))))


def _residual_vector(problem, vals):
    grid = problem.grid
    return problem.op.apply(vals) + problem.nonlinearity(vals)[grid.interior].ravel()


def check_barriers(problem: RegularizedProblem, barriers: Barriers, tol: float = 0.0):
    """Raise unless ``(alpha, beta)`` satisfy the constant sub/super inequalities and bracket ``rho``."""
    alpha, beta = barriers.alpha, barriers.beta
    if not 0 < alpha <= beta:
        raise PreconditionError(f"barriers must satisfy 0 < alpha <= beta, got ({alpha}, {beta})")
    lsum = problem.lsum
    gs, gi = float(lsum.g_sup(alpha)), float(lsum.g_inf(beta))
    if gs > tol * max(1.0, abs(gs)):
        raise PreconditionError(f"alpha = {alpha:g} is not a sub-solution: G_sup(alpha) = {gs:.3g} > 0")
    if gi < -tol * max(1.0, abs(gi)):
        raise PreconditionError(f"beta = {beta:g} is not a super-solution: G_inf(beta) = {gi:.3g} < 0")
    trace = problem.rho.boundary
    if trace.min() < alpha or trace.max() > beta:
        raise PreconditionError("boundary data leaves [alpha, beta]")


def monotone_solve(problem: RegularizedProblem, barriers: Barriers, cfg: IterationConfig | None = None, M: float | None = None):
    """Run the monotone iteration; returns ``(u, trace)``.

    Raises :class:`IterationIntegrityError` when an iterate decreases (or, going
    down, increases) by more than ``cfg.slack`` or leaves
    ``[alpha - slack, beta + slack]``.  Running out of iterations is not an
    error: the trace verdict is then ``"max_iter"``.
    """
    cfg = cfg or IterationConfig()
    check_barriers(problem, barriers)
    alpha, beta = barriers.alpha, barriers.beta
    if M is None:
        M = lipschitz_shift(problem.lsum, alpha, beta)
    mp = verify_maximum_principle(problem.op, M, trials=0)
    if not mp.sign_pattern_ok:
        raise PreconditionError("shifted operator is not an M-matrix; the maximum principle is not available")

    grid = problem.grid
    solver = ShiftedSolver(problem.op, M, "banded" if grid.dim == 1 else "direct")
    bc = problem.rho.values
    sign = 1.0 if cfg.direction == "up" else -1.0
    u = np.full(grid.shape, alpha if sign > 0 else beta)
    trace = IterationTrace(M=M, direction=cfg.direction)
    for _ in range(cfg.max_iter):
        rhs = (M * u - problem.nonlinearity(u))[grid.interior]
        new = solver.solve(rhs, bc).values
        step = new - u
        violation = max(0.0, float(-sign * step.min() if sign > 0 else step.max()))
        lo, hi = float(new.min()), float(new.max())
        trace.update_sup.append(float(np.max(np.abs(step))))
        trace.u_min.append(lo)
        trace.u_max.append(hi)
        trace.violation.append(violation)
        u = new
        trace.residual_sup.append(float(np.max(np.abs(_residual_vector(problem, u)))) if lo > 0 else float("inf"))
        if violation > cfg.slack:
            raise IterationIntegrityError(f"monotonicity violated by {violation:.3e} at iteration {trace.iterations}")
        if lo < alpha - cfg.slack or hi > beta + cfg.slack:
            raise IterationIntegrityError(
                f"iterate left [alpha, beta] = [{alpha:g}, {beta:g}]: range [{lo:.12g}, {hi:.12g}]"
            )
        if trace.update_sup[-1] < cfg.tol_sup:
            trace.verdict = CONVERGED
            break
    else:
        trace.verdict = MAX_ITER
        log.warning("monotone iteration hit max_iter=%d (last update %.3e)", cfg.max_iter, trace.update_sup[-1])
    return DiscreteField(grid, u), trace


@dataclass(frozen=True)
class SweepComparison:
    upward: DiscreteField
    downward: DiscreteField
    difference: float
    tolerance: float

    @property
    def possibly_nonunique(self) -> bool:
        return self.difference > self.tolerance


def compare_sweeps(problem: RegularizedProblem, barriers: Barriers, cfg: IterationConfig | None = None) -> SweepComparison:
    """Run the iteration from ``alpha`` and from ``beta``; a gap above ``100 tol`` flags possible non-uniqueness."""
    cfg = cfg or IterationConfig()
    up, _ = monotone_solve(problem, barriers, IterationConfig(cfg.tol_sup, cfg.max_iter, cfg.slack, "up"))
    down, _ = monotone_solve(problem, barriers, IterationConfig(cfg.tol_sup, cfg.max_iter, cfg.slack, "down"))
    diff = float(np.max(np.abs(up.values - down.values)))
    return SweepComparison(up, down, diff, 100 * cfg.tol_sup)
