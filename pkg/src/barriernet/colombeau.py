"""Diagnostics for nets ``(u_eps)``: discrete Hoelder norms, growth/decay fits and representative checks.

A net is *moderate* when its seminorms grow at most polynomially in ``1/eps``
and *null* when they decay faster than every power of ``eps``.  Neither can be
decided from finitely many samples; here both are certified on a geometric
``eps`` ladder only, and null-ness only up to a finite order ``q_target``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, PreconditionError
from .grid import DiscreteField

MODERATE = "moderate"
NOT_MODERATE = "not-moderate"
INCONCLUSIVE = "inconclusive"
NULL = "null"
NOT_NULL = "not-null"

FIT_RMS_TOL = 0.2
PAIR_LIMIT = 4096


@dataclass(frozen=True)
class EpsSchedule:
    """Geometric ladder ``eps_0 * ratio**k`` for ``k < count``."""

    eps_0: float = 0.5
    ratio: float = 0.5
    count: int = 8

    def __post_init__(self):
        if not self.eps_0 > 0:
            raise ConfigError(f"eps_0 must be positive, got {self.eps_0}")
        if not 0 < self.ratio < 1:
            raise ConfigError(f"ratio must lie in (0, 1), got {self.ratio}")
        if int(self.count) != self.count or self.count < 4:
            raise ConfigError(f"a growth fit needs at least 4 ladder points, got count = {self.count}")

    @property
    def values(self) -> np.ndarray:
        return self.eps_0 * self.ratio ** np.arange(self.count)

    def __iter__(self):
        return iter(self.values.tolist())

    def __len__(self):
        return int(self.count)

    def unresolved(self, h) -> list[float]:
        """Ladder entries below the grid spacing ``h``."""
        return [e for e in self if e < h]


# -- Hoelder norms -------------------------------------------------------


def derivative_fields(fld: DiscreteField, k: int) -> list[np.ndarray]:
    """All ``k``-th order finite-difference partials (second-order ``np.gradient``, one-sided at edges)."""
    if k not in (0, 1, 2):
        raise PreconditionError(f"only k in (0, 1, 2) is supported, got {k}")
    grid = fld.grid
    if min(grid.shape) < 3 * max(k, 1):
        raise PreconditionError("grid too coarse for the requested differences")
    level = [np.asarray(fld.values, dtype=float)]
    for _ in range(k):
        nxt = []
        for arr in level:
            g = np.gradient(arr, *grid.h, edge_order=2)
            nxt.extend(g if grid.dim > 1 else [g])
        level = nxt
    if k == 2 and grid.dim == 2:
        level = [level[0], level[1], level[3]]  # d_xy == d_yx up to roundoff
    return level


def _pair_points(grid):
    pts = np.stack([m.ravel() for m in grid.mesh], axis=1)
    stride = max(1, math.ceil(pts.shape[0] / PAIR_LIMIT))
    return pts, stride


def _pair_sup(vals, pts, gamma, stride):
    """``sup |v_i - v_j| / |x_i - x_j|**gamma`` over (subsampled) node pairs."""
    sel = np.arange(0, vals.size, stride)
    v = vals.ravel()[sel]
    x = pts[sel]
    best = 0.0
    for start in range(0, v.size, 512):
        vi, xi = v[start : start + 512, None], x[start : start + 512, None, :]
        d = np.sqrt(np.sum((xi - x[None, :, :]) ** 2, axis=-1))
        num = np.abs(vi - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d > 0, num / d**gamma, 0.0)
        best = max(best, float(q.max()))
    return best


def holder_seminorm(fld: DiscreteField, k: int, gamma: float) -> float:
    """``[D^k u]_gamma``: max over ``k``-th partials of the discrete Hoelder quotient.

    Above 4096 nodes, pairs are taken on every ``ceil(N / 4096)``-th node in
    row-major order.
    """
    if not 0 < gamma < 1:
        raise PreconditionError(f"gamma must lie in (0, 1), got {gamma}")
    pts, stride = _pair_points(fld.grid)
    return max(_pair_sup(d, pts, gamma, stride) for d in derivative_fields(fld, k))


def sup_derivative(fld: DiscreteField, k: int) -> float:
    return max(float(np.max(np.abs(d))) for d in derivative_fields(fld, k))


def holder_norm(fld: DiscreteField, k: int, gamma: float) -> float:
    """``|u|_{k,gamma} = sum_{j <= k} sup |D^j u| + [D^k u]_gamma``."""
    return sum(sup_derivative(fld, j) for j in range(k + 1)) + holder_seminorm(fld, k, gamma)


def discrete_holder_seminorm(fld: DiscreteField, k: int, gamma: float) -> float:
    return holder_seminorm(fld, k, gamma)


# -- growth and decay fits -------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    """Log-log fit of a net of nonnegative numbers against ``eps``.

    ``slope`` is the fitted exponent ``a`` in ``value ~ C eps**a``; a
    null-decay report calls the same number the decay ``order``.  Infinite
    slope means every value (or the value at the smallest ``eps``) was zero.
    """

    name: str
    eps: tuple
    values: tuple
    slope: float
    intercept: float
    fit_residual: float
    verdict: str
    q_target: float | None = None
    notes: tuple = field(default=())

    @property
    def order(self) -> float:
        return self.slope

    @property
    def moderate(self) -> bool:
        return self.verdict in (MODERATE, NULL)

    @property
    def certified_null(self) -> bool:
        return self.verdict == NULL


def _prepare(schedule, values, floor):
    eps = np.asarray(list(schedule), dtype=float)
    vals = np.asarray(values, dtype=float)
    if vals.shape != eps.shape:
        raise ConfigError(f"need one value per ladder entry ({eps.size}), got {vals.size}")
    if np.any(~np.isfinite(vals)):
        raise DomainError("net values must be finite")
    if np.any(vals < 0):
        raise DomainError(f"net values must be nonnegative (min {vals.min():.3g})")
    vals = np.where(vals <= floor, 0.0, vals)
    return eps, vals


def _loglog(eps, vals):
    lx, ly = np.log(eps), np.log(vals)
    slope, intercept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), float(intercept), rms


def _superpolynomial(eps, vals):
    """Local log-log slopes strictly decreasing with total drift above 1 (e.g. ``exp(1/eps)``)."""
    if vals.size < 3 or np.any(vals <= 0):
        return False
    local = np.diff(np.log(vals)) / np.diff(np.log(eps))
    return bool(np.all(np.diff(local) < 0) and local[0] - local[-1] > 1.0)


def _decelerating(eps, vals):
    """Local log-log slopes no steeper over the small-``eps`` half than over the large-``eps`` half."""
    if vals.size < 4 or np.any(vals <= 0):
        return False
    local = np.diff(np.log(vals)) / np.diff(np.log(eps))
    half = local.size // 2
    return bool(local[-half:].mean() >= local[:half].mean())


def growth_fit(schedule, values, name="", floor=0.0) -> GrowthReport:
    """Least-squares exponent of ``values`` against ``eps`` and a moderateness verdict.

    * ``not-moderate`` when local slopes keep falling (super-polynomial growth);
    * ``moderate`` when the log-log RMS residual is ``<= 0.2``, the net is
      bounded (nothing exceeds 10 times the value at the largest ``eps``), or
      growth decelerates, so ``C eps**s`` with the steepest local slope ``s``
      dominates the whole ladder;
    * ``null`` when every value is zero (at or below ``floor``);
    * ``inconclusive`` otherwise.
    """
    eps, vals = _prepare(schedule, values, floor)
    tup = (tuple(eps.tolist()), tuple(vals.tolist()))
    if np.all(vals == 0):
        return GrowthReport(name, *tup, math.inf, -math.inf, 0.0, NULL, notes=("identically zero net",))
    pos = vals > 0
    if pos.sum() < 2:
        return GrowthReport(name, *tup, math.nan, math.nan, math.nan, MODERATE, notes=("fewer than two nonzero values",))
    slope, icpt, rms = _loglog(eps[pos], vals[pos])
    notes = []
    if not pos.all():
        notes.append("zeros excluded from the fit")
    if _superpolynomial(eps, vals):
        verdict = NOT_MODERATE
        notes.append("local slopes decrease without settling")
    elif rms <= FIT_RMS_TOL or vals.max() <= 10 * max(vals[0], np.finfo(float).tiny):
        verdict = MODERATE
    elif _decelerating(eps, vals):
        verdict = MODERATE
        notes.append("growth decelerates toward small eps")
    else:
        verdict = INCONCLUSIVE
    return GrowthReport(name, *tup, slope, icpt, rms, verdict, notes=tuple(notes))


def null_decay_check(schedule, values, q_target=3.0, name="", floor=0.0) -> GrowthReport:
    """Certify ``values = O(eps**q_target)`` on the ladder.

    Values at or below ``floor`` count as exact zeros; a net that is zero at the
    smallest ``eps`` (or everywhere) is null to every order.
    """
    eps, vals = _prepare(schedule, values, floor)
    tup = (tuple(eps.tolist()), tuple(vals.tolist()))
    if vals[-1] == 0:
        note = "identically zero net" if np.all(vals == 0) else f"zero below eps = {eps[np.nonzero(vals)[0][-1]]:g}"
        return GrowthReport(name, *tup, math.inf, -math.inf, 0.0, NULL, q_target, (note, f"certified to order {q_target} on the ladder only"))
    pos = vals > 0
    if pos.sum() < 2:
        return GrowthReport(name, *tup, math.nan, math.nan, math.nan, NOT_NULL, q_target, ("too few nonzero values",))
    slope, icpt, rms = _loglog(eps[pos], vals[pos])
    verdict = NULL if slope >= q_target else NOT_NULL
    return GrowthReport(name, *tup, slope, icpt, rms, verdict, q_target, (f"certified to order {q_target} on the ladder only",))


# -- Schauder ratio --------------------------------------------------------


def schauder_ratio(problem, u: DiscreteField, gamma=0.5, residual_threshold=1e-6) -> float:
    """``(|Du|_0 + |D^2 u|_0 + [D^2 u]_gamma) / ((Lambda / lambda)**3 (|u|_0 + |rho|_{2,gamma} + |f|_{0,gamma}))``.

    ``f = -sum_i b_i u**n_i`` is the right-hand side at the solution,
    ``lambda = min a`` and ``Lambda = max(|a|_{0,gamma}, |Da|_{0,gamma})``.  Only the
    derivative part of ``|u|_{2,gamma}`` enters the numerator, so constant
    solutions give 0.  Refused (:class:`PreconditionError`) when ``u`` is not a
    discrete solution to within ``residual_threshold``.
    """
    from .monotone import semilinear_residual

    res = semilinear_residual(problem, u)
    if res > residual_threshold:
        raise PreconditionError(f"u does not solve the problem (residual {res:.3e} > {residual_threshold:.1e})")
    grid = problem.grid
    num = sup_derivative(u, 1) + sup_derivative(u, 2) + holder_seminorm(u, 2, gamma)
    a = problem.a
    lam = a.min()
    Lam = max([holder_norm(a, 0, gamma)] + [holder_norm(DiscreteField(grid, d), 0, gamma) for d in derivative_fields(a, 1)])
    f = DiscreteField(grid, -problem.nonlinearity(u.values))
    den = (Lam / lam) ** 3 * (u.sup() + holder_norm(problem.rho, 2, gamma) + holder_norm(f, 0, gamma))
    return float(num / den)


# -- representative independence ------------------------------------------


@dataclass(frozen=True)
class IndependenceReport:
    solution: GrowthReport
    boundary: GrowthReport
    q_target: float
    same_moment_order: bool = True

    @property
    def certified_order(self) -> float:
        return min(self.solution.order, self.boundary.order)

    @property
    def independent(self) -> bool:
        return self.solution.certified_null and self.boundary.certified_null

    @property
    def representative_sensitive(self) -> bool:
        return not self.independent


def representative_independence(spec, mollifier_a, mollifier_b, schedule, cfg=None, q_target=3.0, extension="natural"):
    """Solve the net with two mollifiers and certify the difference null to order ``q_target``.

    Mollifiers of different moment order are accepted; the report then
    carries ``same_moment_order=False`` and is expected to come out
    representative-sensitive.

    Checks ``max |u^A_eps - u^B_eps|`` and the boundary-trace difference of the
    regularized data.  Solution differences below ``100 tol_sup`` count as
    zero (the iteration is only converged to ``tol_sup``); trace differences
    below ``1e-10 (1 + |rho|)`` count as zero (kernel-sum roundoff).  Ladder
    entries below the grid spacing are skipped: there both kernels collapse
    towards the identity and their difference says nothing.
    """
    from .barriers import compute_barriers
    from .monotone import IterationConfig, monotone_solve
    from .problem import regularize_problem

    cfg = cfg or IterationConfig()
    h = max(spec.grid.h)
    ladder = [e for e in schedule if e >= h]
    if len(ladder) < 3:
        raise ConfigError(f"need at least 3 ladder entries with eps >= h = {h:g}, got {len(ladder)}")
    sol_diff, bnd_diff, scale = [], [], 0.0
    for eps in ladder:
        us, traces = [], []
        for mol in (mollifier_a, mollifier_b):
            prob = regularize_problem(spec, mol, eps, extension)
            u, _ = monotone_solve(prob, compute_barriers(prob.lsum, prob.rho), cfg)
            us.append(u.values)
            traces.append(prob.rho.boundary)
            scale = max(scale, float(np.max(np.abs(prob.rho.boundary))))
        sol_diff.append(float(np.max(np.abs(us[0] - us[1]))))
        bnd_diff.append(float(np.max(np.abs(traces[0] - traces[1]))))
    sol = null_decay_check(ladder, sol_diff, q_target, "solution difference", floor=100 * cfg.tol_sup)
    bnd = null_decay_check(ladder, bnd_diff, q_target, "boundary difference", floor=1e-10 * (1 + scale))
    return IndependenceReport(sol, bnd, q_target, mollifier_a.K == mollifier_b.K)
