"""The eps-net driver and the critical-exponent convergence study.

:func:`validate_conditions` checks the sign hypotheses on the regularized
coefficients at every ladder point; :func:`run_sweep` then runs, per ``eps``,
regularize -> barriers -> growth bounds -> monotone solve -> diagnostics, and
fits the growth of the solution norms across the net.  Rows are computed
independently (optionally in threads) and always assembled in ladder order.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .barriers import Barriers, closed_form_growth_bounds, compute_barriers, critical_exponent_beta
from .colombeau import growth_fit, holder_norm, schauder_ratio
from .errors import BarrierNetError, HypothesisViolation, PreconditionError
from .expressions import as_expr
from .grid import build_grid
from .mollify import POSITIVE_BUMP, make_mollifier
from .monotone import CONVERGED, lipschitz_shift, monotone_solve, semilinear_residual
from .problem import ProblemSpec, regularize_problem

log = logging.getLogger(__name__)

ELLIPTICITY = "ellipticity (a > 0)"
LOW_NEGATIVITY = "b^1 negativity (sup b^1 < 0)"
TOP_POSITIVITY = "b^K positivity (inf b^K > 0)"
BOUNDARY_POSITIVITY = "boundary positivity (inf rho > 0)"
FAIL_FRACTION = 0.2


class PartialNetWarning(UserWarning):
    """Sign hypotheses fail for the largest ``eps`` only; rows above ``eps_0`` are skipped."""


@dataclass(frozen=True)
class NetConditions:
    """Envelope quantities per ladder point and their fitted growth exponents."""

    eps: tuple
    ellipticity: tuple
    coefficient_bound: tuple
    sup_lowest: tuple
    inf_highest: tuple
    inf_rho: tuple
    failures: tuple  # per eps: tuple of failed condition names
    exponents: dict = field(default_factory=dict)
    eps_0: float | None = None

    @property
    def passed(self) -> bool:
        return not any(self.failures)

    @property
    def usable_eps(self) -> tuple:
        if self.eps_0 is None:
            return self.eps if self.passed else ()
        return tuple(e for e in self.eps if e <= self.eps_0)


def _conditions_at(spec, mollifier, eps, extension):
    prob = regularize_problem(spec, mollifier, eps, extension, check_ellipticity=False)
    lsum = prob.lsum
    lam = prob.ellipticity
    fails = []
    if lam <= 0:
        fails.append(ELLIPTICITY)
    low, top = lsum.lowest, lsum.highest
    sup_low = low.sup_env if low.n < 0 else math.nan
    inf_top = top.inf_env if top.n > 0 else math.nan
    if not sup_low < 0:
        fails.append(LOW_NEGATIVITY)
    if not inf_top > 0:
        fails.append(TOP_POSITIVITY)
    inf_rho = float(prob.rho.boundary.min())
    if inf_rho <= 0:
        fails.append(BOUNDARY_POSITIVITY)
    return (lam, prob.coefficient_bound, sup_low, inf_top, inf_rho), tuple(fails)


def validate_conditions(spec: ProblemSpec, mollifier, schedule, extension="natural") -> NetConditions:
    """Check ``min a > 0``, ``sup b^1 < 0``, ``inf b^K > 0`` and ``inf rho > 0`` at every ``eps``.

    Failures confined to the largest ``eps`` values are tolerated: the largest
    ``eps_0`` below which everything holds is reported and a
    :class:`PartialNetWarning` issued.  Failure at every ``eps``, or at an
    ``eps`` below a passing one, raises :class:`HypothesisViolation` naming the
    first failed condition.
    """
    eps_list = list(schedule)
    vals, fails = [], []
    for eps in eps_list:
        v, f = _conditions_at(spec, mollifier, eps, extension)
        vals.append(v)
        fails.append(f)
    cols = list(zip(*vals))
    bad = [i for i, f in enumerate(fails) if f]
    eps_0 = None
    if bad:
        first = next(f for f in fails if f)[0]
        if len(bad) == len(eps_list):
            raise HypothesisViolation(first, f"{first} fails at every eps in the ladder")
        if bad != list(range(len(bad))):
            late = fails[bad[-1]][0]
            raise HypothesisViolation(late, f"{late} fails at eps = {eps_list[bad[-1]]:g}, below a passing eps")
        eps_0 = eps_list[len(bad)]
        warnings.warn(f"{first} fails for eps > {eps_0:g}; using eps <= {eps_0:g} only", PartialNetWarning, stacklevel=2)
    keep = [i for i in range(len(eps_list)) if not fails[i]]
    exps = {}
    if len(keep) >= 2:
        e = [eps_list[i] for i in keep]
        names = ("ellipticity", "coefficient_bound", "sup_lowest", "inf_highest", "inf_rho")
        for name, col in zip(names, cols):
            mags = np.abs([col[i] for i in keep])
            exps[name] = growth_fit(e, mags, name).slope if np.all(mags > 0) else math.nan
    return NetConditions(
        tuple(eps_list), *(tuple(float(x) for x in c) for c in cols), tuple(fails), exps, eps_0
    )


# -- sweep -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    eps: float
    status: str
    alpha: float = math.nan
    beta: float = math.nan
    alpha_prime: float = math.nan
    beta_prime: float = math.nan
    alpha_lower: float = math.nan
    beta_upper: float = math.nan
    c_beta: float = math.nan
    M: float = math.nan
    iters: int = 0
    residual: float = math.nan
    u_min: float = math.nan
    u_max: float = math.nan
    holder_k0: float = math.nan
    holder_k1g: float = math.nan
    holder_k2g: float = math.nan
    schauder_ratio: float = math.nan
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == CONVERGED


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    growth: tuple  # GrowthReport per norm
    conditions: NetConditions | None
    verdict: str
    solutions: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def failed_fraction(self) -> float:
        return sum(not r.ok for r in self.rows) / max(1, len(self.rows))


def _sweep_row(spec, mollifier, eps, cfg, keep_solution):
    stage = "regularize"
    try:
        prob = regularize_problem(spec, mollifier, eps, cfg.mollifier.extension)
        stage = "barriers"
        bar = compute_barriers(prob.lsum, prob.rho)
        gb = closed_form_growth_bounds(prob.lsum, prob.coefficient_bound)
        stage = "solve"
        u, trace = monotone_solve(prob, bar, cfg.iteration)
        res = semilinear_residual(prob, u)
        stage = "diagnostics"
        gamma = cfg.diagnostics.gamma
        k0 = u.sup()
        k1 = holder_norm(u, 1, gamma)
        k2 = holder_norm(u, 2, gamma)
        threshold = max(cfg.diagnostics.schauder_threshold, 20 * cfg.iteration.tol_sup * trace.M)
        try:
            ratio = schauder_ratio(prob, u, gamma, threshold)
        except PreconditionError:
            ratio = math.nan
        row = SweepRow(
            eps, trace.verdict, bar.alpha, bar.beta, bar.alpha_prime, bar.beta_prime,
            gb.alpha_lower, gb.beta_upper, gb.c_beta, trace.M, trace.iterations, res,
            u.min(), u.max(), k0, k1, k2, ratio, "; ".join(bar.flags),
        )
        return row, (u if keep_solution else None)
    except BarrierNetError as exc:
        log.warning("eps=%g failed at %s: %s", eps, stage, exc)
        return SweepRow(eps, f"failed:{stage}", message=str(exc)), None


def run_sweep(config, threads: int = 1, keep_solutions: bool = False) -> SweepReport:
    """Run the full eps-net for a :class:`~barriernet.config.RunConfig`.

    Row order and content do not depend on ``threads``.  The global verdict is
    ``inconclusive`` when more than 20% of rows fail, otherwise ``moderate``
    if every norm fit is moderate and ``not-moderate`` / ``inconclusive``
    according to the worst fit.
    """
    spec = config.problem_spec()
    mollifier = config.mollifier.build()
    conditions = validate_conditions(spec, mollifier, config.schedule, config.mollifier.extension)
    eps_list = list(conditions.usable_eps)
    work = lambda e: _sweep_row(spec, mollifier, e, config, keep_solutions)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, eps_list))
    else:
        results = [work(e) for e in eps_list]
    rows = tuple(r for r, _ in results)
    sols = {r.eps: u for r, u in results if u is not None}

    ok = [r for r in rows if r.ok]
    growth = []
    if len(ok) >= 2:
        e = [r.eps for r in ok]
        for name in ("holder_k0", "holder_k1g", "holder_k2g"):
            growth.append(growth_fit(e, [getattr(r, name) for r in ok], name))
        ratios = [r.schauder_ratio for r in ok]
        if all(np.isfinite(ratios)):
            growth.append(growth_fit(e, ratios, "schauder_ratio"))
    fail_frac = sum(not r.ok for r in rows) / max(1, len(rows))
    norm_fits = [g for g in growth if g.name.startswith("holder")]
    if fail_frac > FAIL_FRACTION or not norm_fits:
        verdict = "inconclusive"
    elif all(g.moderate for g in norm_fits):
        verdict = "moderate"
    elif any(g.verdict == "not-moderate" for g in norm_fits):
        verdict = "not-moderate"
    else:
        verdict = "inconclusive"
    return SweepReport(rows, tuple(growth), conditions, verdict, sols)


def solve_single(config, eps=None):
    """One instance: regularized at ``eps``, or sampled directly when ``eps`` is None."""
    spec = config.problem_spec()
    mollifier = config.mollifier.build() if eps is not None else None
    prob = regularize_problem(spec, mollifier, eps, config.mollifier.extension)
    bar = compute_barriers(prob.lsum, prob.rho)
    u, trace = monotone_solve(prob, bar, config.iteration)
    return prob, bar, u, trace


# -- critical exponent study -------------------------------------------------


@dataclass(frozen=True)
class CriticalRow:
    j: int
    eps: float
    alpha: float
    beta_prime: float
    beta: float
    M: float
    iters: int
    residual: float
    status: str
    h1_diff_next: float = math.nan


@dataclass(frozen=True)
class CriticalReport:
    rows: tuple
    beta: float
    differences: tuple
    target_ratio: float = 0.1

    @property
    def decreasing(self) -> bool:
        d = np.asarray(self.differences)
        return bool(d.size >= 2 and np.all(np.diff(d) < 0))

    @property
    def contraction(self) -> float:
        return self.differences[-1] / self.differences[0] if self.differences and self.differences[0] > 0 else 0.0

    @property
    def beta_bounded(self) -> bool:
        return all(r.beta <= self.beta for r in self.rows)

    @property
    def cauchy_evidence(self) -> bool:
        if self.differences and max(self.differences) == 0:
            return True
        return self.decreasing and self.contraction <= self.target_ratio


def h1_norm(v, h) -> float:
    """Discrete ``sqrt(h sum v**2 + h sum (dv/h)**2)`` of a 1D nodal array."""
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(h * np.sum(v**2) + h * np.sum((np.diff(v) / h) ** 2)))


def critical_exponent_study(crit, tol_sup=1e-10, max_iter=20000, threads=1) -> CriticalReport:
    """Solve ``-u'' + a_n u**m + b_n u**i = 0`` for a mollified ladder ``eps = 2**-j``.

    ``a_n, b_n, rho_n`` are positive-bump regularizations.  Per ``n`` the
    barriers are ``alpha_n = min((-sup b_n / sup a_n)**(1/(m-i)), min rho_n)``
    and ``beta_n = max((-inf b_n / inf a_n)**(1/(m-i)), max rho_n)``; the
    reference ``beta`` uses the raw samples over every node any kernel
    touches, so ``beta_n <= beta`` holds by averaging.
    """
    from .monotone import IterationConfig

    m, i = crit.m, crit.i
    if m < 5 or not 1 <= i <= 4:
        raise PreconditionError(f"need m >= 5 and 1 <= i <= 4, got m = {m}, i = {i}")
    grid = build_grid(1, list(crit.extents), crit.n)
    mol = make_mollifier(POSITIVE_BUMP, 0)
    a_expr, b_expr, rho_expr = as_expr(crit.a), as_expr(crit.b), as_expr(crit.rho)
    js = list(range(crit.j_min, crit.j_max + 1))
    widest = grid.padded(mol.reach(grid.h[0], 2.0 ** -js[0]))
    clip = 0.5 * grid.h[0]
    a_raw = a_expr(*widest.mesh, clip=clip)
    b_raw = b_expr(*widest.mesh, clip=clip)
    rho_raw = rho_expr(*widest.mesh, clip=clip)
    if a_raw.min() <= 0 or b_raw.max() >= 0 or rho_raw.min() <= 0:
        raise PreconditionError("need inf a > 0, sup b < 0 and inf rho > 0")
    beta = critical_exponent_beta(a_raw.min(), b_raw.min(), m, i, rho_raw.max())
    spec = ProblemSpec.build(grid, 1.0, crit.rho, [(i, crit.b), (m, crit.a)])
    cfg = IterationConfig(tol_sup, max_iter)

    def one(j):
        eps = 2.0**-j
        prob = regularize_problem(spec, mol, eps, "natural")
        b_n = prob.lsum.terms[0]
        a_n = prob.lsum.terms[1]
        rho_b = prob.rho.boundary
        beta_p = (-b_n.inf_env / a_n.inf_env) ** (1.0 / (m - i))
        beta_n = max(beta_p, float(rho_b.max()))
        alpha_n = min((-b_n.sup_env / a_n.sup_env) ** (1.0 / (m - i)), float(rho_b.min()))
        # nudge outward by 1e-12 so roundoff cannot flip the sub/super inequalities
        bar = Barriers(alpha_n, beta_p, alpha_n * (1 - 1e-12), beta_n * (1 + 1e-12), float(rho_b.min()), float(rho_b.max()))
        M = lipschitz_shift(prob.lsum, bar.alpha, bar.beta)
        u, trace = monotone_solve(prob, bar, cfg, M=M)
        row = CriticalRow(j, eps, alpha_n, beta_p, beta_n, M, trace.iterations, trace.final_residual, trace.verdict)
        return row, u.values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, js))
    else:
        results = [one(j) for j in js]
    h = grid.h[0]
    diffs = tuple(h1_norm(results[k + 1][1] - results[k][1], h) for k in range(len(results) - 1))
    rows = []
    for k, (row, _) in enumerate(results):
        d = diffs[k] if k < len(diffs) else math.nan
        rows.append(CriticalRow(**{**row.__dict__, "h1_diff_next": d}))
    return CriticalReport(tuple(rows), beta, diffs)
