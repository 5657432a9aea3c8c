"""Constant sub/super-solution barriers for Laurent power-sum nonlinearities.

For ``F(x, y) = sum_i b_i(x) y**n_i`` the envelope sums

    G_sup(y) = sum_i sup(b_i) y**n_i,        G_inf(y) = sum_i inf(b_i) y**n_i

bound ``F`` from above and below.  A constant ``alpha`` with ``G_sup(alpha) <= 0``
is a sub-solution, a constant ``beta`` with ``G_inf(beta) >= 0`` a
super-solution.  ``alpha_prime`` is the first positive zero of ``G_sup`` and
``beta_prime`` the last positive zero of ``G_inf``.

Zeros are bracketed on a fine geometric scan (ratio ``2**(1/64)``) and then
refined by geometric bisection to relative width ``1e-12``.  Brackets are
resolved toward the conservative side: the returned ``alpha_prime`` has
``G_sup < 0`` and the returned ``beta_prime`` has ``G_inf > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketError, ConfigError, PreconditionError

SCAN_RATIO = 2.0 ** (1 / 64)
SCAN_LO, SCAN_FLOOR, SCAN_HI = 1e-8, 1e-12, 1e12
REL_TOL = 1e-12


@dataclass(frozen=True)
class LaurentTerm:
    """One term ``b(x) y**n`` summarized by the envelopes of ``b`` over grid nodes."""

    n: int
    sup_env: float
    inf_env: float
    coefficient: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n:
            raise ConfigError(f"exponents must be integers, got {self.n}")
        if not (np.isfinite(self.sup_env) and np.isfinite(self.inf_env)):
            raise ConfigError("coefficient envelopes must be finite")
        if self.inf_env > self.sup_env:
            raise ConfigError(f"inf envelope {self.inf_env} exceeds sup envelope {self.sup_env}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def constant(cls, n, b):
        return cls(n, float(b), float(b))

    @classmethod
    def from_field(cls, n, fld):
        """Envelopes over every node of ``fld`` (boundary included)."""
        return cls(n, fld.max(), fld.min(), fld)

    @property
    def magnitude(self) -> float:
        return max(abs(self.sup_env), abs(self.inf_env))


class LaurentSum:
    """A finite sum of :class:`LaurentTerm` with distinct exponents, kept sorted by exponent."""

    def __init__(self, terms):
        terms = sorted(terms, key=lambda t: t.n)
        if not terms:
            raise ConfigError("a Laurent sum needs at least one term")
        exps = [t.n for t in terms]
        if len(set(exps)) != len(exps):
            raise ConfigError(f"exponents must be distinct, got {exps}")
        self.terms = tuple(terms)

    @classmethod
    def constant(cls, pairs):
        """``[(n, b), ...]`` with constant coefficients."""
        return cls([LaurentTerm.constant(n, b) for n, b in pairs])

    def __repr__(self):
        body = ", ".join(f"({t.n}, [{t.inf_env:g}, {t.sup_env:g}])" for t in self.terms)
        return f"LaurentSum({body})"

    def __len__(self):
        return len(self.terms)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([t.n for t in self.terms])

    @property
    def sup_envs(self) -> np.ndarray:
        return np.array([t.sup_env for t in self.terms])

    @property
    def inf_envs(self) -> np.ndarray:
        return np.array([t.inf_env for t in self.terms])

    @property
    def C1(self) -> int:
        return int(np.sum(self.exponents >= 0))

    @property
    def C2(self) -> int:
        return int(np.sum(self.exponents < 0))

    @property
    def lowest(self) -> LaurentTerm:
        return self.terms[0]

    @property
    def highest(self) -> LaurentTerm:
        return self.terms[-1]

    @property
    def n_i1(self):
        """Largest exponent ``0 <= n < n_K``, or None."""
        cand = [t.n for t in self.terms[:-1] if t.n >= 0]
        return max(cand) if cand else None

    @property
    def n_i2(self):
        """Second-smallest negative exponent, or None."""
        neg = [t.n for t in self.terms if t.n < 0]
        return neg[1] if len(neg) > 1 else None

    def lower_violations(self) -> list[str]:
        """Why ``G_sup`` might fail to tend to ``-inf`` at ``0+``."""
        if self.C2 < 1:
            return ["no negative exponent"]
        if self.lowest.sup_env >= 0:
            return ["sup of the lowest-exponent coefficient must be negative"]
        return []

    def upper_violations(self) -> list[str]:
        """Why ``G_inf`` might fail to tend to ``+inf`` at infinity."""
        if self.highest.n <= 0:
            return ["no positive exponent"]
        if self.highest.inf_env <= 0:
            return ["inf of the highest-exponent coefficient must be positive"]
        return []

    def case1_violations(self) -> list[str]:
        return self.lower_violations() + self.upper_violations()

    def check_case1(self, which="both"):
        bad = {
            "lower": self.lower_violations,
            "upper": self.upper_violations,
            "both": self.case1_violations,
        }[which]()
        if bad:
            raise PreconditionError("case (1) sign structure fails: " + "; ".join(bad))

    def g_sup(self, y):
        return _evaluate(self.exponents, self.sup_envs, y)

    def g_inf(self, y):
        return _evaluate(self.exponents, self.inf_envs, y)

    def evaluate_field(self, coeffs, u):
        """Pointwise ``sum_i b_i(x) u**n_i`` for coefficient arrays matching ``u``."""
        out = np.zeros_like(u, dtype=float)
        for t, b in zip(self.terms, coeffs):
            out += b * u ** float(t.n)
        return out


def _evaluate(exps, coefs, y):
    """Plain evaluation of ``sum c y**n`` (any real y; negative powers need y != 0)."""
    y = np.asarray(y, dtype=float)
    return sum(c * y ** float(n) for n, c in zip(exps, coefs) if c != 0.0) + 0.0 * y


def _log_sign(exps, coefs, y):
    """Sign of ``sum c y**n`` for ``y > 0`` without overflow.

    Each term is ``sign(c) exp(log|c| + n log y)``; terms are rescaled by the
    largest log-magnitude before summing.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    keep = coefs != 0
    exps, coefs = exps[keep], coefs[keep]
    if exps.size == 0:
        return np.zeros(y.shape)
    logs = np.log(np.abs(coefs))[:, None] + exps[:, None] * np.log(y)[None, :]
    top = logs.max(axis=0)
    total = np.sum(np.sign(coefs)[:, None] * np.exp(logs - top), axis=0)
    return np.sign(total)


def _scan_grid(lo=SCAN_LO, hi=SCAN_HI):
    steps = int(math.ceil(math.log(hi / lo) / math.log(SCAN_RATIO)))
    return lo * SCAN_RATIO ** np.arange(steps + 1)


def _bisect(sign_fn, lo, hi, want_lo_sign):
    """Shrink ``[lo, hi]`` keeping ``sign_fn(lo) == want_lo_sign`` and ``sign_fn(hi) != want_lo_sign``.

    Returns ``(lo, hi, exact)``, where ``exact`` is the point at which the sign
    evaluated to exactly zero (or None).
    """
    exact = None
    for _ in range(400):
        if hi / lo - 1.0 <= REL_TOL:
            break
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        s = sign_fn(mid)
        if s == 0:
            exact = mid
        if s == want_lo_sign:
            lo = mid
        else:
            hi = mid
    return lo, hi, exact


def _snap(sign_fn, lo, hi):
    """A short decimal in ``[lo, hi]`` at which the sign is exactly zero, or None."""
    mid = math.sqrt(lo * hi)
    for digits in range(1, 13):
        c = float(f"{mid:.{digits}g}")
        if lo <= c <= hi and sign_fn(c) == 0:
            return c
    return None


@dataclass(frozen=True)
class RootResult:
    value: float
    bracket: tuple[float, float]
    exact_zero: bool


def first_positive_zero(lsum: LaurentSum, env="sup") -> RootResult:
    exps = lsum.exponents
    coefs = lsum.sup_envs if env == "sup" else lsum.inf_envs
    sgn = lambda y: float(_log_sign(exps, coefs, y)[0])  # noqa: E731
    ys = _scan_grid()
    s = _log_sign(exps, coefs, ys)
    if s[0] >= 0:
        deeper = _scan_grid(SCAN_FLOOR, SCAN_LO)
        sd = _log_sign(exps, coefs, deeper)
        if sd[0] >= 0:
            raise BracketError(f"G_{env} is not negative near 0 (checked down to {SCAN_FLOOR:g})")
        ys, s = np.concatenate([deeper[:-1], ys]), np.concatenate([sd[:-1], s])
    hit = np.nonzero(s >= 0)[0]
    if hit.size == 0:
        raise BracketError(f"G_{env} has no sign change on [{SCAN_FLOOR:g}, {SCAN_HI:g}]")
    k = hit[0]
    lo, hi, exact = _bisect(sgn, ys[k - 1], ys[k], -1.0)
    snapped = _snap(sgn, lo, hi)
    if snapped is not None:
        return RootResult(snapped, (lo, hi), True)
    return RootResult(lo, (lo, hi), bool(exact is not None or s[k] == 0))


def last_positive_zero(lsum: LaurentSum, env="inf") -> RootResult:
    exps = lsum.exponents
    coefs = lsum.inf_envs if env == "inf" else lsum.sup_envs
    sgn = lambda y: float(_log_sign(exps, coefs, y)[0])  # noqa: E731
    ys = np.concatenate([_scan_grid(SCAN_FLOOR, SCAN_LO)[:-1], _scan_grid()])
    s = _log_sign(exps, coefs, ys)
    if s[-1] <= 0:
        raise BracketError(f"G_{env} is not positive at {SCAN_HI:g}")
    low = np.nonzero(s <= 0)[0]
    if low.size == 0:
        raise BracketError(f"G_{env} has no sign change on [{SCAN_FLOOR:g}, {SCAN_HI:g}]")
    k = low[-1]
    lo, hi, exact = _bisect_down(sgn, ys[k], ys[k + 1])
    snapped = _snap(sgn, lo, hi)
    if snapped is not None:
        return RootResult(snapped, (lo, hi), True)
    return RootResult(hi, (lo, hi), bool(exact is not None or s[k] == 0))


def _bisect_down(sign_fn, lo, hi):
    """Bisection keeping ``sign_fn(hi) > 0`` and ``sign_fn(lo) <= 0``."""
    exact = None
    for _ in range(400):
        if hi / lo - 1.0 <= REL_TOL:
            break
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        s = sign_fn(mid)
        if s == 0:
            exact = mid
        if s > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi, exact


def alpha_prime(lsum: LaurentSum) -> float:
    """First positive zero of ``G_sup`` (largest ``c`` with ``G_sup < 0`` on ``(0, c)``)."""
    lsum.check_case1("lower")
    return first_positive_zero(lsum, "sup").value


def beta_prime(lsum: LaurentSum) -> float:
    """Last positive zero of ``G_inf`` (smallest ``c`` with ``G_inf > 0`` on ``(c, inf)``)."""
    lsum.check_case1("upper")
    return last_positive_zero(lsum, "inf").value


def alpha_prime_case2(lsum: LaurentSum) -> float:
    """First real zero of ``G_sup`` when every exponent is nonnegative and the top one is odd.

    Then ``G_sup`` is an odd-degree polynomial with positive leading
    coefficient, negative for very negative ``y``.  The returned value is the
    left end of the final bracket, so ``G_sup`` is negative on ``(-inf, value)``.
    """
    if np.any(lsum.exponents < 0):
        raise PreconditionError("case (2) needs nonnegative exponents only")
    top = lsum.highest
    if top.n % 2 == 0 or top.n <= 0:
        raise PreconditionError(f"case (2) needs an odd leading exponent, got {top.n}")
    if top.inf_env <= 0:
        raise PreconditionError("case (2) needs a positive leading coefficient envelope")
    exps, coefs = lsum.exponents, lsum.sup_envs
    g = lambda y: float(_evaluate(exps, coefs, y))  # noqa: E731
    pos = _scan_grid(SCAN_FLOOR, SCAN_HI)
    ys = np.concatenate([-pos[::-1], [0.0], pos])
    vals = _evaluate(exps, coefs, ys)
    if vals[0] >= 0:
        raise BracketError(f"G_sup is not negative at {-SCAN_HI:g}")
    k = int(np.nonzero(vals >= 0)[0][0])
    if vals[k] == 0:
        return float(ys[k])
    lo, hi = float(ys[k - 1]), float(ys[k])
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= REL_TOL * max(abs(lo), abs(hi)):
            break
        v = g(mid)
        if v == 0:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class Barriers:
    """Constant barrier pair and the quantities it was built from.

    ``flags`` notes zeros hit exactly during bisection (the strict and non-strict
    definitions of the barrier differ only there).
    """

    alpha_prime: float
    beta_prime: float
    alpha: float
    beta: float
    rho_min: float
    rho_max: float
    flags: tuple = ()


def _trace(rho):
    if hasattr(rho, "boundary"):
        return np.asarray(rho.boundary, dtype=float)
    return np.asarray(rho, dtype=float).ravel()


def compute_barriers(lsum: LaurentSum, rho) -> Barriers:
    """``alpha = min(alpha', inf rho)`` and ``beta = max(beta', sup rho)`` over the boundary trace.

    ``rho`` is a :class:`~barriernet.grid.DiscreteField` (its boundary nodes are
    used) or an array of boundary values.
    """
    trace = _trace(rho)
    rmin, rmax = float(trace.min()), float(trace.max())
    if rmin <= 0:
        raise PreconditionError(f"boundary data must be positive (min {rmin:g})")
    lsum.check_case1()
    a = first_positive_zero(lsum, "sup")
    b = last_positive_zero(lsum, "inf")
    flags = []
    if a.exact_zero:
        flags.append("G_sup vanishes exactly at alpha_prime")
    if b.exact_zero:
        flags.append("G_inf vanishes exactly at beta_prime")
    alpha, beta = min(a.value, rmin), max(b.value, rmax)
    if lsum.g_sup(alpha) > 0 or lsum.g_inf(beta) < 0:
        raise BracketError(f"constant barriers fail their defining inequalities at ({alpha:g}, {beta:g})")
    return Barriers(a.value, b.value, alpha, beta, rmin, rmax, tuple(flags))


@dataclass(frozen=True)
class GrowthBounds:
    """Closed-form lower bound on ``alpha'`` and upper bound on ``beta'`` from ``Lambda``."""

    alpha_lower: float
    beta_upper: float
    d_alpha: float
    c_alpha: float
    d_beta: float
    c_beta: float
    lone_root_alpha: float
    lone_root_beta: float


def closed_form_growth_bounds(lsum: LaurentSum, Lambda: float) -> GrowthBounds:
    """Bounds driven only by the extreme coefficients and a uniform bound ``Lambda``.

    With ``C1`` nonnegative and ``C2`` negative exponents, ``b1 = sup`` of the
    lowest coefficient and ``bK = inf`` of the highest one:

    * ``d_alpha = (-b1 / (2 (C2 - 1) Lambda))**(1 / (n_i2 - n_1))`` if ``C2 > 1``
      else 1, ``c_alpha = min(1, d_alpha)``, lone root
      ``(-b1 / (2 C1 Lambda))**(-1 / n_1)``, and ``alpha_lower = min(c, root)``;
    * ``d_beta = (2 (C1 - 1) Lambda / bK)**(1 / (n_K - n_i1))`` if ``C1 > 1``
      else 1, ``c_beta = max(1, d_beta)``, lone root
      ``(2 C2 Lambda / bK)**(1 / n_K)``, and ``beta_upper = max(c, root)``.
    """
    lsum.check_case1()
    env = max(t.magnitude for t in lsum.terms)
    if Lambda < env:
        raise PreconditionError(f"Lambda = {Lambda:g} is below the coefficient envelope {env:g}")
    C1, C2 = lsum.C1, lsum.C2
    n1, nK = lsum.lowest.n, lsum.highest.n
    b1, bK = lsum.lowest.sup_env, lsum.highest.inf_env

    d_a = (-b1 / (2 * (C2 - 1) * Lambda)) ** (1.0 / (lsum.n_i2 - n1)) if C2 > 1 else 1.0
    c_a = min(1.0, d_a)
    root_a = (-b1 / (2 * C1 * Lambda)) ** (1.0 / -n1)

    d_b = (2 * (C1 - 1) * Lambda / bK) ** (1.0 / (nK - lsum.n_i1)) if C1 > 1 else 1.0
    c_b = max(1.0, d_b)
    root_b = (2 * C2 * Lambda / bK) ** (1.0 / nK)
    return GrowthBounds(min(c_a, root_a), max(c_b, root_b), d_a, c_a, d_b, c_b, root_a, root_b)


def critical_exponent_beta(a_inf, b_inf, m, i, rho_sup) -> float:
    """``max((-b_inf / a_inf)**(1 / (m - i)), rho_sup)``.

    Constant super-solution of ``-Laplace(u) + a u**m + b u**i = 0`` with
    ``a >= a_inf > 0`` and ``b >= b_inf``, ``b < 0``.
    """
    if not a_inf > 0:
        raise PreconditionError(f"need a_inf > 0, got {a_inf}")
    if not b_inf < 0:
        raise PreconditionError(f"need b_inf < 0, got {b_inf}")
    if not (int(m) == m and int(i) == i and m > i >= 1):
        raise PreconditionError(f"need integers m > i >= 1, got m = {m}, i = {i}")
    return max((-b_inf / a_inf) ** (1.0 / (m - i)), float(rho_sup))
