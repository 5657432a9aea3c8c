import math

import numpy as np
import pytest
from hypothesis import given, settings

from barriernet.barriers import (
    LaurentSum,
    LaurentTerm,
    alpha_prime,
    alpha_prime_case2,
    beta_prime,
    closed_form_growth_bounds,
    compute_barriers,
    critical_exponent_beta,
)
from barriernet.errors import BracketError, ConfigError, PreconditionError

from conftest import dense_root_oracle
from strategies import case1_sums

# positive real roots of the cleared polynomials, from numpy.roots
ROOT_2Y4_3Y_1 = 1.239311493601794
ROOT_Y5_2Y_1 = 1.2906488013467088


def _sup_inf(pairs_sup, pairs_inf):
    return LaurentSum([LaurentTerm(n, s, i) for (n, s), (_, i) in zip(pairs_sup, pairs_inf)])


@pytest.mark.parametrize(
    "pairs, expected",
    [([(5, 1), (-7, -1)], 1.0), ([(1, 1), (-1, -4)], 2.0), ([(3, 2), (0, -3), (-1, -1)], ROOT_2Y4_3Y_1)],
)
def test_alpha_prime_examples(pairs, expected):
    assert alpha_prime(LaurentSum.constant(pairs)) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize(
    "pairs, expected",
    [([(5, 1), (-7, -1)], 1.0), ([(3, 1), (0, -8)], 2.0), ([(5, 1), (1, -2), (0, -1)], ROOT_Y5_2Y_1)],
)
def test_beta_prime_examples(pairs, expected):
    assert beta_prime(LaurentSum.constant(pairs)) == pytest.approx(expected, rel=1e-11)


def test_exact_roots_are_returned_exactly():
    assert alpha_prime(LaurentSum.constant([(5, 1), (-7, -1)])) == 1.0
    assert beta_prime(LaurentSum.constant([(3, 1), (0, -8)])) == 2.0


def test_conservative_sides():
    s = LaurentSum.constant([(3, 2), (0, -3), (-1, -1)])
    a, b = alpha_prime(s), beta_prime(s)
    assert s.g_sup(a) <= 0
    assert s.g_inf(b) >= 0


@pytest.mark.parametrize(
    "pairs, expected",
    [([(3, 1)], 0.0), ([(3, 1), (0, -8)], 2.0), ([(5, 1), (1, -2), (0, 1)], -ROOT_Y5_2Y_1)],
)
def test_case2_examples(pairs, expected):
    assert alpha_prime_case2(LaurentSum.constant(pairs)) == pytest.approx(expected, abs=1e-11)


@pytest.mark.parametrize("pairs", [[(4, 1), (1, -1)], [(3, -1)], [(3, 1), (-1, -1)]])
def test_case2_preconditions(pairs):
    with pytest.raises(PreconditionError):
        alpha_prime_case2(LaurentSum.constant(pairs))


@pytest.mark.parametrize("pairs", [[(5, 1), (1, -1)], [(5, 1), (-7, 1)], [(-3, -1), (-7, -1)]])
def test_case1_preconditions(pairs):
    with pytest.raises(PreconditionError):
        compute_barriers(LaurentSum.constant(pairs), np.array([1.0]))


def test_alpha_prime_without_sign_change_is_a_bracket_failure():
    # negative near 0 and at infinity: never crosses
    s = LaurentSum([LaurentTerm(-1, -1.0, -1.0), LaurentTerm(1, -1.0, -1.0), LaurentTerm(2, 0.0, 0.0)])
    with pytest.raises((BracketError, PreconditionError)):
        alpha_prime(s)


def test_duplicate_exponents_rejected():
    with pytest.raises(ConfigError):
        LaurentSum.constant([(1, 1), (1, -1)])


def test_extreme_exponents_do_not_overflow():
    # root of y**20 = 1e-3 y**-20 is 1e-3**(1/40)
    s = LaurentSum.constant([(20, 1.0), (-20, -1e-3)])
    assert alpha_prime(s) == pytest.approx(1e-3 ** (1 / 40), rel=1e-11)
    tiny = LaurentSum.constant([(9, 1.0), (-9, -1e-60)])
    assert alpha_prime(tiny) == pytest.approx(1e-60 ** (1 / 18), rel=1e-11)


@pytest.mark.parametrize(
    "rho, expected",
    [(np.array([0.8, 1.5]), (0.8, 1.5)), (np.array([1.0, 1.0]), (1.0, 1.0)), (np.array([1.0, 1.2]), (1.0, 1.2))],
)
def test_compute_barriers_examples(symmetric_sum, rho, expected):
    b = compute_barriers(symmetric_sum, rho)
    assert (b.alpha, b.beta) == pytest.approx(expected, abs=1e-12)
    assert b.alpha_prime <= b.beta_prime


def test_compute_barriers_rejects_nonpositive_rho(symmetric_sum):
    with pytest.raises(PreconditionError):
        compute_barriers(symmetric_sum, np.array([0.0, 1.0]))


def test_growth_bounds_symmetric(symmetric_sum):
    gb = closed_form_growth_bounds(symmetric_sum, 1.0)
    assert gb.alpha_lower == pytest.approx(0.5 ** (1 / 7), abs=1e-12)
    assert gb.beta_upper == pytest.approx(2 ** (1 / 5), abs=1e-12)
    assert gb.alpha_lower < 1 < gb.beta_upper
    gb2 = closed_form_growth_bounds(symmetric_sum, 2.0)
    assert gb2.alpha_lower == pytest.approx(0.25 ** (1 / 7), abs=1e-12)
    assert gb2.beta_upper == pytest.approx(4 ** (1 / 5), abs=1e-12)


def test_growth_bounds_reject_small_lambda(symmetric_sum):
    with pytest.raises(PreconditionError):
        closed_form_growth_bounds(symmetric_sum, 0.5)


@pytest.mark.parametrize(
    "args, expected", [((1, -1, 5, 1, 1), 1.0), ((1, -2, 5, 1, 1), 2 ** 0.25), ((1, -1, 5, 1, 3), 3.0)]
)
def test_critical_exponent_beta(args, expected):
    assert critical_exponent_beta(*args) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("args", [(0, -1, 5, 1, 1), (1, 1, 5, 1, 1), (1, -1, 1, 1, 1)])
def test_critical_exponent_beta_preconditions(args):
    with pytest.raises(PreconditionError):
        critical_exponent_beta(*args)


@given(case1_sums)
@settings(max_examples=40, deadline=None)
def test_roots_match_dense_scan_oracle(lsum):
    a = alpha_prime(lsum)
    b = beta_prime(lsum)
    oa = dense_root_oracle(lsum.exponents, lsum.sup_envs, first=True, points=200_000)
    ob = dense_root_oracle(lsum.exponents, lsum.inf_envs, first=False, points=200_000)
    assert a == pytest.approx(oa, rel=1e-6)
    assert b == pytest.approx(ob, rel=1e-6)


@given(case1_sums)
@settings(max_examples=100, deadline=None)
def test_ordering_and_growth_bounds(lsum):
    a, b = alpha_prime(lsum), beta_prime(lsum)
    assert a <= b
    lam = max(t.magnitude for t in lsum.terms)
    gb = closed_form_growth_bounds(lsum, lam)
    assert gb.alpha_lower > 0
    assert gb.alpha_lower <= a * (1 + 1e-12)
    assert b <= max(gb.beta_upper, gb.c_beta) * (1 + 1e-12)


@given(case1_sums)
@settings(max_examples=60, deadline=None)
def test_barriers_satisfy_defining_inequalities(lsum):
    bar = compute_barriers(lsum, np.array([0.5, 2.0]))
    assert lsum.g_sup(bar.alpha) <= 0
    assert lsum.g_inf(bar.beta) >= 0
    assert bar.alpha == min(bar.alpha_prime, 0.5)
    assert bar.beta == max(bar.beta_prime, 2.0)
    assert not math.isnan(bar.alpha)
