import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import spsolve

from barriernet.barriers import Barriers, LaurentSum, compute_barriers
from barriernet.errors import ConfigError, DomainError, PreconditionError
from barriernet.grid import DiscreteField, build_grid
from barriernet.monotone import (
    IterationConfig,
    compare_sweeps,
    lipschitz_shift,
    monotone_solve,
    semilinear_residual,
)
from barriernet.problem import ProblemSpec, regularize_problem


def _problem(n=255, rho="1", a=1.0, terms=((5, "1"), (-7, "-1"))):
    g = build_grid(1, [0, 1], n)
    return regularize_problem(ProblemSpec.build(g, a, rho, terms), None, None)


def _newton_oracle(n_int):
    """Damped Newton on -u'' + u**5 - u**-7 = 0, u(0) = 1, u(1) = 1.2, assembled independently."""
    x = np.linspace(0, 1, n_int + 2)
    h = x[1]
    u = 1 + 0.2 * x
    lap = sp.diags([-np.ones(n_int - 1), 2 * np.ones(n_int), -np.ones(n_int - 1)], [-1, 0, 1]) / h**2
    bc = np.zeros(n_int)
    bc[0], bc[-1] = 1 / h**2, 1.2 / h**2
    for _ in range(50):
        ui = u[1:-1]
        F = lap @ ui - bc + ui**5 - ui**-7
        J = lap + sp.diags(5 * ui**4 + 7 * ui**-8)
        d = spsolve(J.tocsc(), -F)
        t = 1.0
        while np.any(ui + t * d <= 0):
            t /= 2
        u[1:-1] = ui + t * d
        if np.max(np.abs(d)) < 1e-14:
            break
    return x, u


@pytest.mark.parametrize(
    "pairs, lo, hi, expected",
    [([(1, 1)], 0.5, 2.0, 1.0), ([(1, -1)], 0.1, 7.0, 1.0), ([(5, 1), (-7, -1)], 0.5, 2.0, 1872.0), ([(5, 1), (-7, -1)], 1.0, 1.0, 12.0)],
)
def test_lipschitz_shift(pairs, lo, hi, expected):
    assert lipschitz_shift(LaurentSum.constant(pairs), lo, hi) == pytest.approx(expected, rel=1e-15)


def test_lipschitz_shift_needs_ordered_positive_interval(symmetric_sum):
    with pytest.raises(PreconditionError):
        lipschitz_shift(symmetric_sum, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        lipschitz_shift(symmetric_sum, 2.0, 1.0)


def test_symmetric_preset_is_exact():
    p = _problem()
    u, trace = monotone_solve(p, compute_barriers(p.lsum, p.rho))
    assert np.max(np.abs(u.values - 1)) <= 1e-10
    assert trace.iterations <= 3
    assert trace.verdict == "converged"


def test_boundary_ramp_matches_newton_oracle():
    p = _problem(rho="1 + 0.2 * x")
    bar = compute_barriers(p.lsum, p.rho)
    assert (bar.alpha, bar.beta) == pytest.approx((1.0, 1.2))
    u, trace = monotone_solve(p, bar)
    xo, uo = _newton_oracle(4094)
    ref = np.interp(p.grid.coords[0], xo, uo)
    assert np.max(np.abs(u.values - ref)) <= 1e-6
    assert u.min() >= 1.0 - 1e-10 and u.max() <= 1.2 + 1e-10
    assert trace.final_residual <= 10 * 1e-10 * trace.M


def test_trace_is_monotone_and_bracketed():
    p = _problem(rho="1 + 0.2 * x")
    u, trace = monotone_solve(p, compute_barriers(p.lsum, p.rho))
    assert trace.max_violation <= 1e-10
    assert min(trace.u_min) >= 1.0 - 1e-10
    assert max(trace.u_max) <= 1.2 + 1e-10
    assert len(trace.as_rows()) == trace.iterations


def test_invalid_subsolution_refused():
    p = _problem()
    bad = Barriers(1.5, 1.5, 1.5, 2.0, 1.0, 1.0)  # G_sup(1.5) > 0
    with pytest.raises(PreconditionError):
        monotone_solve(p, bad)


def test_residual_examples():
    p = _problem()
    g = p.grid
    assert semilinear_residual(p, DiscreteField.constant(g, 1.0)) <= 1e-12
    # interior rows of u = 2 with rho = 2 boundary: |32 - 1/128|
    assert semilinear_residual(p, np.full(g.shape, 2.0)) == pytest.approx(32 - 1 / 128, rel=1e-12)
    with pytest.raises(DomainError):
        semilinear_residual(p, np.zeros(g.shape))


def test_up_and_down_sweeps_agree():
    p = _problem(rho="1 + 0.2 * x")
    cmp = compare_sweeps(p, compute_barriers(p.lsum, p.rho))
    assert cmp.difference <= 100 * 1e-10
    assert not cmp.possibly_nonunique


def test_max_iter_is_a_verdict_not_an_error():
    p = _problem(rho="1 + 0.2 * x")
    u, trace = monotone_solve(p, compute_barriers(p.lsum, p.rho), IterationConfig(max_iter=2))
    assert trace.verdict == "max_iter"
    assert trace.iterations == 2


@pytest.mark.parametrize("kw", [{"tol_sup": 0}, {"max_iter": 0}, {"slack": -1}, {"direction": "sideways"}])
def test_iteration_config_validation(kw):
    with pytest.raises(ConfigError):
        IterationConfig(**kw)


def test_2d_solve_bracketed():
    g = build_grid(2, [[0, 1], [0, 1]], [15, 15])
    spec = ProblemSpec.build(g, "1 + 0.5 * x", "1 + 0.3 * x * y", [(5, "1"), (1, "0.5 * sin(3 * y)"), (-7, "-1")])
    p = regularize_problem(spec, None, None)
    bar = compute_barriers(p.lsum, p.rho)
    u, trace = monotone_solve(p, bar)
    assert trace.verdict == "converged"
    assert bar.alpha - 1e-10 <= u.min() and u.max() <= bar.beta + 1e-10
    assert semilinear_residual(p, u) <= 10 * 1e-10 * trace.M


@given(st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_random_presets_monotone_and_bracketed(seed):
    rng = np.random.default_rng(seed)
    top = int(rng.choice([3, 5, 7]))
    low = int(rng.choice([-1, -3, -7]))
    c_top, c_low = float(rng.uniform(0.5, 3.0)), -float(rng.uniform(0.5, 3.0))
    mid = float(rng.uniform(-1, 1))
    r0, r1 = (float(r) for r in rng.uniform(0.5, 2.0, 2))
    terms = [(top, f"{c_top!r} * (1 + 0.3 * sin(5 * x))"), (1, f"{mid!r}"), (low, f"{c_low!r}")]
    p = _problem(n=127, rho=f"{r0!r} + ({r1 - r0!r}) * x", a="1 + 0.5 * cos(3 * x)", terms=terms)
    bar = compute_barriers(p.lsum, p.rho)
    u, trace = monotone_solve(p, bar)
    assert trace.max_violation <= 1e-10
    assert min(trace.u_min) >= bar.alpha - 1e-10 and max(trace.u_max) <= bar.beta + 1e-10
    assert trace.final_residual <= 10 * 1e-10 * trace.M
