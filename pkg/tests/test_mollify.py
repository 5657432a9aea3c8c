import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from barriernet.errors import ContractError, ResolutionWarning
from barriernet.expressions import FieldExpr, sample
from barriernet.grid import DiscreteField, build_grid
from barriernet.mollify import (
    POSITIVE_BUMP,
    VANISHING_MOMENT,
    ExtensionMethod,
    extend_field,
    make_mollifier,
    regularize,
    smooth_cutoff,
)


_VM4 = make_mollifier(VANISHING_MOMENT, 4)


@pytest.fixture(scope="module")
def vm4():
    return _VM4


@pytest.fixture(scope="module")
def bump():
    return make_mollifier(POSITIVE_BUMP, 0)


def _bump_raw(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def test_positive_bump_unit_mass_and_nonnegative(bump):
    assert bump.moment(0) == pytest.approx(1.0, abs=1e-10)
    assert np.all(bump.profile >= 0)


def test_vanishing_moments(vm4):
    assert vm4.moment(0) == pytest.approx(1.0, abs=1e-10)
    for k in range(1, 5):
        assert abs(vm4.moment(k)) <= 1e-8


def test_odd_moments_vanish_by_symmetry(vm4, bump):
    for m in (vm4, bump):
        for k in (1, 3, 5):
            assert abs(m.moment(k)) <= 1e-14
        w = m.weights(0.01, 0.1)
        assert np.array_equal(w, w[::-1])


def test_discrete_weights_have_exact_moments(vm4):
    h, eps = 1 / 256, 0.05
    w = vm4.weights(h, eps)
    P = (w.size - 1) // 2
    x = np.arange(-P, P + 1) * h
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    for k in (2, 4):
        assert abs(np.sum(w * x**k)) <= 1e-12


def test_cutoff_plateaus():
    xi = np.array([0.0, 0.25, 0.5, 1.0, 1.5])
    psi = smooth_cutoff(xi, 0.5)
    assert psi[:3] == pytest.approx([1, 1, 1])
    assert psi[3:] == pytest.approx([0, 0])
    mid = smooth_cutoff(np.linspace(0.5, 1.0, 50), 0.5)
    assert np.all(np.diff(mid) <= 0)


def test_truncation_radius_bounds_profile(vm4):
    assert abs(vm4.profile[-1]) <= 1e-12
    assert np.max(np.abs(vm4(np.array([vm4.radius * 1.01, 2 * vm4.radius])))) == 0.0


def test_bump_kernel_rejects_second_moment():
    with pytest.raises(ContractError):
        make_mollifier(POSITIVE_BUMP, 2)


def test_zero_extension_of_interior_bump():
    g = build_grid(1, [0, 1], 63)
    f = sample(FieldExpr("bump(0.5, 0.1, 1)"), g)
    ext = extend_field(f, ExtensionMethod("zero", 10))
    assert np.all(ext.values[:10] == 0) and np.all(ext.values[-10:] == 0)


def test_even_reflection_identity():
    g = build_grid(1, [0, 1], 9)
    f = DiscreteField(g, g.coords[0].copy())
    ext = extend_field(f, ExtensionMethod("even", 3)).values
    h = g.h[0]
    for k in (1, 2, 3):
        assert ext[-1 - 3 + k] == pytest.approx(1 - k * h)
    assert np.max(np.abs(ext)) / f.sup() == 1.0


def test_natural_extension_without_expression_falls_back_to_even():
    g = build_grid(1, [0, 1], 9)
    f = DiscreteField(g, g.coords[0] ** 2)
    a = extend_field(f, ExtensionMethod("natural", 4)).values
    b = extend_field(f, ExtensionMethod("even", 4)).values
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind, K", [(POSITIVE_BUMP, 0), (VANISHING_MOMENT, 4)])
@pytest.mark.parametrize("extension", ["zero", "even", "natural"])
def test_constants_reproduced_away_from_zero_padding(kind, K, extension):
    g = build_grid(1, [0, 1], 511)
    f = sample(FieldExpr("2.5"), g)
    m = make_mollifier(kind, K)
    eps = max(0.1 / m.radius, 2 * g.h[0])
    out = regularize(f, m, eps, extension).values
    if extension == "zero":
        reach = m.reach(g.h[0], eps)
        out = out[reach:-reach]
    assert np.max(np.abs(out - 2.5)) <= 1e-10


def test_quadratic_reproduced_by_moment_kernel(vm4):
    g = build_grid(1, [0, 1], 127)
    f = sample(FieldExpr("x**2"), g)
    out = regularize(f, vm4, 0.02).values
    assert np.max(np.abs(out - f.values)) <= 1e-10


def test_pad_narrower_than_reach_refused(bump):
    g = build_grid(1, [0, 1], 63)
    f = sample(FieldExpr("x"), g)
    with pytest.raises(ContractError):
        regularize(f, bump, 0.2, ExtensionMethod("even", 2))


def test_subgrid_eps_warns(bump):
    g = build_grid(1, [0, 1], 15)
    f = sample(FieldExpr("x"), g)
    with pytest.warns(ResolutionWarning):
        out = regularize(f, bump, 0.01)
    assert np.array_equal(out.values, f.values)


def test_singular_field_growth_matches_direct_convolution(bump):
    g = build_grid(1, [0, 1], 4095)
    x = g.coords[0]
    h = g.h[0]
    f = sample(FieldExpr("inv_pow(0.5, 0.5)"), g)
    eps = 0.2 * 0.5 ** np.arange(6)
    got = np.array([regularize(f, bump, e).values[2048] for e in eps])

    # oracle 1: direct nodal sum of the independently normalized bump
    direct = []
    for e in eps:
        s = (x - 0.5) / e
        w = _bump_raw(s)
        direct.append(np.sum(w * f.values) / np.sum(w))
    assert got == pytest.approx(direct, rel=1e-10)

    # oracle 2: continuum value eps**-1/2 * int phi(s) |s|**-1/2 ds
    Z = quad(lambda s: float(_bump_raw(s)), -1, 1, epsabs=0, epsrel=1e-13)[0]
    I = 2 * quad(lambda s: float(_bump_raw(s)) / Z * s**-0.5, 0, 1, epsabs=0, epsrel=1e-12)[0]
    assert got == pytest.approx(I * eps**-0.5, rel=0.12)

    slope = np.polyfit(np.log(eps), np.log(got), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


@pytest.mark.parametrize("text", ["sin(x)", "x**3", "exp(x)"])
def test_smooth_fields_consistent_to_high_order(vm4, text):
    from barriernet.colombeau import null_decay_check

    g = build_grid(1, [0, 1], 1023)
    f = sample(FieldExpr(text), g)
    eps = 0.04 * 0.5 ** np.arange(6)
    err = [np.max(np.abs(regularize(f, vm4, e).values - f.values)) for e in eps]
    rep = null_decay_check(eps, err, q_target=4.5, floor=1e-11)
    assert rep.certified_null, err


def test_bump_order_two_on_smooth_field(bump):
    g = build_grid(1, [0, 1], 1023)
    f = sample(FieldExpr("sin(3 * x)"), g)
    eps = 0.1 * 0.5 ** np.arange(4)
    err = [np.max(np.abs(regularize(f, bump, e).values - f.values)) for e in eps]
    assert np.polyfit(np.log(eps), np.log(err), 1)[0] == pytest.approx(2.0, abs=0.1)


def test_positivity_and_sup_preserved_by_bump(bump):
    g = build_grid(1, [0, 1], 255)
    f = sample(FieldExpr("1 + inv_pow(0.3, 0.7) * (x - 0.3)**2 - 0.5 * cos(9 * x)"), g)
    for e in (0.2, 0.05, 0.01):
        out = regularize(f, bump, e, "even")
        assert out.min() >= 0
        assert out.max() <= f.max() * (1 + 1e-14)


def test_2d_tensor_product_reproduces_constants(bump):
    g = build_grid(2, [[0, 1], [0, 1]], [31, 31])
    f = sample(FieldExpr("3", dim=2), g)
    out = regularize(f, bump, 0.1, "even")
    assert np.max(np.abs(out.values - 3)) <= 1e-12


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([0.03, 0.1, 0.3]))
@settings(max_examples=25, deadline=None)
def test_regularization_is_linear(a, b, eps):
    g = build_grid(1, [0, 1], 63)
    m = _VM4
    rng = np.random.default_rng(7)
    f = DiscreteField(g, rng.normal(size=g.shape))
    h = DiscreteField(g, rng.normal(size=g.shape))
    lhs = regularize(a * f + b * h, m, eps, "even").values
    rhs = a * regularize(f, m, eps, "even").values + b * regularize(h, m, eps, "even").values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + abs(a) + abs(b)) * 10
