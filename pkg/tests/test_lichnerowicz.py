import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barriernet.barriers import alpha_prime, beta_prime
from barriernet.errors import ConfigError, HypothesisViolation
from barriernet.grid import DiscreteField, build_grid
from barriernet.lichnerowicz import HamiltonianData, assemble_hamiltonian
from barriernet.monotone import semilinear_residual
from barriernet.problem import regularize_problem

# positive real root of y**12 - y**4 - 1 (numpy.roots)
ROOT_Y12_Y4_1 = 1.0728298678065222


def _constant_terms(spec):
    return [(n, b.constant_value()) for n, b in spec.terms]


def test_symmetric_preset(grid1d):
    spec = assemble_hamiltonian(HamiltonianData(tau2=12, sigma2=1), grid1d)
    assert _constant_terms(spec) == [(-7, -1.0), (5, 1.0)]
    lsum = regularize_problem(spec, None, None).lsum
    assert alpha_prime(lsum) == 1.0 and beta_prime(lsum) == 1.0


def test_matter_term(grid1d):
    spec = assemble_hamiltonian(HamiltonianData(tau2=12, sigma2=1, rho_m=0.5, kappa=1), grid1d)
    assert _constant_terms(spec) == [(-7, -1.0), (-3, -1.0), (5, 1.0)]
    lsum = regularize_problem(spec, None, None).lsum
    assert beta_prime(lsum) == pytest.approx(ROOT_Y12_Y4_1, rel=1e-11)


def test_maximal_slice_rejected(grid1d):
    with pytest.raises(HypothesisViolation, match="b\\^K positivity fails"):
        assemble_hamiltonian(HamiltonianData(tau2=0), grid1d)


def test_vanishing_sigma_rejected(grid1d):
    with pytest.raises(HypothesisViolation, match="b\\^1 negativity fails"):
        assemble_hamiltonian(HamiltonianData(sigma2="x"), grid1d)


def test_negative_matter_density_rejected(grid1d):
    with pytest.raises(HypothesisViolation):
        assemble_hamiltonian(HamiltonianData(rho_m="-0.1"), grid1d)


@pytest.mark.parametrize("kw", [{"tau2": -1}, {"kappa": 0}])
def test_invalid_constants(kw):
    with pytest.raises(ConfigError):
        HamiltonianData(**kw)


def test_scalar_curvature_of_either_sign(grid1d):
    for R in ("-3", "2 * sin(4 * x)"):
        spec = assemble_hamiltonian(HamiltonianData(R=R), grid1d)
        assert 1 in spec.exponents


def test_two_dimensional_fields():
    g = build_grid(2, [[0, 1], [0, 1]], [9, 9])
    spec = assemble_hamiltonian(HamiltonianData(sigma2="1 + bump(0.5, 0.5, 0.2, 0.05)", R="0.5 * y"), g)
    assert spec.exponents == [-7, 1, 5]


@given(st.floats(0.5, 30), st.floats(-5, 5), st.floats(0.1, 5), st.floats(0, 3), st.floats(0.1, 2))
@settings(max_examples=40, deadline=None)
def test_residual_at_one_is_direct_substitution(tau2, R, sigma2, rho_m, kappa):
    g = build_grid(1, [0, 1], 15)
    data = HamiltonianData(R=R, tau2=tau2, sigma2=sigma2, rho_m=rho_m, kappa=kappa)
    p = regularize_problem(assemble_hamiltonian(data, g), None, None)
    expected = abs(tau2 / 12 + R / 8 - 2 * kappa * rho_m - sigma2)
    got = semilinear_residual(p, DiscreteField.constant(g, 1.0))
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)
