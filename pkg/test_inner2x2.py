"""
Tests for 2x2 inner functions over model spaces
"""

import numpy as np
import pytest

import corpus
from blaschke import (
    boundary_grid,
    compose_elementary,
    conjugation_space,
    elementary,
    monomial,
    multiply,
)
from charfun import default_grid
from errors import CbNotB, FixedPointViolated, InvalidInput
from inner2x2 import (
    InnerPair,
    build_symmetric_inner,
    build_theta,
    family_pair,
    pair_from_json,
    pair_to_json,
    symmetrizable_test,
    symmetrizer,
    symmetry_residual,
    theta_values,
    verify_inner,
)
from numlin import opnorm, unitarity_defect

ALPHA, BETA = 0.8, 0.6


def constant(c):
    return lambda z: np.full(np.shape(z), c, dtype=complex)


@pytest.fixture
def linear_pair(z_squared):
    return InnerPair.from_callables(z_squared, constant(ALPHA), lambda z: BETA * z)


def test_theta_of_linear_pair(linear_pair):
    theta = build_theta(linear_pair)
    for z in (0.0, 0.5, 0.3 - 0.6j, np.exp(0.4j)):
        expected = [[ALPHA, -BETA * z], [BETA * z, ALPHA * z * z]]
        assert np.allclose(theta(z), expected, atol=1e-10)


def test_theta_values_matches_evaluator(linear_pair):
    points = default_grid(3)
    stack = theta_values(linear_pair, points)
    assert stack.shape == (points.size, 2, 2)
    theta = build_theta(linear_pair)
    assert np.allclose(stack[5], theta(points[5]))


def test_determinant_is_phi():
    pair = corpus.random_symmetrizable_pair(np.random.default_rng(5))
    z = boundary_grid(64)
    assert np.allclose(np.linalg.det(theta_values(pair, z)), pair.phi(z), atol=1e-8)


def test_verify_inner_passes(linear_pair):
    report = verify_inner(linear_pair)
    assert report.passed
    assert report.modulus_error < 1e-10
    assert report.det_error < 1e-10


def test_verify_inner_reports_large_modulus(z_squared):
    pair = InnerPair.from_callables(z_squared, constant(ALPHA), lambda z: 2 * z)
    report = verify_inner(pair)
    assert not report.passed
    assert any("|a|^2 + |b|^2" in v for v in report.violations)


def test_verify_inner_reports_non_member(z_squared):
    pair = InnerPair.from_callables(z_squared, lambda z: z ** 5, lambda z: 0 * z)
    report = verify_inner(pair)
    assert not report.passed
    assert report.membership["a"] > 1e-8


def test_inner_pair_dimension_check(z_squared):
    wrong = conjugation_space(monomial(1)).function([1, 0])
    right = conjugation_space(z_squared).function([1, 0, 0])
    with pytest.raises(InvalidInput):
        InnerPair(z_squared, wrong, right)


def test_symmetrizable_linear_pair(linear_pair):
    gamma, theta = symmetrizable_test(linear_pair)
    assert gamma == pytest.approx(0, abs=1e-8)
    assert theta == pytest.approx(1, abs=1e-8)


def test_symmetrizable_rotated_coefficient(z_squared):
    beta = 0.6 * np.exp(0.9j)
    pair = InnerPair.from_callables(z_squared, constant(ALPHA), lambda z: beta * z)
    gamma, theta = symmetrizable_test(pair)
    assert abs(gamma) < 1e-8
    assert abs(abs(theta) - 1) < 1e-8
    assert abs((theta * beta).imag) < 1e-8
    assert theta.real > 0


def test_symmetrizable_dependent_pair(z_squared):
    pair = InnerPair.from_callables(z_squared, constant(ALPHA), constant(BETA))
    gamma, theta = symmetrizable_test(pair)
    assert abs(gamma * ALPHA + theta * BETA) < 1e-8
    assert abs(gamma) ** 2 + abs(theta) ** 2 == pytest.approx(1)


def test_family_pair_without_relation_is_not_symmetrizable():
    u = monomial(2)
    v = multiply(monomial(1), elementary(0.5))
    assert symmetrizable_test(family_pair(u, v, ALPHA, BETA)) is None


def test_family_pair_with_relation_is_symmetrizable(cubic_blaschke):
    v = compose_elementary(np.exp(0.3j), 0.2 + 0.1j, cubic_blaschke)
    pair = family_pair(cubic_blaschke, v, ALPHA, BETA)
    assert verify_inner(pair).passed
    assert symmetrizable_test(pair) is not None


def test_degree_one_family_pairs_are_always_symmetrizable(rng):
    for _ in range(5):
        u, v = corpus.random_blaschke(rng, 1), corpus.random_blaschke(rng, 1)
        assert symmetrizable_test(family_pair(u, v, ALPHA, BETA)) is not None


def test_random_generic_pair_is_rejected(rng):
    for _ in range(5):
        pair = corpus.random_generic_pair(rng, max_degree=1)
        assert pair.phi.degree >= 4
        assert symmetrizable_test(pair) is None


def test_symmetrizer_off_diagonal(linear_pair):
    sym, evaluate = symmetrizer(linear_pair, 0, 1)
    assert unitarity_defect(sym.U1) < 1e-12
    assert unitarity_defect(sym.U2) < 1e-12
    for z in (0.2, 0.5j, -0.3 + 0.3j):
        M = evaluate(z)
        assert M[0, 1] == pytest.approx(1j * BETA * z)
        assert M[1, 0] == pytest.approx(1j * BETA * z)
    assert symmetry_residual(evaluate, default_grid(3)) <= 1e-10


def test_symmetrizer_rejects_non_fixed_point(linear_pair):
    with pytest.raises(FixedPointViolated):
        symmetrizer(linear_pair, 1, 0)
    with pytest.raises(InvalidInput):
        symmetrizer(linear_pair, 0, 0)


def test_build_symmetric_inner_from_inner_fixed_point(z_squared):
    b = conjugation_space(z_squared).function([0, 1, 0])
    pair = build_symmetric_inner(z_squared, b)
    theta = build_theta(pair)
    for z in (0.1, 0.4 - 0.2j):
        assert np.allclose(theta(z), [[0, 1j * z], [1j * z, 0]], atol=1e-10)


def test_build_symmetric_inner_from_scaled_fixed_point(z_squared):
    s = 0.6
    b = conjugation_space(z_squared).function([0, s, 0])
    pair = build_symmetric_inner(z_squared, b)
    a0 = pair.a(0.0)
    assert abs(a0) == pytest.approx(np.sqrt(1 - s * s), abs=1e-8)
    assert np.allclose(pair.a(boundary_grid(16)), a0, atol=1e-8)
    theta = build_theta(pair)
    M = theta(0.3 + 0.1j)
    assert opnorm(M - M.T) < 1e-10


def test_build_symmetric_inner_random(rng, cubic_blaschke):
    b = corpus.random_fixed_point(rng, cubic_blaschke)
    pair = build_symmetric_inner(cubic_blaschke, b)
    assert verify_inner(pair).passed
    theta = build_theta(pair)
    assert symmetry_residual(theta, default_grid(4)) <= 1e-8


def test_build_symmetric_inner_requires_fixed_point(z_squared):
    b = conjugation_space(z_squared).function([0, 0.5j, 0])
    with pytest.raises(CbNotB):
        build_symmetric_inner(z_squared, b)


def test_pair_json(linear_pair):
    again = pair_from_json(pair_to_json(linear_pair))
    assert np.allclose(again.a.coeffs, linear_pair.a.coeffs)
    assert np.allclose(again.b.coeffs, linear_pair.b.coeffs)
    with pytest.raises(InvalidInput):
        pair_from_json({"phi": {"zeros": [0]}})


@pytest.mark.parametrize("angle", [0.4, np.pi / 2, 2.5])
def test_symmetrizable_verdict_ignores_phase_of_a(rng, linear_pair, cubic_blaschke, angle):
    pairs = [
        linear_pair,
        family_pair(cubic_blaschke, compose_elementary(np.exp(0.3j), 0.2 + 0.1j, cubic_blaschke), ALPHA, BETA),
        family_pair(monomial(2), multiply(monomial(1), elementary(0.5)), ALPHA, BETA),
        corpus.random_symmetrizable_pair(rng),
        corpus.random_generic_pair(rng),
    ]
    for pair in pairs:
        rotated = InnerPair(pair.phi, pair.space.function(np.exp(1j * angle) * pair.a.coeffs), pair.b)
        assert (symmetrizable_test(rotated) is None) == (symmetrizable_test(pair) is None)
