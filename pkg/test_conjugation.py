"""
Tests for antilinear maps, conjugations and the conjugation search
"""

import numpy as np
import pytest
import scipy.linalg

from conjugation import (
    AntilinearMap,
    Conjugation,
    Verdict,
    apply,
    c_real_basis,
    commutation_matrix,
    compose_with_symmetry,
    find_conjugation,
    find_unitary_in_span,
    is_c_symmetric,
    is_conjugation,
    matrix_in_c_real_basis,
    symmetric_intertwiners,
    unvec,
    vec,
)
from errors import InvalidInput, NotCSymmetric
from numlin import opnorm

FLIP = np.array([[0, 1], [1, 0]], dtype=complex)


def random_unitary(rng, n):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(G)
    return Q


def test_apply_plain_and_flip():
    assert np.allclose(apply(Conjugation(np.eye(2)), [1j, 0]), [-1j, 0])
    assert np.allclose(apply(Conjugation(FLIP), [1, 0]), [0, 1])


def test_apply_is_isometric(rng):
    J = AntilinearMap(random_unitary(rng, 4))
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert np.linalg.norm(apply(J, x)) == pytest.approx(np.linalg.norm(x))


def test_apply_rejects_wrong_length():
    with pytest.raises(InvalidInput):
        apply(Conjugation(np.eye(2)), [1, 2, 3])


def test_is_conjugation():
    assert is_conjugation(Conjugation(np.eye(3)))
    assert is_conjugation(Conjugation(FLIP))
    assert not is_conjugation(AntilinearMap(np.array([[0, 1], [-1, 0]])))


def test_conjugation_rejects_nonsymmetric_or_nonunitary():
    with pytest.raises(InvalidInput):
        Conjugation(np.array([[0, 1], [-1, 0]]))
    with pytest.raises(InvalidInput):
        Conjugation(np.diag([1.0, 2.0]))


def test_compose_with_commuting_symmetry():
    C = Conjugation(np.eye(2))
    composed = compose_with_symmetry(C, FLIP)
    assert is_conjugation(composed)
    x = np.array([1 + 2j, -0.5j])
    assert np.allclose(apply(composed, x), np.conj(FLIP @ x))


def test_compose_rejects_noncommuting_symmetry():
    S = np.array([[0, 1j], [-1j, 0]])
    with pytest.raises(InvalidInput):
        compose_with_symmetry(Conjugation(np.eye(2)), S)


def test_compose_rejects_non_involution():
    with pytest.raises(InvalidInput):
        compose_with_symmetry(Conjugation(np.eye(2)), np.diag([1, 1j]))


@pytest.mark.parametrize("U", [np.eye(2), FLIP, np.diag([1j, -1])])
def test_c_real_basis_is_fixed_and_orthonormal(U):
    C = Conjugation(U)
    W = c_real_basis(C)
    assert opnorm(W.conj().T @ W - np.eye(2)) < 1e-10
    for col in W.T:
        assert np.linalg.norm(apply(C, col) - col) < 1e-10


def test_is_c_symmetric_examples(jordan2):
    ok, residual = is_c_symmetric(np.array([[1, 2j], [2j, 3]]), Conjugation(np.eye(2)))
    assert ok and residual == 0
    ok, _ = is_c_symmetric(jordan2, Conjugation(FLIP))
    assert ok
    ok, residual = is_c_symmetric(np.diag([1, 2]), Conjugation(FLIP))
    assert not ok and residual > 0.5


def test_matrix_in_c_real_basis(jordan2):
    M = matrix_in_c_real_basis(jordan2, Conjugation(FLIP))
    assert opnorm(M - M.T) < 1e-10
    D = matrix_in_c_real_basis(np.diag([0.2, 0.7j]), Conjugation(np.eye(2)))
    assert opnorm(D - D.T) < 1e-10
    assert np.allclose(np.sort_complex(np.linalg.eigvals(D)), np.sort_complex([0.2, 0.7j]))
    with pytest.raises(NotCSymmetric):
        matrix_in_c_real_basis(jordan2, Conjugation(np.eye(2)))


def test_commutation_matrix_transposes(rng):
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(commutation_matrix(3) @ vec(X), vec(X.T))
    assert np.allclose(unvec(vec(X), (3, 3)), X)


def test_find_conjugation_scalar_and_symmetric(rng):
    assert find_conjugation([[0.4j]]).method == "scalar"
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    found = find_conjugation(G + G.T)
    assert found.verdict == Verdict.SYMMETRIC
    assert found.method == "symmetric"
    assert np.allclose(found.conjugation.U, np.eye(4))


def test_find_conjugation_jordan_block(jordan2):
    found = find_conjugation(jordan2)
    assert found.verdict == Verdict.SYMMETRIC
    assert found.residual <= 1e-8
    assert is_c_symmetric(jordan2, found.conjugation)[0]


def test_find_conjugation_normal(rng):
    Q = random_unitary(rng, 3)
    T = Q @ np.diag([0.5, -0.2j, 0.1 + 0.3j]) @ Q.conj().T
    found = find_conjugation(T)
    assert found.verdict == Verdict.SYMMETRIC
    assert found.method in ("normal", "symmetric")
    assert found.residual <= 1e-8


def test_find_conjugation_random_two_by_two(rng):
    for _ in range(20):
        T = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        found = find_conjugation(T)
        assert found.verdict == Verdict.SYMMETRIC
        assert is_c_symmetric(T, found.conjugation)[0]


def test_find_conjugation_direct_sum(jordan2):
    T = scipy.linalg.block_diag(jordan2, np.array([[0.1, 0.5], [0, 0.3]]))
    found = find_conjugation(T)
    assert found.verdict == Verdict.SYMMETRIC
    assert found.method == "direct-sum"
    assert found.details["blocks"] == [2, 2]


def test_find_conjugation_unbalanced_weighted_shift():
    T = np.array([[0, 1, 0], [0, 0, 2], [0, 0, 0]], dtype=complex)
    found = find_conjugation(T)
    assert found.verdict != Verdict.SYMMETRIC
    assert found.conjugation is None


def test_find_conjugation_balanced_weighted_shift():
    T = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    found = find_conjugation(T)
    assert found.verdict == Verdict.SYMMETRIC
    assert is_c_symmetric(T, found.conjugation)[0]


def test_symmetric_intertwiners_contains_witness(jordan2):
    basis = symmetric_intertwiners(jordan2)
    assert basis.shape[1] >= 1
    for col in basis.T:
        X = unvec(col, (2, 2))
        assert opnorm(X - X.T) < 1e-8
        assert opnorm(jordan2 @ X - X @ jordan2.T) < 1e-8


def test_find_unitary_in_span_trivial_cases():
    empty = find_unitary_in_span(np.zeros((4, 0)), [(2, 2)])
    assert empty.proven_absent and empty.blocks is None

    line = find_unitary_in_span(vec(np.eye(2))[:, None] / np.sqrt(2), [(2, 2)])
    assert line.blocks is not None
    assert np.allclose(line.blocks[0], np.eye(2))

    skew = find_unitary_in_span(vec(np.diag([1.0, 0.0]))[:, None], [(2, 2)])
    assert skew.proven_absent and skew.certificate


def test_find_unitary_in_span_searches(rng):
    # span{I, F} contains the unitary F
    basis, _ = np.linalg.qr(np.column_stack([vec(np.eye(2)), vec(FLIP)]).astype(complex))
    found = find_unitary_in_span(basis, [(2, 2)], seed=1)
    assert found.blocks is not None
    assert found.residual < 1e-10


def random_symmetric_unitary(rng, n):
    Q = random_unitary(rng, n)
    return Q @ Q.T


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_general_conjugation_is_isometric_involution(rng, n):
    C = Conjugation(random_symmetric_unitary(rng, n))
    assert is_conjugation(C)
    for _ in range(5):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.vdot(apply(C, y), apply(C, x)) == pytest.approx(np.vdot(x, y))
        assert np.allclose(apply(C, apply(C, x)), x)


def test_c_symmetry_passes_to_the_adjoint(rng, jordan2):
    cases = [(jordan2, Conjugation(FLIP)), (jordan2, Conjugation(np.eye(2))),
             (np.diag([1, 2]), Conjugation(FLIP))]
    for _ in range(5):
        T = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        cases.append((T, Conjugation(random_symmetric_unitary(rng, 3))))
        T2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        cases.append((T2, find_conjugation(T2).conjugation))
    verdicts = set()
    for T, C in cases:
        ok, residual = is_c_symmetric(T, C)
        ok_adj, residual_adj = is_c_symmetric(np.conj(T).T, C)
        assert ok == ok_adj
        assert residual_adj == pytest.approx(residual, abs=1e-10)
        verdicts.add(ok)
    assert verdicts == {True, False}
