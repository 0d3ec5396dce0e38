"""
Tests for defect operators, the characteristic function and the classifier
"""

import numpy as np
import pytest
import scipy.linalg

import corpus
from blaschke import compressed_shift
from charfun import (
    CharSamples,
    Contraction,
    ContractionAnalyzer,
    c00_check,
    c00_report,
    char_eval,
    classify,
    cnu_unitary_split,
    coincide,
    combine_verdicts,
    default_grid,
    defect,
    detect_J,
    is_inner_sampled,
    is_pure_at_origin,
    symmetrize_theta,
    theta_samples,
)
from conjugation import Verdict, find_conjugation
from errors import NoDefect, NotAContraction, OutOfDisk
from numlin import opnorm

S, N, I = Verdict.SYMMETRIC, Verdict.NOT_SYMMETRIC, Verdict.INDETERMINATE


def test_contraction_validates_norm():
    with pytest.raises(NotAContraction):
        Contraction(np.diag([1.01, 0.5]))
    c = Contraction(np.diag([1 + 1e-11, 0.5]))
    assert opnorm(c.T) <= 1


def test_defect_examples():
    zero = defect(np.zeros((3, 3)))
    assert (zero.dT, zero.dTstar) == (3, 3)
    assert np.allclose(zero.DT, np.eye(3))

    rotation = np.array([[0, 1], [-1, 0]], dtype=complex)
    assert defect(rotation).dT == 0

    partial = defect(np.diag([0.6, 1.0]))
    assert partial.dT == 1
    assert np.allclose(partial.DT, np.diag([0.8, 0.0]))


def test_char_eval_of_zero_is_z():
    T = np.zeros((3, 3))
    for z in (0.0, 0.5, 0.3 - 0.4j):
        assert np.allclose(char_eval(T, z), z * np.eye(3))


def test_char_eval_at_origin_is_minus_T():
    T = np.diag([0.3, 0.5])
    assert np.allclose(char_eval(T, 0.0), -T)


def test_char_eval_jordan_block(jordan2):
    for z in default_grid(2):
        value = char_eval(jordan2, z)
        assert value.shape == (1, 1)
        assert abs(value[0, 0]) == pytest.approx(abs(z) ** 2, abs=1e-12)


def test_char_eval_errors():
    with pytest.raises(OutOfDisk):
        char_eval(np.zeros((2, 2)), 1.0)
    with pytest.raises(NoDefect):
        char_eval(np.eye(2), 0.5)


def test_default_grid_is_seeded_and_large_enough():
    g1, g2 = default_grid(20, seed=3), default_grid(20, seed=3)
    assert np.array_equal(g1, g2)
    assert g1.size >= 41
    assert np.all(np.abs(g1) < 1)
    assert default_grid(2, size=24).size == 24


def test_theta_samples_at_origin():
    samples = theta_samples(np.diag([0.3, 0.5]), [0.2, 0.0, 0.4j])
    assert isinstance(samples, CharSamples)
    assert len(samples) == 3
    assert np.allclose(samples.at_origin(), -np.diag([0.3, 0.5]))
    assert is_pure_at_origin(samples)


def test_is_pure_at_origin():
    assert is_pure_at_origin(np.zeros((2, 2)))
    assert not is_pure_at_origin(np.diag([1.0, 0.2]))


def test_is_inner_sampled():
    scaled = is_inner_sampled(lambda z: z * np.eye(2))
    assert scaled.is_inner
    assert scaled.defects[0.9] == pytest.approx(1 - 0.81)
    assert not is_inner_sampled(lambda z: np.array([[0.5]])).is_inner


def test_characteristic_function_of_compressed_shift_is_inner(cubic_blaschke):
    c = compressed_shift(cubic_blaschke)
    d = defect(c)
    assert (d.dT, d.dTstar) == (1, 1)
    assert is_inner_sampled(lambda z: char_eval(c, z, d)).is_inner


def test_cnu_unitary_split():
    assert cnu_unitary_split(np.diag([1, 1j])).unitary_dim == 2
    assert cnu_unitary_split(np.diag([0.5, 0.2])).is_cnu
    split = cnu_unitary_split(np.diag([1.0, 0.5]))
    assert split.unitary_dim == 1
    assert np.allclose(split.projection, np.diag([1, 0]))


def test_c00(jordan2):
    assert c00_check(jordan2)
    assert not c00_check(np.diag([1.0, 0.5]))
    report = c00_report(np.diag([0.5, 0.25]))
    assert report["spectral_radius"] == pytest.approx(0.5)
    assert report["power_norm"] <= 1e-8
    assert report["power_check_passed"] is True
    assert c00_report(np.eye(2))["power_check_passed"] is None


def test_c00_power_check_flags_transient_growth():
    M = np.array([[0.9, 1.0], [0.0, 0.9]])
    report = c00_report(M / np.linalg.norm(M, 2))
    assert report["is_c00"]
    assert report["power_norm"] > 1e-8
    assert report["power_check_passed"] is False


def test_detect_J_scalar_defect(cubic_blaschke):
    found = detect_J(compressed_shift(cubic_blaschke))
    assert found.verdict == S
    assert found.residual <= 1e-8
    assert found.J.U.shape == (1, 1)


def test_detect_J_symmetric_matrix(rng):
    T = corpus.random_symmetric(rng, 3, norm=0.8)
    found = detect_J(T)
    assert found.verdict == S
    assert found.residual <= 1e-8
    samples = theta_samples(T, default_grid(3))
    for M in symmetrize_theta(samples, found.J).values:
        assert opnorm(M - M.T) <= 1e-8


def test_detect_J_unitary_has_no_defect():
    found = detect_J(np.diag([1, -1j]))
    assert found.verdict == S
    assert found.J is None
    assert found.certificate


def test_coincide_identity_and_scalar_rotation(cubic_blaschke):
    grid = default_grid(3)
    phi = cubic_blaschke
    same = coincide(lambda z: phi(z), lambda z: phi(z), grid)
    assert same is not None and same.residual <= 1e-8

    mu = np.exp(0.4j)
    rotated = coincide(lambda z: phi(z), lambda z: mu * phi(z), grid)
    assert rotated is not None
    assert rotated.Ustar[0, 0] * mu * rotated.U[0, 0] == pytest.approx(1.0)


def test_coincide_jordan_block_with_z_squared(jordan2):
    c = Contraction(jordan2)
    found = coincide(lambda z: char_eval(c, z), lambda z: z * z, default_grid(2))
    assert found is not None
    assert found.residual <= 1e-8


def test_coincide_shape_mismatch():
    assert coincide(lambda z: np.eye(2) * z, lambda z: z, default_grid(2)) is None


@pytest.mark.parametrize("first,second,expected,flag", [
    (S, S, S, False),
    (S, N, S, True),
    (N, S, I, True),
    (I, S, S, False),
    (I, N, N, False),
    (N, I, N, False),
    (I, I, I, False),
])
def test_combine_verdicts(first, second, expected, flag):
    assert combine_verdicts(first, second) == (expected, flag)


def test_classify_two_by_two(rng):
    T = corpus.random_contraction(rng, 2, norm=0.9)
    report = classify(T)
    assert report.verdict_conjugation == S
    assert report.verdict_theta == S
    assert report.verdict == S
    assert not report.disagreement
    assert opnorm(report.symmetric_form - report.symmetric_form.T) < 1e-10


def test_classify_compressed_shift(cubic_blaschke):
    report = classify(compressed_shift(cubic_blaschke))
    assert report.verdict == S
    assert report.conjugation_residual <= 1e-6
    assert (report.dT, report.dTstar) == (1, 1)
    assert report.is_cnu and report.is_c00
    assert report.pure_at_origin


def test_classify_direct_sum(jordan2, cubic_blaschke):
    T = scipy.linalg.block_diag(0.9 * jordan2, compressed_shift(cubic_blaschke).T)
    assert classify(T).verdict == S


def test_classification_report_to_dict(jordan2):
    out = classify(jordan2).to_dict()
    assert out["verdict"] == "SYMMETRIC"
    assert out["defects"] == {"dT": 1, "dTstar": 1}
    assert set(out["residuals"]) == {"conjugation", "theta"}
    assert isinstance(out["witnesses"]["conjugation"], list)


def test_defect_witness_intertwines(rng):
    # C D_T = D_T* C for a C-symmetric contraction
    T = corpus.random_contraction(rng, 2, norm=0.7)
    report = classify(T)
    d = defect(T)
    U = report.conjugation
    assert opnorm(d.DTstar @ U - U @ np.conj(d.DT)) <= 1e-6


class TestContractionAnalyzer:
    def test_reports_are_dicts(self, jordan2):
        analyzer = ContractionAnalyzer(0.9 * jordan2)
        defects = analyzer.get_defect_data()
        assert defects["dT"] == 2
        samples = analyzer.get_characteristic_samples([0.0, 0.5])
        assert len(samples["values"]) == 2
        assert analyzer.get_conjugation()["verdict"] == "SYMMETRIC"
        assert analyzer.get_j_detection()["verdict"] == "SYMMETRIC"
        structure = analyzer.get_structure()
        assert structure["is_cnu"]
        assert structure["c00"]["is_c00"]

    def test_unitary_input_reports_error_entry(self):
        analyzer = ContractionAnalyzer(np.diag([1, 1j]))
        assert "error" in analyzer.get_characteristic_samples()
        assert analyzer.get_structure()["pure_at_origin"] is None

    def test_print_summary(self, capsys, jordan2):
        report = ContractionAnalyzer(jordan2).print_summary()
        printed = capsys.readouterr().out
        assert "CONTRACTION ANALYSIS SUMMARY" in printed
        assert "=" * 60 in printed
        assert report["verdict"] == "SYMMETRIC"

    def test_comprehensive_analysis(self, jordan2):
        analysis = ContractionAnalyzer(0.5 * jordan2).get_comprehensive_analysis()
        assert analysis["dimension"] == 2
        assert analysis["norm"] == pytest.approx(0.5)
        assert analysis["classification"]["verdict"] == "SYMMETRIC"
        assert analysis["conjugation"]["method"] is not None


@pytest.mark.slow
def test_conjugation_and_j_routes_never_contradict(rng):
    seen = set()
    for n in range(2, 9):
        instances = [corpus.random_contraction(rng, n), corpus.random_symmetric(rng, n)]
        instances.append(np.diag(np.linspace(0.5, 1, n - 1), 1))
        for T in instances:
            first = find_conjugation(T).verdict
            second = detect_J(T).verdict
            assert {first, second} != {S, N}
            seen.add(first)
    assert S in seen


def test_char_eval_is_holomorphic(rng):
    h = 1e-4
    for n in (2, 3, 5):
        T = corpus.random_contraction(rng, n, norm=0.9)
        d = defect(T)
        for z in default_grid(n, size=8):
            dx = char_eval(T, z + h, d) - char_eval(T, z - h, d)
            dy = char_eval(T, z + 1j * h, d) - char_eval(T, z - 1j * h, d)
            assert opnorm((dx + 1j * dy) / (4 * h)) <= 1e-6


def test_cnu_part_of_symmetric_matrix_with_unitary_summand(rng):
    T = scipy.linalg.block_diag(corpus.random_symmetric(rng, 3, norm=0.8), [[np.exp(0.4j)]])
    assert classify(T).verdict == S
    split = cnu_unitary_split(T)
    assert split.unitary_dim == 1
    W = scipy.linalg.null_space(split.basis.conj().T)
    cnu = W.conj().T @ T @ W
    assert cnu_unitary_split(cnu).is_cnu
    assert classify(cnu).verdict == S
