import math
from fractions import Fraction

import numpy as np
import pytest

from symfact.certkit import verify_certificate
from symfact.errors import (
    DeterminantObstruction,
    DimensionNotDivisible,
    MultiplicityConstraint,
    NotCommuting,
    NotFourthRoot,
    NotIntertwiner,
    OddDimension,
    RankMismatch,
    SpectrumNotConjSymmetric,
)
from symfact.factor import (
    FiniteSpectrumSpec,
    RationalAngle,
    clock_shift,
    conjugate_pair_two_factor,
    finite_spectrum_four_factor,
    finite_spectrum_unitary_four_factor,
    intertwiner_to_symmetry,
    lemma_four_sym_step,
    lemma_two_uni_step,
    radjavi_four_factor,
    scalar_four_factor,
    three_factor_scalar,
    two_symmetry_factor,
    weyl_scalar_four_factor,
)
from symfact.matcore import block_diag, haar_random_unitary

from oracles import (
    cofactor_det,
    commuting_instance,
    opnorm,
    product,
    random_unitary,
    symmetry_defect,
    unit,
)

SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def check(cert, target, bound):
    """Independent re-check: factors are symmetries and multiply to the target."""
    assert np.array_equal(cert.target, target) or opnorm(cert.target - target) == 0
    for F in cert.factors:
        assert symmetry_defect(F) <= bound
    assert opnorm(product(cert.factors) - target) <= bound


# -- rational angles ---------------------------------------------------------

def test_rational_angle_normalizes():
    a = RationalAngle(-3, 12)
    assert (a.p, a.q) == (3, 4)
    assert RationalAngle(5, 4) == RationalAngle(1, 4)
    assert a.value == pytest.approx(-1j)
    with pytest.raises(ValueError):
        RationalAngle(1, 0)


@pytest.mark.parametrize(
    "p, q, pi_frac, block",
    [(0, 1, Fraction(0), 1), (1, 2, Fraction(1), 1), (1, 4, Fraction(1, 2), 4), (1, 6, Fraction(1, 3), 6), (1, 3, Fraction(2, 3), 6)],
)
def test_rational_angle_block_size(p, q, pi_frac, block):
    a = RationalAngle(p, q)
    assert a.pi_fraction == pi_frac
    assert a.min_block_size == block


def test_rational_angle_from_complex():
    assert RationalAngle.from_complex(unit(2 * math.pi * 5 / 12)) == RationalAngle(5, 12)
    with pytest.raises(ValueError):
        RationalAngle.from_complex(unit(math.sqrt(2)), max_denominator=16)


def test_finite_spectrum_spec_validation():
    with pytest.raises(ValueError):
        FiniteSpectrumSpec(((RationalAngle(1, 4), 2), (RationalAngle(5, 4), 2)))
    with pytest.raises(ValueError):
        FiniteSpectrumSpec(((RationalAngle(1, 4), 0),))
    assert FiniteSpectrumSpec(((RationalAngle(1, 4), 2), (RationalAngle(0, 1), 3))).dim == 5


# -- two symmetries ------------------------------------------------------------

def test_conjugate_pair_scalar_i():
    cert = conjugate_pair_two_factor(np.array([[1j]]))
    assert np.array_equal(cert.factors[0], SWAP)
    assert np.array_equal(cert.factors[1], np.array([[0, -1j], [1j, 0]]))
    assert np.array_equal(cert.product(), np.diag([1j, -1j]))
    assert cert.method == "conjugate_pair"


def test_conjugate_pair_identity():
    cert = conjugate_pair_two_factor(np.eye(2))
    swap4 = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert np.array_equal(cert.factors[0], swap4)
    assert np.array_equal(cert.factors[1], swap4)
    assert np.array_equal(cert.product(), np.eye(4))


def test_conjugate_pair_haar():
    A = haar_random_unitary(3, 5)
    cert = conjugate_pair_two_factor(A)
    check(cert, block_diag(A, A.conj().T), 1e-12)


def test_two_symmetry_identity():
    cert = two_symmetry_factor(np.eye(3))
    assert all(np.allclose(F, np.eye(3), atol=1e-15) for F in cert.factors)


def test_two_symmetry_conjugate_pair():
    U = np.diag([unit(math.pi / 3), unit(-math.pi / 3)])
    check(two_symmetry_factor(U), U, 1e-12)


def test_two_symmetry_rejects_unpaired_i():
    with pytest.raises(SpectrumNotConjSymmetric):
        two_symmetry_factor(1j * np.eye(2))


def test_two_symmetry_conjugated_instance(rng):
    Q = random_unitary(5, rng)
    lam = [unit(0.7), unit(-0.7), -1, unit(2.1), unit(-2.1)]
    U = (Q * lam) @ Q.conj().T
    check(two_symmetry_factor(U), U, 1e-10)


def test_intertwiner_identity_branch(rng):
    W = np.diag([1, -1, 1]).astype(complex)
    assert np.allclose(intertwiner_to_symmetry(np.eye(3), W), W, atol=1e-14)


def test_intertwiner_exact_case():
    U = np.diag([1j, -1j])
    S = intertwiner_to_symmetry(U, SWAP)
    assert np.allclose(S, SWAP, atol=1e-14)
    # hand multiplication: U S = [[0, i], [-i, 0]] = S U*
    assert np.allclose(U @ S, np.array([[0, 1j], [-1j, 0]]), atol=1e-14)
    assert np.allclose(U @ S, S @ U.conj().T, atol=1e-14)


def test_intertwiner_general():
    U = np.diag([unit(math.pi / 5), unit(-math.pi / 5)])
    S = intertwiner_to_symmetry(U, SWAP)
    assert symmetry_defect(S) <= 1e-10
    assert opnorm(U @ S - S @ U.conj().T) <= 1e-10


def test_intertwiner_rejects_non_intertwiner():
    with pytest.raises(NotIntertwiner):
        intertwiner_to_symmetry(np.diag([1j, 1j]), SWAP)


# -- four symmetries -----------------------------------------------------------

def test_radjavi_mixed_spectrum():
    U = np.diag([unit(math.pi / 3), unit(-math.pi / 3), -1])
    cert = radjavi_four_factor(U)
    assert cert.length == 4
    check(cert, U, 1e-10)


def test_radjavi_i_identity():
    U = 1j * np.eye(2)
    check(radjavi_four_factor(U), U, 1e-10)


def test_radjavi_determinant_obstruction():
    with pytest.raises(DeterminantObstruction) as info:
        radjavi_four_factor(unit(math.pi / 4) * np.eye(2))
    assert info.value.distance == pytest.approx(math.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("n, mode", [(2, "plus_one"), (5, "minus_one"), (6, "minus_one"), (7, "plus_one")])
def test_radjavi_factor_determinants(n, mode):
    U = haar_random_unitary(n, 100 + n, mode)
    cert = radjavi_four_factor(U)
    dets = [cofactor_det(F) for F in cert.factors]
    for d in dets:
        assert min(abs(d - 1), abs(d + 1)) <= 1e-9
    assert abs(np.prod(dets) - cofactor_det(U)) <= 1e-9
    assert verify_certificate(cert).passed


def test_clock_shift_relation():
    for n in range(1, 13):
        C, S = clock_shift(n)
        w = unit(2 * math.pi / n)
        for k in range(n):
            Ck = np.linalg.matrix_power(C, k)
            assert opnorm(Ck @ S - w**k * S @ Ck) <= 1e-12


@pytest.mark.parametrize("k, n", [(1, 2), (0, 1), (1, 3)])
def test_weyl_examples(k, n):
    cert = weyl_scalar_four_factor(k, n)
    target = unit(math.pi * k / n) * np.eye(2 * n)
    assert cert.dim == 2 * n
    check(cert, target, 1e-12)


def test_weyl_third_factor_squares_to_identity():
    R3 = weyl_scalar_four_factor(1, 2).factors[2]
    assert opnorm(R3 @ R3 - np.eye(4)) <= 1e-15


def test_scalar_four_factor_examples():
    check(scalar_four_factor(RationalAngle(1, 4), 4), 1j * np.eye(4), 1e-12)
    cert = scalar_four_factor(RationalAngle(0, 1), 3)
    assert all(np.array_equal(F, np.eye(3)) for F in cert.factors)
    with pytest.raises(MultiplicityConstraint) as info:
        scalar_four_factor(RationalAngle(1, 4), 2)
    assert info.value.block_size == 4


def test_scalar_minus_one_any_dimension():
    check(scalar_four_factor(RationalAngle(1, 2), 3), -np.eye(3), 0)


def test_finite_spectrum_examples():
    i4 = RationalAngle(1, 4)
    check(finite_spectrum_four_factor(FiniteSpectrumSpec(((i4, 4),))), 1j * np.eye(4), 1e-12)
    for m in (1, 2, 5):
        cert = finite_spectrum_four_factor(FiniteSpectrumSpec(((RationalAngle(0, 1), m),)))
        assert all(np.array_equal(F, np.eye(m)) for F in cert.factors)
    spec = FiniteSpectrumSpec(((i4, 4), (RationalAngle(1, 2), 2)))
    cert = finite_spectrum_four_factor(spec)
    check(cert, np.diag([1j] * 4 + [-1] * 2), 1e-12)


def test_finite_spectrum_unitary_in_rotated_basis(rng):
    Q = random_unitary(8, rng)
    lam = [1j] * 4 + [-1, -1, 1, 1]
    U = (Q * lam) @ Q.conj().T
    check(finite_spectrum_unitary_four_factor(U), U, 1e-9)


def test_finite_spectrum_unitary_rejects_irrational():
    U = np.diag([unit(math.sqrt(2)), unit(-math.sqrt(2))])
    with pytest.raises(MultiplicityConstraint):
        finite_spectrum_unitary_four_factor(U, max_denominator=16)


def test_three_factor_scalar_i_explicit():
    cert = three_factor_scalar(1j, 2)
    expected = [SWAP, np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    for F, E in zip(cert.factors, expected):
        assert np.max(np.abs(F - E)) <= 1e-15
    assert np.max(np.abs(product(cert.factors) - 1j * np.eye(2))) <= 1e-15


def test_three_factor_scalar_minus_one():
    cert = three_factor_scalar(-1, 4)
    assert np.array_equal(cert.factors[0], -np.eye(4))
    assert np.array_equal(cert.factors[1], np.eye(4))
    assert np.array_equal(cert.factors[2], np.eye(4))


def test_three_factor_scalar_minus_i():
    check(three_factor_scalar(-1j, 6), -1j * np.eye(6), 1e-15)


def test_three_factor_scalar_rejections():
    with pytest.raises(NotFourthRoot):
        three_factor_scalar(unit(2 * math.pi / 3), 2)
    with pytest.raises(OddDimension):
        three_factor_scalar(1j, 3)


# -- lemma steps ---------------------------------------------------------------

def two_uni_residual(U, V, step):
    return opnorm(U @ V - step.R1 @ step.R2 @ U @ step.tail())


def test_two_uni_identity():
    step = lemma_two_uni_step(np.eye(2), np.eye(2))
    assert opnorm(step.R1 @ step.R2 - np.eye(2)) <= 1e-15
    assert opnorm(step.tail() - np.eye(2)) <= 1e-15


def test_two_uni_haar():
    U, V = haar_random_unitary(4, 1), haar_random_unitary(4, 2)
    step = lemma_two_uni_step(U, V)
    assert two_uni_residual(U, V, step) <= 1e-9
    assert np.linalg.matrix_rank(step.E, tol=1e-8) == 2
    assert symmetry_defect(step.R1) <= 1e-10 and symmetry_defect(step.R2) <= 1e-10


def test_two_uni_commuting_tail():
    U, V = np.eye(4), np.diag([1j, 1j, -1j, -1j])
    step = lemma_two_uni_step(U, V)
    assert opnorm(step.Vp @ step.E - step.E @ step.Vp) <= 1e-10
    assert two_uni_residual(U, V, step) <= 1e-10


def test_two_uni_rejects_odd():
    with pytest.raises(OddDimension):
        lemma_two_uni_step(np.eye(3), np.eye(3))


def four_sym_residual(U, E1, B1, step):
    return opnorm(U - product(list(step.R)) @ step.tail(E1, B1))


def test_four_sym_identity():
    E1 = np.diag([1, 1, 1, 1, 0, 0]).astype(complex)
    step = lemma_four_sym_step(np.eye(6), E1, E1)
    assert four_sym_residual(np.eye(6), E1, E1, step) <= 1e-10
    # the identity splits into cancelling pairs
    assert opnorm(step.R[0] @ step.R[1] - np.eye(6)) <= 1e-10
    assert opnorm(step.R[2] @ step.R[3] - np.eye(6)) <= 1e-10


def test_four_sym_block_scalars(rng):
    u = [unit(t) for t in rng.uniform(0, 2 * math.pi, 3)]
    U = np.diag([u[0], u[0], u[1], u[1], u[2], u[2]])
    E1 = np.diag([1, 1, 1, 1, 0, 0]).astype(complex)
    step = lemma_four_sym_step(U, E1, E1)
    assert four_sym_residual(U, E1, E1, step) <= 1e-10
    assert np.linalg.matrix_rank(step.E2, tol=1e-8) == 1
    assert opnorm(step.E2 @ E1) <= 1e-10


def test_four_sym_haar_commuting_pair():
    U, E1, B1 = commuting_instance(12, np.random.default_rng(9))
    step = lemma_four_sym_step(U, E1, B1)
    assert four_sym_residual(U, E1, B1, step) <= 1e-9
    assert np.linalg.matrix_rank(step.E2, tol=1e-8) == 2
    for R in step.R:
        assert symmetry_defect(R) <= 1e-9
    # B2 lives on range(E2)
    assert opnorm(step.B2.conj().T @ step.B2 - step.E2) <= 1e-9


def test_four_sym_validation(rng):
    with pytest.raises(DimensionNotDivisible):
        lemma_four_sym_step(np.eye(9), np.eye(9), np.eye(9))
    E1 = np.diag([1, 1, 1, 1, 0, 0]).astype(complex)
    with pytest.raises(RankMismatch):
        lemma_four_sym_step(np.eye(6), np.diag([1, 1, 1, 0, 0, 0]), np.diag([1, 1, 1, 0, 0, 0]))
    with pytest.raises(NotCommuting):
        lemma_four_sym_step(random_unitary(6, rng), E1, E1)


# -- certificates --------------------------------------------------------------

def test_certificate_conjugation_invariance(rng):
    U = haar_random_unitary(5, 21, "minus_one")
    cert = radjavi_four_factor(U)
    Q = random_unitary(5, rng)
    moved = cert.conjugate(Q)
    check(moved, Q @ U @ Q.conj().T, 1e-9)
    assert verify_certificate(moved).passed


def test_padding_keeps_product():
    cert = two_symmetry_factor(np.diag([1j, -1j]))
    padded = cert.padded(4)
    assert padded.length == 4
    check(padded, cert.target, 1e-12)
