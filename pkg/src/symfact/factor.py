"""Constructive factorizations of unitaries into products of symmetries.

A symmetry is a self-adjoint unitary (S = S*, S^2 = I). Every routine here
returns the factors in left-to-right order, so ``factors[0] @ factors[1] @ ...``
reproduces the target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
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
from .matcore import (
    DEFAULT_TOL,
    TWO_PI,
    Tolerance,
    adjoint,
    as_matrix,
    block_diag,
    operator_norm,
    principal_angle,
    require_unitary,
    sign_distance,
    spectral_decompose,
)

METHODS = (
    "symmetry",
    "conjugate_pair",
    "two_symmetry",
    "radjavi_four",
    "weyl_scalar",
    "finite_spectrum_four",
    "three_scalar",
    "lemma_two_uni",
    "lemma_four_sym",
)

_SWAP = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def ordered_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(factors[0], dtype=np.complex128)
    for F in factors[1:]:
        out = out @ F
    return out


@dataclass(frozen=True)
class FactorizationCertificate:
    target: np.ndarray
    factors: tuple
    method: str
    residual: float
    tol: Tolerance = field(default=DEFAULT_TOL)

    @property
    def length(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    def product(self) -> np.ndarray:
        return ordered_product(self.factors)

    def conjugate(self, Q) -> "FactorizationCertificate":
        """Certificate for ``Q U Q*`` obtained by conjugating every factor."""
        Q = np.asarray(Q, dtype=np.complex128)
        Qh = adjoint(Q)
        return make_certificate(
            Q @ self.target @ Qh, [Q @ F @ Qh for F in self.factors], self.method, self.tol
        )

    def padded(self, length: int) -> "FactorizationCertificate":
        """Append identity factors up to ``length``."""
        eye = np.eye(self.dim, dtype=np.complex128)
        extra = [eye] * max(0, length - self.length)
        return make_certificate(self.target, list(self.factors) + extra, self.method, self.tol)


def make_certificate(target, factors, method: str, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    if method not in METHODS:
        raise ValueError(f"unknown method tag {method!r}")
    target = np.asarray(target, dtype=np.complex128)
    factors = tuple(np.asarray(F, dtype=np.complex128) for F in factors)
    residual = operator_norm(ordered_product(factors) - target)
    return FactorizationCertificate(target, factors, method, residual, tol)


# -- rational angles ---------------------------------------------------------

@dataclass(frozen=True)
class RationalAngle:
    """The unit complex number exp(2*pi*i*p/q), stored as a reduced fraction with 0 <= p < q."""

    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be positive")
        frac = Fraction(self.p, self.q)
        p = frac.numerator % frac.denominator
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", frac.denominator)

    @classmethod
    def from_fraction(cls, x) -> "RationalAngle":
        x = Fraction(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def from_complex(cls, z: complex, max_denominator: int = 64, atol: float = 1e-9) -> "RationalAngle":
        """Best rational angle for a unit complex ``z``; raises if none is within ``atol``."""
        t = float(principal_angle(z)) / TWO_PI
        angle = cls.from_fraction(Fraction(t).limit_denominator(max_denominator))
        if abs(angle.value - z) > atol:
            raise ValueError(f"{z!r} is not a root of unity of order <= {max_denominator}")
        return angle

    @property
    def value(self) -> complex:
        if 4 % self.q == 0:
            return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[4 * self.p // self.q]
        return complex(np.exp(2j * math.pi * self.p / self.q))

    @property
    def pi_fraction(self) -> Fraction:
        """The reduced fraction p'/q' in [0, 2) with value = exp(i*pi*p'/q')."""
        return Fraction(2 * self.p, self.q)

    @property
    def min_block_size(self) -> int:
        """Smallest dimension in which this scalar is built from four symmetries here.

        +1 and -1 are themselves symmetries, so any dimension works; otherwise
        a Weyl pair of size q' is doubled, giving 2q'.
        """
        q_prime = self.pi_fraction.denominator
        return 1 if q_prime == 1 else 2 * q_prime


@dataclass(frozen=True)
class FiniteSpectrumSpec:
    """Eigenvalue/multiplicity pairs of a finite-spectrum unitary."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((a, int(m)) for a, m in self.entries)
        if not entries:
            raise ValueError("spectrum must be non-empty")
        seen = set()
        for angle, mult in entries:
            if not isinstance(angle, RationalAngle):
                raise TypeError("angles must be RationalAngle instances")
            if mult < 1:
                raise ValueError("multiplicities must be positive")
            if angle in seen:
                raise ValueError(f"duplicate eigenvalue {angle}")
            seen.add(angle)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.entries)

    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.full(m, a.value) for a, m in self.entries])


# -- two symmetries ----------------------------------------------------------

def _pair_blocks(mu: complex) -> tuple[np.ndarray, np.ndarray]:
    """Two symmetries whose product is diag(mu, conj(mu))."""
    return _SWAP.copy(), np.array([[0, np.conj(mu)], [mu, 0]], dtype=np.complex128)


def conjugate_pair_two_factor(A, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """diag(A, A*) = [[0, I], [I, 0]] @ [[0, A*], [A, 0]]."""
    A = require_unitary(A, tol, "A")
    m = A.shape[0]
    eye, zero = np.eye(m), np.zeros((m, m))
    Ah = adjoint(A)
    S = np.block([[zero, eye], [eye, zero]]).astype(np.complex128)
    T = np.block([[zero, Ah], [A, zero]])
    return make_certificate(block_diag(A, Ah), [S, T], "conjugate_pair", tol)


def diagonal_two_factor(diag, pairs, singles) -> tuple[np.ndarray, np.ndarray]:
    """Two symmetries with product diag(d) for a diagonal whose entries split
    into conjugate pairs (index tuples) and +-1 singletons."""
    n = len(diag)
    S = np.zeros((n, n), dtype=np.complex128)
    T = np.zeros((n, n), dtype=np.complex128)
    for a, b in pairs:
        s_blk, t_blk = _pair_blocks(diag[a])
        ix = np.ix_([a, b], [a, b])
        S[ix] = s_blk
        T[ix] = t_blk
    for a in singles:
        S[a, a] = diag[a].real
        T[a, a] = 1.0
    return S, T


def conjugate_pairing(eigenvalues, cluster_tol: float):
    """Greedy pairing of a unit-circle multiset with its conjugate.

    Eigenvalues within ``cluster_tol`` of +1 or -1 are self-paired. Returns
    ``(pairs, singles, unmatched)`` where ``unmatched`` is ``None`` or
    ``(index, margin)`` for the first eigenvalue lacking a conjugate partner.
    """
    lam = np.asarray(eigenvalues, dtype=np.complex128)
    n = len(lam)
    singles, rest = [], []
    for j in range(n):
        if abs(lam[j] - 1) <= cluster_tol or abs(lam[j] + 1) <= cluster_tol:
            singles.append(j)
        else:
            rest.append(j)
    rest.sort(key=lambda j: float(principal_angle(lam[j])))
    used = set()
    pairs = []
    for j in rest:
        if j in used:
            continue
        candidates = [k for k in rest if k != j and k not in used]
        if not candidates:
            return pairs, singles, (j, math.inf)
        dist = [abs(lam[k] - np.conj(lam[j])) for k in candidates]
        best = int(np.argmin(dist))
        if dist[best] > cluster_tol:
            return pairs, singles, (j, dist[best])
        k = candidates[best]
        used.update((j, k))
        pairs.append((j, k))
    return pairs, singles, None


def two_symmetry_factor(U, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """Factor U = S T when the spectrum of U is closed under conjugation."""
    U = require_unitary(U, tol)
    dec = spectral_decompose(U, tol)
    lam = dec.eigenvalues
    pairs, singles, unmatched = conjugate_pairing(lam, tol.cluster_tol)
    if unmatched is not None:
        j, margin = unmatched
        raise SpectrumNotConjSymmetric(lam[j], margin)

    # the second eigenvalue of each pair is replaced by the exact conjugate of the
    # first; the perturbation is below cluster_tol
    d = lam.copy()
    for a, b in pairs:
        mu = 0.5 * (lam[a] + np.conj(lam[b]))
        mu /= abs(mu)
        d[a], d[b] = mu, np.conj(mu)
    for a in singles:
        d[a] = 1.0 if lam[a].real > 0 else -1.0
    S, T = diagonal_two_factor(d, pairs, singles)
    Q, Qh = dec.basis, adjoint(dec.basis)
    return make_certificate(U, [Q @ S @ Qh, Q @ T @ Qh], "two_symmetry", tol)


def intertwiner_to_symmetry(U, W, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Symmetry S with U S = S U*, from a unitary W satisfying W* U W = U*.

    W^2 commutes with U, so V = sqrt(W^2), taken through the spectral
    decomposition of W^2, commutes with U and W, and S = V* W is a symmetry.
    """
    U = require_unitary(U, tol, "U")
    W = require_unitary(W, tol, "W")
    if U.shape != W.shape:
        raise ValueError("U and W must have the same shape")
    defect = operator_norm(adjoint(W) @ U @ W - adjoint(U))
    if defect > tol.verify_tol:
        raise NotIntertwiner(f"||W* U W - U*|| = {defect:.3e} exceeds verify_tol")

    dec = spectral_decompose(W @ W, tol, cluster=True)
    theta = principal_angle(dec.eigenvalues)
    # branch cut of the square root placed in the widest spectral gap
    cut = _widest_gap_cut(theta)
    theta = np.mod(theta - cut, TWO_PI) + cut
    V = dec.apply(lambda _: np.exp(0.5j * theta))
    S = adjoint(V) @ W
    return 0.5 * (S + adjoint(S))


def _widest_gap_cut(theta: np.ndarray) -> float:
    t = np.sort(np.unique(theta))
    if len(t) == 0:
        return 0.0
    gaps = np.diff(np.concatenate([t, [t[0] + TWO_PI]]))
    j = int(np.argmax(gaps))
    return float(t[j] + 0.5 * gaps[j]) - TWO_PI if j == len(t) - 1 else float(t[j] + 0.5 * gaps[j])


# -- four symmetries ---------------------------------------------------------

def radjavi_diagonals(lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal unitaries V, W with diag(lam) = V W.

    With prefix products p_j = lam_1 ... lam_j:
    V = (p_1, conj p_1, p_3, conj p_3, ...) and W = (1, p_2, conj p_2, p_4, ...).
    The unpaired last entry (of V for odd n, of W for even n) is det = p_n.
    """
    n = len(lam)
    p = np.cumprod(lam)
    V = np.empty(n, dtype=np.complex128)
    W = np.empty(n, dtype=np.complex128)
    for j in range(n):  # zero-based j corresponds to position j + 1
        V[j] = p[j] if j % 2 == 0 else np.conj(p[j - 1])
        if j == 0:
            W[j] = 1.0
        else:
            W[j] = p[j] if j % 2 == 1 else np.conj(p[j - 1])
    return V, W


def radjavi_four_factor(U, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """Four-symmetry factorization of a unitary with determinant +1 or -1."""
    U = require_unitary(U, tol)
    n = U.shape[0]
    dec = spectral_decompose(U, tol)
    lam = dec.eigenvalues.copy()
    det = complex(np.prod(lam))
    sign, dist = sign_distance(det)
    if dist > tol.verify_tol:
        raise DeterminantObstruction(det, dist)

    phi = np.angle(det / sign)
    lam *= np.exp(-1j * phi / n)
    V, W = radjavi_diagonals(lam)
    # V pairs positions (0,1), (2,3), ...; W pairs (1,2), (3,4), ...
    v_pairs = [(j, j + 1) for j in range(0, n - 1, 2)]
    w_pairs = [(j, j + 1) for j in range(1, n - 1, 2)]
    v_singles = [n - 1] if n % 2 == 1 else []
    w_singles = [0] + ([n - 1] if n % 2 == 0 and n > 1 else [])
    for j in v_singles:
        V[j] = sign
    for j in w_singles:
        W[j] = 1.0 if j == 0 else sign

    R1, R2 = diagonal_two_factor(V, v_pairs, v_singles)
    R3, R4 = diagonal_two_factor(W, w_pairs, w_singles)
    Q, Qh = dec.basis, adjoint(dec.basis)
    factors = [Q @ R @ Qh for R in (R1, R2, R3, R4)]
    return make_certificate(U, factors, "radjavi_four", tol)


def clock_shift(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Clock C = diag(1, w, ..., w^(n-1)) and cyclic shift S (S e_j = e_{j+1}), with C S = w S C."""
    omega = np.exp(2j * math.pi / n)
    C = np.diag(omega ** np.arange(n)).astype(np.complex128)
    S = np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)
    return C, S


def weyl_symmetries(A, B, theta: float) -> list[np.ndarray]:
    """Four symmetries with product exp(i*pi*theta) I, for unitaries with A B = exp(2*pi*i*theta) B A."""
    m = A.shape[0]
    eye, zero = np.eye(m), np.zeros((m, m))
    Ah, Bh = adjoint(A), adjoint(B)
    phase = np.exp(1j * math.pi * theta)
    R1 = np.block([[zero, A], [Ah, zero]])
    R2 = np.block([[zero, eye], [eye, zero]]).astype(np.complex128)
    R3 = phase * np.block([[zero, Ah @ B], [A @ Bh, zero]])
    R4 = np.block([[zero, B], [Bh, zero]])
    return [R1, R2, R3, R4]


def weyl_scalar_four_factor(k: int, n: int, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """exp(i*pi*k/n) I_{2n} as four symmetries built from the pair (C^k, S)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    C, S = clock_shift(n)
    Ck = np.linalg.matrix_power(C, k % n)
    factors = weyl_symmetries(Ck, S, k / n)
    target = np.exp(1j * math.pi * k / n) * np.eye(2 * n, dtype=np.complex128)
    return make_certificate(target, factors, "weyl_scalar", tol)


def _scalar_factors(angle: RationalAngle, dim: int) -> list[np.ndarray]:
    block = angle.min_block_size
    if dim % block != 0:
        raise MultiplicityConstraint(angle.value, dim, block)
    if block == 1:
        sign = round(angle.value.real)
        eye = np.eye(dim, dtype=np.complex128)
        return [sign * eye, eye, eye, eye]
    frac = angle.pi_fraction
    base = weyl_scalar_four_factor(frac.numerator, frac.denominator).factors
    copies = dim // block
    return [block_diag(*([R] * copies)) for R in base]


def scalar_four_factor(alpha: RationalAngle, dim: int, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """alpha I_dim as four symmetries; requires dim divisible by ``alpha.min_block_size``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    factors = _scalar_factors(alpha, dim)
    return make_certificate(alpha.value * np.eye(dim, dtype=np.complex128), factors, "weyl_scalar", tol)


def finite_spectrum_four_factor(spec: FiniteSpectrumSpec, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """Blockwise four-symmetry factorization of the diagonal unitary with spectrum ``spec``."""
    per_block = [_scalar_factors(angle, mult) for angle, mult in spec.entries]
    factors = [block_diag(*[blk[j] for blk in per_block]) for j in range(4)]
    target = np.diag(spec.diagonal())
    return make_certificate(target, factors, "finite_spectrum_four", tol)


def finite_spectrum_unitary_four_factor(
    U, tol: Tolerance = DEFAULT_TOL, max_denominator: int = 64
) -> FactorizationCertificate:
    """Four-symmetry factorization of a unitary whose eigenvalues are roots of unity.

    The spectrum is clustered, each cluster matched to a rational angle with
    denominator at most ``max_denominator``, factored blockwise and conjugated
    back into the original basis.
    """
    U = require_unitary(U, tol)
    dec = spectral_decompose(U, tol, cluster=True)
    entries, columns = [], []
    for rep, idx in dec.clusters(tol):
        try:
            angle = RationalAngle.from_complex(rep, max_denominator, atol=tol.verify_tol)
        except ValueError as exc:
            raise MultiplicityConstraint(rep, len(idx), 0) from exc
        entries.append((angle, len(idx)))
        columns.extend(idx.tolist())
    cert = finite_spectrum_four_factor(FiniteSpectrumSpec(tuple(entries)), tol)
    Q = dec.basis[:, columns]
    Qh = adjoint(Q)
    return make_certificate(U, [Q @ F @ Qh for F in cert.factors], "finite_spectrum_four", tol)


# -- three symmetries --------------------------------------------------------

FOURTH_ROOTS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def nearest_fourth_root(alpha: complex, atol: float) -> complex:
    for root in FOURTH_ROOTS:
        if abs(alpha - root) <= atol:
            return root
    raise NotFourthRoot(f"{alpha!r} is not in {{1, i, -1, -i}}")


def three_factor_scalar(alpha: complex, dim: int, tol: Tolerance = DEFAULT_TOL) -> FactorizationCertificate:
    """alpha I as three symmetries for alpha in {1, i, -1, -i}."""
    root = nearest_fourth_root(complex(alpha), tol.verify_tol)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    eye = np.eye(dim, dtype=np.complex128)
    if root.imag == 0:
        factors = [root.real * eye, eye, eye]
    else:
        if dim % 2:
            raise OddDimension(f"{root} I needs an even dimension, got {dim}")
        m = dim // 2
        I, Z = np.eye(m), np.zeros((m, m))
        s = root.imag  # +1 for i, -1 for -i
        factors = [
            np.block([[Z, I], [I, Z]]),
            np.block([[Z, -1j * s * I], [1j * s * I, Z]]),
            np.block([[I, Z], [Z, -I]]),
        ]
    return make_certificate(root * eye, factors, "three_scalar", tol)


# -- lemma steps -------------------------------------------------------------

@dataclass(frozen=True)
class TwoUnitaryStep:
    """U V = R1 R2 U (Vp E + I - E)."""

    R1: np.ndarray
    R2: np.ndarray
    E: np.ndarray
    Vp: np.ndarray

    def tail(self) -> np.ndarray:
        eye = np.eye(self.E.shape[0])
        return self.Vp @ self.E + eye - self.E


def lemma_two_uni_step(U, V, tol: Tolerance = DEFAULT_TOL) -> TwoUnitaryStep:
    """Peel two symmetries off a product of unitaries of even dimension 2m.

    With V = W diag(V1, V2) W* (sorted eigenvalues split in halves),
    U V = (U W diag(V1, V1*) W* U*) U W diag(I, V1 V2) W*, and the first
    factor is a conjugated pair block, hence two symmetries.
    """
    U = require_unitary(U, tol, "U")
    V = require_unitary(V, tol, "V")
    if U.shape != V.shape:
        raise ValueError("U and V must have the same shape")
    n = U.shape[0]
    if n % 2:
        raise OddDimension(f"dimension must be even, got {n}")
    m = n // 2
    dec = spectral_decompose(V, tol)
    W, Wh = dec.basis, adjoint(dec.basis)
    v1, v2 = dec.eigenvalues[:m], dec.eigenvalues[m:]

    I, Z = np.eye(m), np.zeros((m, m))
    swap = np.block([[Z, I], [I, Z]]).astype(np.complex128)
    flip = np.block([[Z, np.diag(np.conj(v1))], [np.diag(v1), Z]])
    X = U @ W
    Xh = adjoint(X)
    R1 = X @ swap @ Xh
    R2 = X @ flip @ Xh
    E = W @ np.diag(np.r_[np.zeros(m), np.ones(m)]) @ Wh
    Vp = W @ np.diag(np.r_[np.ones(m), v1 * v2]) @ Wh
    return TwoUnitaryStep(R1, R2, E, Vp)


@dataclass(frozen=True)
class FourSymmetryStep:
    """U = R1 R2 R3 R4 (B1 + B2 + I - E1 - E2)."""

    R: tuple
    E2: np.ndarray
    B2: np.ndarray

    def tail(self, E1, B1) -> np.ndarray:
        eye = np.eye(self.E2.shape[0])
        return B1 + self.B2 + eye - E1 - self.E2


def _range_basis(P: np.ndarray, tol: Tolerance, expected_rank: int, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of range(P) and its complement for an orthogonal projection P."""
    Ph = adjoint(P)
    defect = max(operator_norm(P - Ph), operator_norm(P @ P - P))
    if defect > tol.verify_tol:
        raise RankMismatch(f"{name} is not an orthogonal projection (defect {defect:.3e})")
    w, vecs = np.linalg.eigh(0.5 * (P + Ph))
    rank = int(np.sum(w > 0.5))
    if rank != expected_rank:
        raise RankMismatch(f"{name} has rank {rank}, expected {expected_rank}")
    return vecs[:, w > 0.5], vecs[:, w <= 0.5]


def lemma_four_sym_step(U, E1, B1, tol: Tolerance = DEFAULT_TOL) -> FourSymmetryStep:
    """One step of the four-symmetry reduction in dimension 3m (m even).

    U must commute with the rank-2m projection E1 and B1 must be a unitary on
    range(E1). Produces symmetries R1..R4, a rank-m/2 projection E2 orthogonal
    to E1 and a unitary B2 on range(E2) with
    U = R1 R2 R3 R4 (B1 + B2 + I - E1 - E2).
    """
    U = require_unitary(U, tol, "U")
    E1 = as_matrix(E1, "E1")
    B1 = as_matrix(B1, "B1")
    n = U.shape[0]
    if E1.shape != U.shape or B1.shape != U.shape:
        raise ValueError("U, E1, B1 must have the same shape")
    if n % 3 or (n // 3) % 2:
        raise DimensionNotDivisible(f"dimension must be 3m with m even, got {n}")
    m = n // 3
    eye = np.eye(n)
    P1, P3 = _range_basis(E1, tol, 2 * m, "E1")

    comm = operator_norm(U @ E1 - E1 @ U)
    if comm > tol.verify_tol:
        raise NotCommuting(f"||U E1 - E1 U|| = {comm:.3e} exceeds verify_tol")
    b1_defect = max(
        operator_norm(B1 @ E1 - B1),
        operator_norm(E1 @ B1 - B1),
        operator_norm(adjoint(B1) @ B1 - E1),
    )
    if b1_defect > tol.verify_tol:
        raise RankMismatch(f"B1 is not a unitary on range(E1) (defect {b1_defect:.3e})")

    # reduce to B1 = E1
    U0 = U @ (adjoint(B1) + eye - E1)

    # basis in which U0 = diag(U1, U2, U3) and E1 = diag(I, I, 0)
    A = adjoint(P1) @ U0 @ P1
    dec_a = spectral_decompose(A, tol)
    basis = np.hstack([P1 @ dec_a.basis, P3])
    bh = adjoint(basis)
    D = bh @ U0 @ basis
    U1 = np.diag(dec_a.eigenvalues[:m])
    U2 = np.diag(dec_a.eigenvalues[m:])
    U3 = D[2 * m:, 2 * m:]

    X = adjoint(U2) @ adjoint(U1)
    step = lemma_two_uni_step(X, U1 @ U2 @ U3, tol)

    I, Z = np.eye(m), np.zeros((m, m))
    swap = np.block([[Z, I], [I, Z]]).astype(np.complex128)
    U12 = U1 @ U2
    R1 = block_diag(swap, step.R1)
    R2 = block_diag(np.block([[Z, adjoint(U1)], [U1, Z]]), step.R2)
    R3 = block_diag(I, swap)
    R4 = block_diag(I, np.block([[Z, adjoint(U12)], [U12, Z]]))
    E2 = block_diag(Z, Z, step.E)
    B2 = block_diag(Z, Z, step.Vp @ step.E)

    conj = lambda M: basis @ M @ bh  # noqa: E731
    R = tuple(_hermitize(conj(Rj)) for Rj in (R1, R2, R3, R4))
    return FourSymmetryStep(R=R, E2=_hermitize(conj(E2)), B2=conj(B2))


def _hermitize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + adjoint(M))
