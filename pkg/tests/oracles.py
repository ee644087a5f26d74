"""Reference computations independent of the library's code paths."""
import cmath
import itertools
import math

import numpy as np


def cofactor_det(A):
    A = [list(map(complex, row)) for row in np.asarray(A)]
    n = len(A)
    if n == 1:
        return A[0][0]
    total = 0j
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * cofactor_det(minor)
    return total


def leibniz_det(A):
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = (-1) ** inversions
        for i in range(n):
            term *= A[i, perm[i]]
        total += term
    return total


def singular_values_2x2(A):
    """Closed-form singular values from the characteristic polynomial of A*A."""
    A = np.asarray(A, dtype=complex)
    G = A.conj().T @ A
    tr = (G[0, 0] + G[1, 1]).real
    det = (G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]).real
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return math.sqrt(tr / 2 + disc), math.sqrt(max(tr / 2 - disc, 0.0))


def eigenvalues_numpy(U):
    """General eigenvalue routine (LAPACK geev), independent of the Schur path."""
    return np.linalg.eigvals(np.asarray(U, dtype=complex))


def conj_closed(values, tol):
    """Brute-force matching check: is the multiset closed under conjugation?

    Tries every perfect matching of the multiset against its conjugate via
    Hungarian-free greedy-with-backtracking (sizes here are small).
    """
    vals = list(values)
    n = len(vals)
    target = [v.conjugate() for v in vals]

    def match(i, used):
        if i == n:
            return True
        for j in range(n):
            if j not in used and abs(vals[i] - target[j]) <= tol:
                if match(i + 1, used | {j}):
                    return True
        return False

    return match(0, frozenset())


def unit(theta):
    return cmath.exp(1j * theta)


def random_symmetry(n, rng):
    """Q diag(+-1) Q* for a Haar-ish Q from an independent QR."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(Z)
    signs = rng.choice([-1.0, 1.0], size=n)
    return (Q * signs) @ Q.conj().T


def random_unitary(n, rng):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def commuting_instance(n, rng):
    """(U, E1, B1) in dimension n = 3m: U commutes with a rank-2m projection E1, B1 unitary on range(E1)."""
    m = n // 3
    Q = random_unitary(n, rng)
    Qh = Q.conj().T
    D = np.zeros((n, n), dtype=complex)
    D[: 2 * m, : 2 * m] = random_unitary(2 * m, rng)
    D[2 * m:, 2 * m:] = random_unitary(m, rng)
    P = np.diag(np.r_[np.ones(2 * m), np.zeros(m)]).astype(complex)
    B = np.zeros((n, n), dtype=complex)
    B[: 2 * m, : 2 * m] = random_unitary(2 * m, rng)
    return Q @ D @ Qh, Q @ P @ Qh, Q @ B @ Qh


def product(mats):
    out = np.eye(mats[0].shape[0], dtype=complex)
    for M in mats:
        out = out @ M
    return out


def opnorm(A):
    """Largest singular value through numpy's SVD (a separate LAPACK path from eigvalsh)."""
    return float(np.linalg.svd(np.asarray(A), compute_uv=False)[0])


def symmetry_defect(S):
    S = np.asarray(S)
    return max(opnorm(S - S.conj().T), opnorm(S @ S - np.eye(S.shape[0])))
