"""Dense complex matrix utilities: predicates, norms, spectra, random unitaries.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
is the single validation entry point used by the rest of the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NotUnitary, SchemaError, ShapeMismatch

TWO_PI = 2.0 * math.pi

DetMode = Literal["free", "plus_one", "minus_one"]


@dataclass(frozen=True)
class Tolerance:
    unitary_tol: float = 1e-10
    verify_tol: float = 1e-8
    cluster_tol: float = 1e-9

    def __post_init__(self):
        for name in ("unitary_tol", "verify_tol", "cluster_tol"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite non-negative number, got {value!r}")

    def replace(self, **changes) -> "Tolerance":
        fields = self.to_dict()
        fields.update({k: v for k, v in changes.items() if v is not None})
        return Tolerance(**fields)

    def to_dict(self) -> dict:
        return {
            "unitary_tol": self.unitary_tol,
            "verify_tol": self.verify_tol,
            "cluster_tol": self.cluster_tol,
        }

    @classmethod
    def from_dict(cls, obj, path="tol") -> "Tolerance":
        if not isinstance(obj, dict):
            raise SchemaError(path, "expected an object")
        values = {}
        for name in ("unitary_tol", "verify_tol", "cluster_tol"):
            if name in obj:
                v = obj[name]
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                    raise SchemaError(f"{path}.{name}", "expected a finite non-negative number")
                values[name] = float(v)
        return cls(**values)


DEFAULT_TOL = Tolerance()


def as_matrix(A, name="matrix") -> np.ndarray:
    """Validate ``A`` as a finite square complex matrix and return a complex128 copy."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ShapeMismatch(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def adjoint(A) -> np.ndarray:
    return np.conj(np.asarray(A, dtype=np.complex128)).T


def operator_norm(A) -> float:
    """Largest singular value, from the top eigenvalue of the Hermitian matrix A*A."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    gram = adjoint(A) @ A
    gram = 0.5 * (gram + adjoint(gram))
    top = scipy.linalg.eigvalsh(gram, subset_by_index=[gram.shape[0] - 1, gram.shape[0] - 1])[0]
    return math.sqrt(max(float(top), 0.0))


def unitary_defect(A) -> float:
    A = np.asarray(A, dtype=np.complex128)
    return operator_norm(adjoint(A) @ A - np.eye(A.shape[0]))


def symmetry_defects(A) -> tuple[float, float]:
    """Return (self-adjointness defect, involution defect) in operator norm."""
    A = np.asarray(A, dtype=np.complex128)
    return operator_norm(A - adjoint(A)), operator_norm(A @ A - np.eye(A.shape[0]))


def is_unitary(A, tol: Tolerance = DEFAULT_TOL) -> bool:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        return False
    return unitary_defect(A) <= tol.unitary_tol


def is_symmetry(A, tol: Tolerance = DEFAULT_TOL) -> bool:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        return False
    sa, inv = symmetry_defects(A)
    return sa <= tol.unitary_tol and inv <= tol.unitary_tol


def require_unitary(A, tol: Tolerance = DEFAULT_TOL, name="U") -> np.ndarray:
    U = as_matrix(A, name)
    defect = unitary_defect(U)
    if defect > tol.unitary_tol:
        raise NotUnitary(defect, tol.unitary_tol)
    return U


def determinant(A, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Determinant via LU; renormalized to modulus one when ``A`` is unitary."""
    A = as_matrix(A)
    det = complex(np.linalg.det(A))
    if det != 0 and is_unitary(A, tol):
        det /= abs(det)
    return det


def sign_distance(z: complex) -> tuple[float, float]:
    """Nearest point of {+1, -1} to ``z`` and the distance to it."""
    d_plus, d_minus = abs(z - 1.0), abs(z + 1.0)
    return (1.0, d_plus) if d_plus <= d_minus else (-1.0, d_minus)


def principal_angle(z) -> np.ndarray:
    """Argument mapped into [0, 2*pi)."""
    theta = np.mod(np.angle(z), TWO_PI)
    return np.where(theta >= TWO_PI, 0.0, theta)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Unitary diagonalization ``U = Q diag(eigenvalues) Q*``.

    Eigenvalues are sorted by principal argument in [0, 2*pi).
    """

    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ adjoint(self.basis)

    def apply(self, fn) -> np.ndarray:
        """Functional calculus: ``Q diag(fn(eigenvalues)) Q*``."""
        return (self.basis * fn(self.eigenvalues)) @ adjoint(self.basis)

    def residual(self, U) -> float:
        U = np.asarray(U, dtype=np.complex128)
        return operator_norm(U @ self.basis - self.basis * self.eigenvalues)

    def clusters(self, tol: Tolerance = DEFAULT_TOL) -> list[tuple[complex, np.ndarray]]:
        """Group eigenvalues closer than ``cluster_tol``.

        Returns ``(representative, column_indices)`` pairs. Grouping is
        single-linkage along the circle, so a cluster may straddle 1.
        """
        return [(rep, idx) for rep, idx in _cluster_circle(self.eigenvalues, tol.cluster_tol)]

    def projection(self, columns) -> np.ndarray:
        Qc = self.basis[:, columns]
        return Qc @ adjoint(Qc)


def _cluster_circle(values: np.ndarray, cluster_tol: float):
    n = len(values)
    if n == 0:
        return []
    order = np.argsort(principal_angle(values), kind="stable")
    groups = [[order[0]]]
    for a, b in zip(order[:-1], order[1:]):
        if abs(values[b] - values[a]) <= cluster_tol:
            groups[-1].append(b)
        else:
            groups.append([b])
    if len(groups) > 1 and abs(values[order[0]] - values[order[-1]]) <= cluster_tol:
        groups[0] = groups.pop() + groups[0]
    out = []
    for g in groups:
        idx = np.array(sorted(g))
        rep = complex(np.sum(values[idx]))
        rep = rep / abs(rep) if rep != 0 else complex(values[idx[0]])
        out.append((rep, idx))
    out.sort(key=lambda item: _snapped_angle(item[0], cluster_tol))
    return out


def _snapped_angle(z: complex, cluster_tol: float) -> float:
    theta = float(principal_angle(z))
    return 0.0 if abs(z - 1.0) <= cluster_tol else theta


def spectral_decompose(U, tol: Tolerance = DEFAULT_TOL, cluster: bool = False) -> SpectralDecomposition:
    """Eigendecomposition of a unitary matrix via the complex Schur form.

    For a normal matrix the Schur factor is diagonal up to rounding, so the
    Schur vectors are an orthonormal eigenbasis. With ``cluster=True``
    eigenvalues within ``cluster_tol`` of each other are replaced by their
    common (normalized) mean, giving exact-rank spectral projections.
    """
    U = require_unitary(U, tol)
    T, Q = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T).copy()
    mod = np.abs(lam)
    if np.any(mod == 0):
        raise ConvergenceFailure("Schur form has a zero diagonal entry")
    lam = lam / mod

    if cluster:
        for rep, idx in _cluster_circle(lam, tol.cluster_tol):
            lam[idx] = rep
        angle = np.array([_snapped_angle(z, tol.cluster_tol) for z in lam])
    else:
        angle = principal_angle(lam)
    # ties (exactly equal eigenvalues) are broken by the phase of the leading eigenvector entry
    lead = np.array([Q[np.argmax(np.abs(Q[:, j]) > 1e-8), j] for j in range(Q.shape[1])])
    order = np.lexsort((principal_angle(lead), angle))
    decomp = SpectralDecomposition(basis=Q[:, order], eigenvalues=lam[order])

    residual = decomp.residual(U)
    if residual > tol.verify_tol:
        raise ConvergenceFailure(
            f"eigendecomposition residual {residual:.3e} exceeds verify_tol {tol.verify_tol:.3e}"
        )
    return decomp


def haar_random_unitary(dim: int, seed: int, det_mode: DetMode = "free") -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian matrix.

    The triangular factor is normalized to a positive real diagonal. With
    ``det_mode`` other than ``"free"`` the first column is rescaled by a phase
    so that the determinant is exactly +1 or -1.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if det_mode not in ("free", "plus_one", "minus_one"):
        raise ValueError(f"unknown det_mode {det_mode!r}")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    Q = Q * (d / np.abs(d))
    if det_mode != "free":
        target = 1.0 if det_mode == "plus_one" else -1.0
        det = complex(np.linalg.det(Q))
        Q[:, 0] *= target * np.conj(det) / abs(det)
    return Q


def random_unitary_from_rng(dim: int, rng: np.random.Generator) -> np.ndarray:
    seed = int(rng.integers(0, 2**63 - 1))
    return haar_random_unitary(dim, seed)


def block_diag(*blocks) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=np.complex128) for b in blocks]).astype(np.complex128)


# -- Matrix JSON ------------------------------------------------------------

def matrix_to_dict(A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_dict(obj, path="matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object with rows, cols, data")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing field")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for key, v in (("rows", rows), ("cols", cols)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise SchemaError(f"{path}.{key}", "expected a positive integer")
    if rows != cols:
        raise SchemaError(path, f"matrix must be square, got {rows}x{cols}")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise SchemaError(f"{path}.data", f"expected a list of {rows * cols} [re, im] pairs")
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, entry in enumerate(data):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise SchemaError(f"{path}.data[{i}]", "expected [re, im]")
        if not (math.isfinite(entry[0]) and math.isfinite(entry[1])):
            raise SchemaError(f"{path}.data[{i}]", "non-finite entry")
        out[i] = complex(entry[0], entry[1])
    return out.reshape(rows, cols)
