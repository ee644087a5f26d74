"""Matrix-valued functions on a finite point set.

C(X; M_n) with X finite is a type I_n algebra whose center is the algebra of
scalar functions on X. The center-valued determinant is the pointwise
determinant, and a unitary field is a product of four symmetry fields exactly
when that determinant takes values in {+1, -1}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import DeterminantObstruction, SchemaError, ShapeMismatch
from .factor import radjavi_four_factor
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    as_matrix,
    determinant,
    haar_random_unitary,
    is_symmetry,
    is_unitary,
    matrix_from_dict,
    matrix_to_dict,
    operator_norm,
    require_unitary,
    sign_distance,
)
from .obstruct import ObstructionCertificate


@dataclass(frozen=True)
class MatrixField:
    points: tuple
    fiber_dim: int
    values: Mapping

    def __post_init__(self):
        points = tuple(self.points)
        if len(set(points)) != len(points):
            raise ValueError("base points must be distinct")
        if set(points) != set(self.values):
            raise ShapeMismatch("values must be given for exactly the base points")
        values = {}
        for x in points:
            M = as_matrix(self.values[x], f"values[{x!r}]")
            if M.shape[0] != self.fiber_dim:
                raise ShapeMismatch(f"fiber at {x!r} has dim {M.shape[0]}, expected {self.fiber_dim}")
            values[x] = M
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, points, M) -> "MatrixField":
        M = as_matrix(M)
        return cls(tuple(points), M.shape[0], {x: M for x in points})

    def __getitem__(self, x) -> np.ndarray:
        return self.values[x]

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        _check_same_shape(self, other)
        return MatrixField(self.points, self.fiber_dim, {x: self[x] @ other[x] for x in self.points})

    def adjoint(self) -> "MatrixField":
        return MatrixField(self.points, self.fiber_dim, {x: adjoint(self[x]) for x in self.points})

    def is_unitary(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return all(is_unitary(self[x], tol) for x in self.points)

    def is_symmetry(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return all(is_symmetry(self[x], tol) for x in self.points)

    def to_dict(self) -> dict:
        return {
            "points": list(self.points),
            "fiber_dim": self.fiber_dim,
            "values": {str(x): matrix_to_dict(self[x]) for x in self.points},
        }

    @classmethod
    def from_dict(cls, obj, path="field") -> "MatrixField":
        if not isinstance(obj, dict):
            raise SchemaError(path, "expected an object")
        for key in ("points", "fiber_dim", "values"):
            if key not in obj:
                raise SchemaError(f"{path}.{key}", "missing field")
        points, n, values = obj["points"], obj["fiber_dim"], obj["values"]
        if not isinstance(points, list) or not all(isinstance(x, str) for x in points):
            raise SchemaError(f"{path}.points", "expected a list of string labels")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise SchemaError(f"{path}.fiber_dim", "expected a positive integer")
        if not isinstance(values, dict) or set(values) != set(points):
            raise SchemaError(f"{path}.values", "expected one matrix per base point")
        mats = {x: matrix_from_dict(values[x], f"{path}.values.{x}") for x in points}
        for x, M in mats.items():
            if M.shape[0] != n:
                raise SchemaError(f"{path}.values.{x}", f"expected a {n}x{n} matrix")
        return cls(tuple(points), n, mats)


def _check_same_shape(f: MatrixField, g: MatrixField) -> None:
    if f.points != g.points or f.fiber_dim != g.fiber_dim:
        raise ShapeMismatch("fields must share base points and fiber dimension")


def det_c(f: MatrixField, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Center-valued determinant: x -> det f(x)."""
    return {x: determinant(f[x], tol) for x in f.points}


def detc_properties_check(f: MatrixField, g: MatrixField, tol: Tolerance = DEFAULT_TOL, atol: float = 1e-9) -> bool:
    """Pointwise multiplicativity and adjoint compatibility of det_c."""
    _check_same_shape(f, g)
    try:
        df, dg = det_c(f, tol), det_c(g, tol)
        dfg = det_c(f @ g, tol)
        dfh = det_c(f.adjoint(), tol)
    except ValueError:
        return False
    for x in f.points:
        if not (abs(dfg[x] - df[x] * dg[x]) <= atol and abs(dfh[x] - np.conj(df[x])) <= atol):
            return False
    return True


@dataclass(frozen=True)
class FieldFactorization:
    factors: tuple  # four MatrixFields
    residuals: dict  # point -> operator-norm residual

    def product(self) -> MatrixField:
        out = self.factors[0]
        for F in self.factors[1:]:
            out = out @ F
        return out


def field_four_factor(f: MatrixField, tol: Tolerance = DEFAULT_TOL) -> Union[FieldFactorization, ObstructionCertificate]:
    """Pointwise four-symmetry factorization, or the base points where det_c is not +-1."""
    for x in f.points:
        require_unitary(f[x], tol, f"f({x!r})")
    dets = det_c(f, tol)
    bad = {x: d for x, d in dets.items() if sign_distance(d)[1] > tol.verify_tol}
    if bad:
        return ObstructionCertificate(
            kind="determinant",
            excluded_length=4,
            evidence={
                "points": list(bad),
                "det": {str(x): d for x, d in bad.items()},
                "distance": {str(x): sign_distance(d)[1] for x, d in bad.items()},
            },
        )
    per_point = {}
    for x in f.points:
        try:
            per_point[x] = radjavi_four_factor(f[x], tol)
        except DeterminantObstruction as exc:  # pragma: no cover - guarded above
            raise AssertionError(f"unexpected determinant obstruction at {x!r}") from exc
    factors = tuple(
        MatrixField(f.points, f.fiber_dim, {x: per_point[x].factors[j] for x in f.points}) for j in range(4)
    )
    residuals = {x: per_point[x].residual for x in f.points}
    return FieldFactorization(factors, residuals)


def field_residual(f: MatrixField, factorization: FieldFactorization) -> float:
    prod = factorization.product()
    return max(operator_norm(prod[x] - f[x]) for x in f.points)


def random_unitary_field(points, n: int, rng: np.random.Generator, det_values=None) -> MatrixField:
    """Haar-random fiber at every point; ``det_values`` optionally pins each determinant."""
    values = {}
    for x in points:
        U = haar_random_unitary(n, int(rng.integers(0, 2**63 - 1)))
        if det_values is not None:
            d = complex(np.linalg.det(U))
            U[:, 0] *= det_values[x] * np.conj(d) / abs(d)
        values[x] = U
    return MatrixField(tuple(points), n, values)

