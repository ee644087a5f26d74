import math

import numpy as np
import pytest

from symfact.centerfun import (
    FieldFactorization,
    MatrixField,
    det_c,
    detc_properties_check,
    field_four_factor,
    field_residual,
    random_unitary_field,
)
from symfact.errors import SchemaError, ShapeMismatch

from oracles import cofactor_det, opnorm, symmetry_defect, unit


def test_det_c_constant_identity():
    f = MatrixField.constant(("a", "b"), np.eye(3))
    assert det_c(f) == {"a": 1, "b": 1}


def test_det_c_mixed_field():
    f = MatrixField(("a", "b"), 2, {"a": 1j * np.eye(2), "b": np.diag([1, -1])})
    d = det_c(f)
    assert d["a"] == pytest.approx(-1, abs=1e-15)
    assert d["b"] == pytest.approx(-1, abs=1e-15)


def test_det_c_matches_cofactor(rng):
    for n in (1, 2, 3, 4):
        f = random_unitary_field(("x", "y"), n, rng)
        d = det_c(f)
        for x in f.points:
            assert abs(d[x] - cofactor_det(f[x])) <= 1e-10


def test_detc_properties():
    I = MatrixField.constant(("a", "b"), np.eye(2))
    assert detc_properties_check(I, I)
    rng = np.random.default_rng(3)
    pts = ("p", "q", "r")
    assert detc_properties_check(random_unitary_field(pts, 3, rng), random_unitary_field(pts, 3, rng))


def test_detc_properties_negative_control(rng):
    pts = ("p", "q")
    f = random_unitary_field(pts, 3, rng)
    g = random_unitary_field(pts, 3, rng)
    bad = dict(f.values)
    M = bad["q"].copy()
    M[0, 0] = np.nan
    bad["q"] = M
    # construct around validation to model a corrupted fiber
    corrupt = object.__new__(MatrixField)
    object.__setattr__(corrupt, "points", pts)
    object.__setattr__(corrupt, "fiber_dim", 3)
    object.__setattr__(corrupt, "values", bad)
    assert detc_properties_check(corrupt, g) is False


def test_field_validation():
    with pytest.raises(ShapeMismatch):
        MatrixField(("a",), 2, {"a": np.eye(3)})
    with pytest.raises(ShapeMismatch):
        MatrixField(("a", "b"), 2, {"a": np.eye(2)})
    with pytest.raises(ValueError):
        MatrixField(("a", "a"), 2, {"a": np.eye(2)})


def test_field_four_factor_member():
    f = MatrixField(("a", "b"), 2, {"a": 1j * np.eye(2), "b": np.eye(2)})
    fac = field_four_factor(f)
    assert isinstance(fac, FieldFactorization)
    assert len(fac.factors) == 4
    for F in fac.factors:
        for x in f.points:
            assert symmetry_defect(F[x]) <= 1e-10
    prod = fac.product()
    for x in f.points:
        assert opnorm(prod[x] - f[x]) <= 1e-10
    assert field_residual(f, fac) <= 1e-10


def test_field_four_factor_constant_obstruction():
    f = MatrixField.constant(("a", "b", "c"), unit(math.pi / 5) * np.eye(3))
    obs = field_four_factor(f)
    assert obs.kind == "determinant"
    assert obs.evidence["points"] == ["a", "b", "c"]
    for x in "abc":
        assert obs.evidence["det"][x] == pytest.approx(unit(3 * math.pi / 5), abs=1e-14)


def test_field_four_factor_names_bad_point(rng):
    f = random_unitary_field(("a", "b", "c"), 3, rng, det_values={"a": 1, "b": unit(0.4), "c": -1})
    obs = field_four_factor(f)
    assert obs.evidence["points"] == ["b"]


def test_field_json_roundtrip(rng):
    f = random_unitary_field(("a", "b"), 2, rng)
    g = MatrixField.from_dict(f.to_dict())
    for x in f.points:
        assert np.array_equal(f[x], g[x])
    with pytest.raises(SchemaError) as info:
        MatrixField.from_dict({"points": ["a"], "fiber_dim": 2, "values": {}})
    assert info.value.path == "field.values"
