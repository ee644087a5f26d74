"""Independent certificate verification and JSON (de)serialization.

Verification never trusts stored residuals; everything is recomputed from
the matrices in the certificate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, ShapeMismatch
from .factor import METHODS, FactorizationCertificate, ordered_product
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    matrix_from_dict,
    matrix_to_dict,
    operator_norm,
    require_unitary,
    sign_distance,
    symmetry_defects,
)
from .obstruct import KINDS, MembershipEntry, MembershipReport, ObstructionCertificate


@dataclass(frozen=True)
class VerificationReport:
    self_adjoint_defects: tuple
    involution_defects: tuple
    residual: float
    passed: bool
    tol: Tolerance

    @property
    def max_defect(self) -> float:
        return max(self.self_adjoint_defects + self.involution_defects + (self.residual,))


def verify_certificate(cert: FactorizationCertificate, tol: Tolerance | None = None) -> VerificationReport:
    tol = tol or cert.tol
    target = np.asarray(cert.target, dtype=np.complex128)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise ShapeMismatch(f"target must be square, got shape {target.shape}")
    if len(cert.factors) == 0:
        raise ShapeMismatch("certificate has no factors")
    sa, inv = [], []
    for i, F in enumerate(cert.factors):
        F = np.asarray(F, dtype=np.complex128)
        if F.shape != target.shape:
            raise ShapeMismatch(f"factor {i} has shape {F.shape}, target has {target.shape}")
        a, b = symmetry_defects(F)
        sa.append(a)
        inv.append(b)
    residual = operator_norm(ordered_product(cert.factors) - target)
    values = sa + inv + [residual]
    passed = all(math.isfinite(v) and v <= tol.verify_tol for v in values)
    return VerificationReport(tuple(sa), tuple(inv), residual, passed, tol)


def distance_lower_bound_s4(U, tol: Tolerance = DEFAULT_TOL) -> float:
    """Lower bound on the operator-norm distance from U to any product of symmetries.

    For n x n unitaries |det U - det V| <= n ||U - V||, and every product of
    symmetries has determinant +-1, so dist(det U, {+-1}) / n is a lower bound.
    """
    U = require_unitary(U, tol)
    det = complex(np.linalg.det(U))
    det /= abs(det)
    return sign_distance(det)[1] / U.shape[0]


# -- JSON ----------------------------------------------------------------------

def _c(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _complex_from(obj, path) -> complex:
    if (
        not isinstance(obj, list)
        or len(obj) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in obj)
    ):
        raise SchemaError(path, "expected a finite [re, im] pair")
    return complex(obj[0], obj[1])


def _float_from(obj, path) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
        raise SchemaError(path, "expected a finite number")
    return float(obj)


def _encode_evidence(value):
    if isinstance(value, complex):
        return _c(value)
    if isinstance(value, dict):
        return {str(k): _encode_evidence(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode_evidence(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _decode_evidence(kind, evidence, path):
    if not isinstance(evidence, dict):
        raise SchemaError(path, "expected an object")
    out = dict(evidence)
    if kind == "determinant":
        det = evidence.get("det")
        if isinstance(det, dict):
            out["det"] = {k: _complex_from(v, f"{path}.det.{k}") for k, v in det.items()}
        else:
            out["det"] = _complex_from(det, f"{path}.det")
    elif kind == "conj_spectrum":
        out["eigenvalue"] = _complex_from(evidence.get("eigenvalue"), f"{path}.eigenvalue")
    return out


def certificate_to_dict(cert: FactorizationCertificate) -> dict:
    return {
        "target": matrix_to_dict(cert.target),
        "factors": [matrix_to_dict(F) for F in cert.factors],
        "method": cert.method,
        "residual": float(cert.residual),
        "tol": cert.tol.to_dict(),
    }


def certificate_from_dict(obj, path="$") -> FactorizationCertificate:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for key in ("target", "factors", "method", "residual", "tol"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing field")
    target = matrix_from_dict(obj["target"], f"{path}.target")
    if not isinstance(obj["factors"], list) or not obj["factors"]:
        raise SchemaError(f"{path}.factors", "expected a non-empty list of matrices")
    factors = tuple(matrix_from_dict(F, f"{path}.factors[{i}]") for i, F in enumerate(obj["factors"]))
    for i, F in enumerate(factors):
        if F.shape != target.shape:
            raise SchemaError(f"{path}.factors[{i}]", f"shape {F.shape} does not match target {target.shape}")
    if obj["method"] not in METHODS:
        raise SchemaError(f"{path}.method", f"unknown method {obj['method']!r}")
    residual = _float_from(obj["residual"], f"{path}.residual")
    if residual < 0:
        raise SchemaError(f"{path}.residual", "must be non-negative")
    tol = Tolerance.from_dict(obj["tol"], f"{path}.tol")
    return FactorizationCertificate(target, factors, obj["method"], residual, tol)


def obstruction_to_dict(obs: ObstructionCertificate) -> dict:
    out = {
        "kind": obs.kind,
        "excluded_length": int(obs.excluded_length),
        "evidence": _encode_evidence(obs.evidence),
    }
    if obs.target is not None:
        out["target"] = matrix_to_dict(obs.target)
    return out


def obstruction_from_dict(obj, path="$") -> ObstructionCertificate:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for key in ("kind", "excluded_length", "evidence"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing field")
    kind = obj["kind"]
    if kind not in KINDS:
        raise SchemaError(f"{path}.kind", f"unknown obstruction kind {kind!r}")
    length = obj["excluded_length"]
    if isinstance(length, bool) or not isinstance(length, int) or length < 1:
        raise SchemaError(f"{path}.excluded_length", "expected a positive integer")
    target = matrix_from_dict(obj["target"], f"{path}.target") if "target" in obj else None
    evidence = _decode_evidence(kind, obj["evidence"], f"{path}.evidence")
    return ObstructionCertificate(kind, length, evidence, target)


def report_to_dict(report: MembershipReport) -> dict:
    lengths = {}
    for L, entry in report.entries.items():
        witness = entry.witness
        if isinstance(witness, FactorizationCertificate):
            w = certificate_to_dict(witness)
        elif isinstance(witness, ObstructionCertificate):
            w = obstruction_to_dict(witness)
        else:
            w = None
        lengths[str(L)] = {"verdict": entry.verdict, "witness": w}
    return {"dim": report.dim, "lengths": lengths}


def report_from_dict(obj, path="$") -> MembershipReport:
    if not isinstance(obj, dict) or "lengths" not in obj or "dim" not in obj:
        raise SchemaError(path, "expected an object with dim and lengths")
    if not isinstance(obj["lengths"], dict):
        raise SchemaError(f"{path}.lengths", "expected an object")
    entries = {}
    for key, entry in obj["lengths"].items():
        p = f"{path}.lengths.{key}"
        if not key.isdigit() or not isinstance(entry, dict) or entry.get("verdict") not in (
            "member",
            "non_member",
            "unknown",
        ):
            raise SchemaError(p, "expected {verdict, witness}")
        w = entry.get("witness")
        if w is None:
            witness = None
        elif "method" in w:
            witness = certificate_from_dict(w, f"{p}.witness")
        else:
            witness = obstruction_from_dict(w, f"{p}.witness")
        entries[int(key)] = MembershipEntry(entry["verdict"], witness)
    return MembershipReport(dim=obj["dim"], entries=entries)


def verification_to_dict(report: VerificationReport) -> dict:
    return {
        "passed": report.passed,
        "residual": report.residual,
        "self_adjoint_defects": list(report.self_adjoint_defects),
        "involution_defects": list(report.involution_defects),
        "tol": report.tol.to_dict(),
    }


def to_dict(obj) -> dict:
    if isinstance(obj, FactorizationCertificate):
        return certificate_to_dict(obj)
    if isinstance(obj, ObstructionCertificate):
        return obstruction_to_dict(obj)
    if isinstance(obj, MembershipReport):
        return report_to_dict(obj)
    if isinstance(obj, VerificationReport):
        return verification_to_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize(obj, indent=None) -> str:
    return json.dumps(to_dict(obj), indent=indent, allow_nan=False)


def deserialize(text: str):
    """Parse certificate, obstruction or membership-report JSON (discriminated by keys)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc.msg} at position {exc.pos}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("$", "expected a JSON object")
    if "method" in obj:
        return certificate_from_dict(obj)
    if "kind" in obj:
        return obstruction_from_dict(obj)
    if "lengths" in obj:
        return report_from_dict(obj)
    raise SchemaError("$", "unrecognized document: expected a certificate, obstruction or report")
