"""Impossibility certificates and membership classification in S, S^2, S^3, S^4.

S^L denotes the set of unitaries that are products of L symmetries. Three
obstructions are available for matrices:

* ``determinant``: every symmetry has determinant +-1, so a unitary whose
  determinant is away from {+1, -1} is not a product of any number of them.
* ``conj_spectrum``: products of two symmetries are unitarily equivalent to
  their adjoint, so their spectrum is closed under conjugation.
* ``quadrant_arc``: a spectrum inside a single open arc between consecutive
  fourth roots of unity rules out three symmetries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DeterminantObstruction, NotFourthRoot, OddDimension, SpectrumNotConjSymmetric
from .factor import (
    FOURTH_ROOTS,
    FactorizationCertificate,
    conjugate_pairing,
    make_certificate,
    radjavi_four_factor,
    three_factor_scalar,
    two_symmetry_factor,
)
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    determinant,
    is_symmetry,
    operator_norm,
    principal_angle,
    require_unitary,
    sign_distance,
    spectral_decompose,
    symmetry_defects,
)

KINDS = ("determinant", "conj_spectrum", "quadrant_arc", "not_symmetry")

# S^4 is the union of all S^L for matrices, so 4 stands for "every length"
ALL_LENGTHS = 4


@dataclass(frozen=True)
class ObstructionCertificate:
    kind: str
    excluded_length: int
    evidence: dict
    target: Optional[np.ndarray] = None

    def excludes(self, length: int) -> bool:
        if self.kind == "determinant":
            return True
        return length <= self.excluded_length


def arc_index(z: complex) -> int:
    """k in 1..4 with arg(z) in [(k-1) pi/2, k pi/2); boundary points are excluded by the caller."""
    theta = float(principal_angle(z))
    return min(int(theta // (math.pi / 2)) + 1, 4)


def arc_center(k: int) -> complex:
    """Midpoint exp(2 pi i (2k - 1) / 8) of arc k."""
    return complex(np.exp(2j * math.pi * (2 * k - 1) / 8))


def det_obstruction(U, tol: Tolerance = DEFAULT_TOL) -> Optional[ObstructionCertificate]:
    U = require_unitary(U, tol)
    det = determinant(U, tol)
    sign, dist = sign_distance(det)
    if dist <= tol.verify_tol:
        return None
    return ObstructionCertificate(
        kind="determinant",
        excluded_length=ALL_LENGTHS,
        evidence={"det": det, "distance": dist},
        target=U,
    )


def conj_spectrum_obstruction(U, tol: Tolerance = DEFAULT_TOL) -> Optional[ObstructionCertificate]:
    U = require_unitary(U, tol)
    lam = spectral_decompose(U, tol).eigenvalues
    _, _, unmatched = conjugate_pairing(lam, tol.cluster_tol)
    if unmatched is None:
        return None
    j, margin = unmatched
    return ObstructionCertificate(
        kind="conj_spectrum",
        excluded_length=2,
        evidence={"eigenvalue": complex(lam[j]), "margin": float(margin)},
        target=U,
    )


def quadrant_obstruction(U, tol: Tolerance = DEFAULT_TOL) -> Optional[ObstructionCertificate]:
    U = require_unitary(U, tol)
    lam = spectral_decompose(U, tol).eigenvalues
    eps = min(abs(z - r) for z in lam for r in FOURTH_ROOTS)
    if eps <= tol.verify_tol:
        return None
    arcs = {arc_index(z) for z in lam}
    if len(arcs) != 1:
        return None
    k = arcs.pop()
    return ObstructionCertificate(
        kind="quadrant_arc",
        excluded_length=3,
        evidence={"arc": k, "margin": float(eps)},
        target=U,
    )


def not_symmetry_obstruction(U, tol: Tolerance = DEFAULT_TOL) -> Optional[ObstructionCertificate]:
    U = require_unitary(U, tol)
    sa, inv = symmetry_defects(U)
    if sa <= tol.unitary_tol and inv <= tol.unitary_tol:
        return None
    return ObstructionCertificate(
        kind="not_symmetry",
        excluded_length=1,
        evidence={"self_adjoint_defect": sa, "involution_defect": inv},
        target=U,
    )


def recheck_obstruction(U, obs: ObstructionCertificate, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Recompute the obstruction from ``U`` alone and compare with the stored evidence."""
    fresh = {
        "determinant": det_obstruction,
        "conj_spectrum": conj_spectrum_obstruction,
        "quadrant_arc": quadrant_obstruction,
        "not_symmetry": not_symmetry_obstruction,
    }[obs.kind](U, tol)
    if fresh is None:
        return False
    if obs.kind == "quadrant_arc":
        return fresh.evidence["arc"] == obs.evidence["arc"]
    if obs.kind == "determinant":
        return abs(fresh.evidence["det"] - obs.evidence["det"]) <= tol.verify_tol
    return True


# -- membership --------------------------------------------------------------

VERDICTS = ("member", "non_member", "unknown")


@dataclass(frozen=True)
class MembershipEntry:
    verdict: str
    witness: object = None  # FactorizationCertificate | ObstructionCertificate | None


@dataclass(frozen=True)
class MembershipReport:
    dim: int
    entries: dict = field(default_factory=dict)  # length -> MembershipEntry

    def verdict(self, length: int) -> str:
        return self.entries[length].verdict


def _verified(cert: FactorizationCertificate, tol: Tolerance) -> Optional[FactorizationCertificate]:
    from .certkit import verify_certificate

    return cert if verify_certificate(cert, tol).passed else None


def classify_membership(U, tol: Tolerance = DEFAULT_TOL) -> MembershipReport:
    """Decide membership of ``U`` in S^L for L = 1..4.

    L = 1, 2 and 4 are exact dichotomies for matrices. L = 3 is decided only
    when an obstruction fires or a known construction applies; otherwise the
    verdict is ``unknown``.
    """
    U = require_unitary(U, tol)
    n = U.shape[0]
    det_obs = det_obstruction(U, tol)
    entries = {}

    # L = 4
    if det_obs is not None:
        entries[4] = MembershipEntry("non_member", det_obs)
    else:
        try:
            cert = _verified(radjavi_four_factor(U, tol), tol)
        except DeterminantObstruction:
            cert = None
        entries[4] = MembershipEntry("member", cert) if cert else MembershipEntry("unknown")

    # L = 2
    two_cert = None
    if det_obs is not None:
        entries[2] = MembershipEntry("non_member", det_obs)
    else:
        try:
            two_cert = _verified(two_symmetry_factor(U, tol), tol)
        except SpectrumNotConjSymmetric:
            two_cert = None
        if two_cert is not None:
            entries[2] = MembershipEntry("member", two_cert)
        else:
            obs = conj_spectrum_obstruction(U, tol)
            entries[2] = MembershipEntry("non_member", obs) if obs else MembershipEntry("unknown")

    # L = 1
    if is_symmetry(U, tol):
        entries[1] = MembershipEntry("member", make_certificate(U, [U], "symmetry", tol))
    else:
        obs = det_obs or (entries[2].witness if entries[2].verdict == "non_member" else None)
        entries[1] = MembershipEntry("non_member", obs or not_symmetry_obstruction(U, tol))

    # L = 3
    entries[3] = _classify_three(U, tol, det_obs, two_cert, entries[1])
    return MembershipReport(dim=n, entries=dict(sorted(entries.items())))


def _classify_three(U, tol, det_obs, two_cert, one_entry) -> MembershipEntry:
    quad = quadrant_obstruction(U, tol)
    if quad is not None:
        return MembershipEntry("non_member", quad)
    if det_obs is not None:
        return MembershipEntry("non_member", det_obs)
    if one_entry.verdict == "member":
        return MembershipEntry("member", one_entry.witness.padded(3))
    if two_cert is not None:
        return MembershipEntry("member", two_cert.padded(3))
    n = U.shape[0]
    for root in FOURTH_ROOTS:
        if operator_norm(U - root * np.eye(n)) <= tol.verify_tol:
            try:
                cert = three_factor_scalar(root, n, tol)
            except (NotFourthRoot, OddDimension):
                break
            cert = make_certificate(U, cert.factors, "three_scalar", tol)
            verified = _verified(cert, tol)
            if verified is not None:
                return MembershipEntry("member", verified)
    return MembershipEntry("unknown")
