"""Command-line front end.

Exit codes: 0 success (or membership report produced), 1 certified infeasible
(obstruction emitted), 2 invalid input, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import certkit
from .errors import (
    DeterminantObstruction,
    MultiplicityConstraint,
    SchemaError,
    SpectrumNotConjSymmetric,
    SymfactError,
)
from .factor import (
    FOURTH_ROOTS,
    RationalAngle,
    finite_spectrum_unitary_four_factor,
    make_certificate,
    radjavi_four_factor,
    three_factor_scalar,
    two_symmetry_factor,
    weyl_scalar_four_factor,
)
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    haar_random_unitary,
    matrix_from_dict,
    matrix_to_dict,
    operator_norm,
    require_unitary,
    sign_distance,
)
from .obstruct import (
    classify_membership,
    conj_spectrum_obstruction,
    det_obstruction,
    quadrant_obstruction,
    recheck_obstruction,
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_VERIFY_FAILED = 0, 1, 2, 3

METHOD_CHOICES = ("auto", "radjavi", "two", "weyl", "finite-spectrum", "three-scalar")

# irrational eigenvalue angles (in turns) for the density demo
DEMO_TURNS = (math.sqrt(2) % 1, math.sqrt(3) % 1, math.sqrt(5) % 1)


class InvalidInput(Exception):
    pass


def _err(msg: str) -> None:
    print(f"symfact: {msg}", file=sys.stderr)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def resolve_tolerance(args) -> Tolerance:
    tol = DEFAULT_TOL
    env = os.environ.get("SYMFACT_TOL")
    if env:
        try:
            tol = tol.replace(verify_tol=float(env))
        except ValueError as exc:
            raise InvalidInput(f"SYMFACT_TOL={env!r} is not a valid tolerance") from exc
    try:
        tol = tol.replace(
            verify_tol=getattr(args, "tol", None),
            unitary_tol=getattr(args, "unitary_tol", None),
            cluster_tol=getattr(args, "cluster_tol", None),
        )
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    if min(tol.to_dict().values()) <= 0:
        raise InvalidInput("tolerances must be positive")
    return tol


def load_matrix(path: str) -> np.ndarray:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc.msg})") from exc
    try:
        return matrix_from_dict(obj, "$")
    except SchemaError as exc:
        raise InvalidInput(f"{path}: {exc}") from exc


# -- factor ----------------------------------------------------------------

def _scalar_of(U, tol: Tolerance):
    alpha = complex(np.trace(U)) / U.shape[0]
    if alpha == 0:
        return None
    alpha /= abs(alpha)
    if operator_norm(U - alpha * np.eye(U.shape[0])) > tol.verify_tol:
        return None
    return alpha


def factor_matrix(U, method: str, tol: Tolerance, max_denominator: int = 64):
    """Return a certificate or an obstruction; raise InvalidInput when the method does not apply."""
    U = require_unitary(U, tol)
    if method == "auto":
        try:
            return two_symmetry_factor(U, tol)
        except SpectrumNotConjSymmetric:
            pass
        try:
            return radjavi_four_factor(U, tol)
        except DeterminantObstruction:
            return det_obstruction(U, tol)
    if method == "two":
        try:
            return two_symmetry_factor(U, tol)
        except SpectrumNotConjSymmetric:
            return det_obstruction(U, tol) or conj_spectrum_obstruction(U, tol)
    if method == "radjavi":
        try:
            return radjavi_four_factor(U, tol)
        except DeterminantObstruction:
            return det_obstruction(U, tol)

    obs = det_obstruction(U, tol)
    if obs is not None:
        return obs
    n = U.shape[0]
    if method == "finite-spectrum":
        try:
            return finite_spectrum_unitary_four_factor(U, tol, max_denominator)
        except MultiplicityConstraint as exc:
            raise InvalidInput(f"finite-spectrum method not applicable: {exc}") from exc

    alpha = _scalar_of(U, tol)
    if alpha is None:
        raise InvalidInput(f"method {method!r} needs a scalar unitary alpha*I")
    if method == "three-scalar":
        if not any(abs(alpha - r) <= tol.verify_tol for r in FOURTH_ROOTS):
            return quadrant_obstruction(U, tol) or _not_applicable(method, alpha)
        cert = three_factor_scalar(alpha, n, tol)
        return make_certificate(U, cert.factors, "three_scalar", tol)
    if method == "weyl":
        if n % 2:
            raise InvalidInput("weyl method needs an even dimension 2n")
        half = n // 2
        k = int(round(math.atan2(alpha.imag, alpha.real) * half / math.pi)) % (2 * half)
        if abs(np.exp(1j * math.pi * k / half) - alpha) > tol.verify_tol:
            _not_applicable(method, alpha)
        cert = weyl_scalar_four_factor(k, half, tol)
        return make_certificate(U, cert.factors, "weyl_scalar", tol)
    raise InvalidInput(f"unknown method {method!r}")


def _not_applicable(method, alpha):
    raise InvalidInput(f"method {method!r} does not apply to the scalar {alpha:.6g}")


def _factor_one(path: str, out: str | None, method: str, tol: Tolerance, max_den: int) -> int:
    try:
        U = load_matrix(path)
        result = factor_matrix(U, method, tol, max_den)
    except (InvalidInput, SymfactError) as exc:
        _err(f"{path}: {exc}")
        return EXIT_INVALID
    if result is None:
        _err(f"{path}: no construction succeeded and no obstruction applies")
        return EXIT_VERIFY_FAILED
    text = _dump(certkit.to_dict(result))
    _emit(text, out)
    if isinstance(result, certkit.ObstructionCertificate):
        _err(f"{path}: infeasible ({result.kind} obstruction)")
        return EXIT_INFEASIBLE
    report = certkit.verify_certificate(result, tol)
    if not report.passed:
        _err(f"{path}: certificate failed verification (max defect {report.max_defect:.3e})")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_factor(args) -> int:
    tol = resolve_tolerance(args)
    src = Path(args.input)
    if src.is_dir():
        if not args.out:
            raise InvalidInput("--out must name a directory when --in is a directory")
        dst = Path(args.out)
        dst.mkdir(parents=True, exist_ok=True)
        files = sorted(src.glob("*.json"))
        with ThreadPoolExecutor() as pool:
            codes = list(
                pool.map(
                    lambda f: _factor_one(str(f), str(dst / f.name), args.method, tol, args.max_denominator),
                    files,
                )
            )
        return max(codes, default=EXIT_OK)
    return _factor_one(args.input, args.out, args.method, tol, args.max_denominator)


# -- check / classify ------------------------------------------------------

def cmd_check(args) -> int:
    tol_override = resolve_tolerance(args) if _has_tol_override(args) else None
    try:
        text = Path(args.cert).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {args.cert}: {exc.strerror}") from exc
    try:
        doc = certkit.deserialize(text)
    except SchemaError as exc:
        _err(f"{args.cert}: {exc}")
        return EXIT_INVALID
    if isinstance(doc, certkit.ObstructionCertificate):
        if doc.target is None:
            _err("obstruction has no target matrix to re-check against")
            return EXIT_INVALID
        ok = recheck_obstruction(doc.target, doc, tol_override or DEFAULT_TOL)
        print(_dump({"kind": doc.kind, "rechecked": ok}))
        return EXIT_OK if ok else EXIT_VERIFY_FAILED
    if not isinstance(doc, certkit.FactorizationCertificate):
        _err("expected a factorization certificate")
        return EXIT_INVALID
    report = certkit.verify_certificate(doc, tol_override or doc.tol)
    print(_dump(certkit.to_dict(report)))
    if not report.passed:
        _err(f"verification failed: max defect {report.max_defect:.3e} > {report.tol.verify_tol:.3e}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _has_tol_override(args) -> bool:
    return bool(os.environ.get("SYMFACT_TOL")) or any(
        getattr(args, k, None) is not None for k in ("tol", "unitary_tol", "cluster_tol")
    )


def cmd_classify(args) -> int:
    tol = resolve_tolerance(args)
    U = load_matrix(args.input)
    try:
        report = classify_membership(U, tol)
    except SymfactError as exc:
        raise InvalidInput(str(exc)) from exc
    _emit(_dump(certkit.to_dict(report)), args.out)
    return EXIT_OK


# -- gen ---------------------------------------------------------------------

def _random_finite_spectrum(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Diagonal of roots of unity whose multiplicities satisfy the block-size rule."""
    diag = []
    remaining = dim
    while remaining > 0:
        options = [q for q in range(1, 7) if (1 if q == 1 else 2 * q) <= remaining]
        q_prime = int(rng.choice(options))
        numerators = [p for p in range(2 * q_prime) if math.gcd(p, q_prime) == 1]
        angle = RationalAngle(int(rng.choice(numerators)), 2 * q_prime)  # exp(i pi p'/q')
        block = angle.min_block_size
        copies = int(rng.integers(1, remaining // block + 1))
        diag.extend([angle.value] * (block * copies))
        remaining -= block * copies
    return np.array(diag)


def generate(kind: str, dim: int, seed: int, det_normalize: str | None = None, arc: int = 1) -> np.ndarray:
    if dim < 1:
        raise InvalidInput("--dim must be positive")
    if kind == "haar":
        mode = {None: "free", "+1": "plus_one", "-1": "minus_one"}[det_normalize]
        return haar_random_unitary(dim, seed, mode)
    rng = np.random.default_rng(seed)
    Q = haar_random_unitary(dim, int(rng.integers(0, 2**63 - 1)))
    if kind == "arc":
        if arc not in (1, 2, 3, 4):
            raise InvalidInput("--arc must be 1, 2, 3 or 4")
        margin = 0.05
        lo, hi = (arc - 1) * math.pi / 2 + margin, arc * math.pi / 2 - margin
        lam = np.exp(1j * rng.uniform(lo, hi, size=dim))
    elif kind == "finite-spectrum":
        lam = _random_finite_spectrum(dim, rng)
    else:
        raise InvalidInput(f"unknown kind {kind!r}")
    return (Q * lam) @ adjoint(Q)


def cmd_gen(args) -> int:
    U = generate(args.kind, args.dim, args.seed, args.det_normalize, args.arc)
    _emit(_dump(matrix_to_dict(U)), args.out)
    return EXIT_OK


# -- demo --------------------------------------------------------------------

def density_demo(max_power: int = 5, seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Approximate a unitary with irrational spectrum by four-symmetry products.

    Each eigenvalue exp(2 pi i t) is rounded to exp(2 pi i round(t q)/q) for
    q = 2, 4, ..., 2**max_power; every eigenvalue carries multiplicity
    2 * 2**max_power so the rounded unitaries satisfy the block-size rule.
    A determinant-obstructed scalar unitary serves as the non-density control.
    """
    q_max = 2**max_power
    mult = 2 * q_max
    turns = np.repeat(np.array(DEMO_TURNS), mult)
    dim = len(turns)
    Q = haar_random_unitary(dim, seed)
    Qh = adjoint(Q)
    U = (Q * np.exp(2j * math.pi * turns)) @ Qh

    steps = []
    for k in range(1, max_power + 1):
        q = 2**k
        rounded = np.round(turns * q) / q
        W = (Q * np.exp(2j * math.pi * rounded)) @ Qh
        cert = finite_spectrum_unitary_four_factor(W, tol, max_denominator=q)
        report = certkit.verify_certificate(cert, tol)
        steps.append(
            {
                "q": q,
                "error": operator_norm(U - W),
                "residual": report.residual,
                "verified": report.passed,
            }
        )

    control_dim = 2
    control = np.exp(1j * math.pi / 3) * np.eye(control_dim)
    return {
        "dim": dim,
        "steps": steps,
        "control": {
            "description": "exp(i pi/3) I_2",
            "det_distance": sign_distance(complex(np.linalg.det(control)))[1],
            "distance_lower_bound_s4": certkit.distance_lower_bound_s4(control, tol),
        },
    }


def cmd_demo(args) -> int:
    tol = resolve_tolerance(args)
    result = density_demo(args.max_power, args.seed, tol)
    if args.json:
        print(_dump(result))
    else:
        print(f"density demo: dim {result['dim']}, eigenvalue turns {', '.join(_fmt(t) for t in DEMO_TURNS)}")
        print(f"{'q':>5}  {'approximation error':>25}  {'factor residual':>25}  verified")
        for s in result["steps"]:
            print(f"{s['q']:>5}  {_fmt(s['error']):>25}  {_fmt(s['residual']):>25}  {s['verified']}")
        c = result["control"]
        print(f"control {c['description']}: distance to four-symmetry products >= {_fmt(c['distance_lower_bound_s4'])}")
    ok = all(s["verified"] for s in result["steps"])
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


# -- entry point ---------------------------------------------------------------

def _add_tol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="verification tolerance (overrides SYMFACT_TOL)")
    p.add_argument("--unitary-tol", type=float, default=None)
    p.add_argument("--cluster-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symfact", description="Factor unitaries into products of symmetries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="factor a unitary into symmetries")
    p.add_argument("--method", choices=METHOD_CHOICES, default="auto")
    p.add_argument("--in", dest="input", required=True, help="matrix JSON file, '-' for stdin, or a directory")
    p.add_argument("--out", default=None)
    p.add_argument("--max-denominator", type=int, default=64)
    _add_tol_flags(p)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("check", help="verify a certificate")
    p.add_argument("cert")
    _add_tol_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="membership report for lengths 1..4")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    _add_tol_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gen", help="generate test unitaries")
    p.add_argument("--kind", choices=("haar", "arc", "finite-spectrum"), required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--det-normalize", choices=("+1", "-1"), default=None)
    p.add_argument("--arc", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("demo", help="demonstrations")
    p.add_argument("which", choices=("density",))
    p.add_argument("--max-power", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    _add_tol_flags(p)
    p.set_defaults(func=cmd_demo)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except InvalidInput as exc:
        _err(str(exc))
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
