"""Command-line driver: ``dirac-lab <command> [flags]``.

Exit codes: 0 success, 1 invalid input or flags, 2 numerical failure
(including a failed check in ``roundtrip`` and ``verify``).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import docio
from .direct import DEFAULT_Z_GRID, summation_identity_check, wronskian_residual
from .errors import InadmissibleDataError, NumericalError, ValidationError
from .inverse import recover_potential
from .jalgebra import Signature, default_tol
from .potential import DEFAULT_MAX_NORM, dirac_to_schur, random_schur, schur_to_dirac
from .snode import (
    build_snode,
    check_fundamental_representation,
    j_form_residual,
    k_identity_residual,
    operator_identity_residual,
    resolvent_residual,
    similarity_residual,
)
from .taylor import DEFAULT_RADIUS, DEFAULT_SAMPLES, taylor_algebraic, taylor_numeric

ROUNDTRIP_TOL = 1e-8
VERIFY_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; that code is reserved for numerical failures
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _validation_tol(args) -> float:
    return default_tol() if args.validation_tol is None else args.validation_tol


def _signature(args) -> Signature:
    return Signature(args.m1, args.m2)


def _load_potential(path: str, tol: float):
    """A potential from a ``schur`` or ``potential`` document; also returns
    the Schur sequence when it was the input."""
    parsed = docio.read_document(path)
    if parsed["kind"] == "schur":
        schur = docio.as_schur(parsed)
        return schur_to_dirac(schur)[0], schur
    if parsed["kind"] == "potential":
        return docio.as_potential(parsed, tol), None
    raise ValidationError(f"expected a schur or potential document, got {parsed['kind']!r}")


def _emit_report(args, sig: Signature, report: dict) -> None:
    if args.json_report:
        docio.write_text(docio.dumps(docio.report_document(sig, report)), args.json_report)


def _check_max_norm(value: float) -> float:
    if not 0 < value < 1:
        raise ValidationError(f"--max-norm must lie in (0, 1), got {value}")
    return value


def cmd_gen(args) -> int:
    _check_max_norm(args.max_norm)
    if args.r < 0:
        raise ValidationError(f"--r must be >= 0, got {args.r}")
    schur = random_schur(args.seed, args.r, _signature(args), args.max_norm)
    docio.write_text(docio.dumps(docio.schur_document(schur)), args.output)
    return 0


def cmd_forward(args) -> int:
    pot, _ = _load_potential(args.input, _validation_tol(args))
    node = build_snode(pot)
    if args.method == "algebraic":
        data = taylor_algebraic(pot, node)
    else:
        data = taylor_numeric(pot, args.radius, args.samples)
    report = {"r": pot.r, "method": args.method}
    if args.dump_snode:
        res = operator_identity_residual(node)
        report["operator_identity_residual"] = res
        if not res < VERIFY_TOL:
            raise NumericalError(f"S-node operator identity residual {res:.3e} exceeds {VERIFY_TOL:.0e}")
        docio.write_text(docio.dumps(docio.snode_document(node)), args.dump_snode)
    docio.write_text(docio.dumps(docio.taylor_document(data)), args.output)
    _emit_report(args, pot.sig, report)
    return 0


def cmd_invert(args) -> int:
    parsed = docio.read_document(args.input)
    if parsed["kind"] != "taylor":
        raise ValidationError(f"expected a taylor document, got {parsed['kind']!r}")
    data = docio.as_taylor(parsed)
    try:
        pot, trace = recover_potential(data, _validation_tol(args))
    except InadmissibleDataError as exc:
        print(f"inadmissible Taylor data at level {exc.level}: min eigenvalue of S_{exc.level} = {exc.min_eig:.6e}",
              file=sys.stderr)
        _emit_report(args, data.sig, {"status": "inadmissible", "level": exc.level, "min_eig": exc.min_eig})
        return 2
    for lv in trace.levels:
        print(f"level {lv.k:3d}  min eig S_k {lv.min_eig:.6e}  identity residual {lv.identity_residual:.3e}",
              file=sys.stderr)
    docio.write_text(docio.dumps(docio.potential_document(pot)), args.output)
    _emit_report(
        args,
        data.sig,
        {
            "status": "ok",
            "min_eigs": [lv.min_eig for lv in trace.levels],
            "identity_residuals": [lv.identity_residual for lv in trace.levels],
        },
    )
    return 0


def roundtrip_report(seed: int, r: int, sig: Signature, max_norm: float, tol: float) -> dict:
    schur = random_schur(seed, r, sig, max_norm)
    pot, _ = schur_to_dirac(schur)
    szego = float(np.abs(dirac_to_schur(pot).rho - schur.rho).max())
    data = taylor_algebraic(pot)
    recovered, trace = recover_potential(data)
    deviation = max(
        float(np.linalg.norm(a - b, 2) / np.linalg.norm(b, 2)) for a, b in zip(recovered.C, pot.C)
    )
    return {
        "seed": seed,
        "r": r,
        "max_norm": max_norm,
        "tol": tol,
        "max_block_deviation": deviation,
        "szego_deviation": szego,
        "min_eig_S": float(trace.min_eigs.min()),
        "max_norm_C": float(max(np.linalg.norm(c, 2) for c in pot.C)),
        "pass": bool(deviation < tol and szego < tol),
    }


def cmd_roundtrip(args) -> int:
    _check_max_norm(args.max_norm)
    if args.r < 0:
        raise ValidationError(f"--r must be >= 0, got {args.r}")
    sig = _signature(args)
    report = roundtrip_report(args.seed, args.r, sig, args.max_norm, args.tol)
    print(f"max blockwise deviation ||C_rec - C|| / ||C||  {report['max_block_deviation']:.3e}")
    print(f"Szego bijection deviation                      {report['szego_deviation']:.3e}")
    print(f"min eigenvalue of S_r                          {report['min_eig_S']:.3e}")
    print(f"max ||C_k||                                    {report['max_norm_C']:.3e}")
    print(f"{'PASS' if report['pass'] else 'FAIL'} at tol {args.tol:.1e}")
    _emit_report(args, sig, report)
    return 0 if report["pass"] else 2


def verify_residuals(pot, zs) -> dict:
    """Every identity residual of the suite, keyed by name."""
    node = build_snode(pot)
    out = {
        "operator_identity": operator_identity_residual(node),
        "similarity": similarity_residual(node),
        "k_identity": k_identity_residual(node),
    }
    for i, z in enumerate(zs):
        tag = f"z={z.real:g}{z.imag:+g}i"
        out[f"wronskian {tag}"] = wronskian_residual(pot, z)
        out[f"summation {tag}"] = summation_identity_check(pot, z)
        out[f"representation {tag}"] = check_fundamental_representation(pot, z, node)
        out[f"resolvent {tag}"] = resolvent_residual(node, z)
        z_next = zs[(i + 1) % len(zs)]
        out[f"j_form {tag}"] = j_form_residual(node, 1 / (2 * z), 1 / (2 * z_next))
    return out


def cmd_verify(args) -> int:
    pot, _ = _load_potential(args.input, _validation_tol(args))
    zs = [complex(z) for z in (args.z or DEFAULT_Z_GRID)]
    for z in zs:
        if z.imag <= 0 or abs(z - 1j) < 1e-12:
            raise ValidationError(f"grid point {z} must lie in the upper half-plane and avoid i")
    residuals = verify_residuals(pot, zs)
    failed = [name for name, value in residuals.items() if not value < args.tol]
    for name, value in residuals.items():
        print(f"{'ok  ' if value < args.tol else 'FAIL'} {name:40s} {value:.3e}")
    _emit_report(args, pot.sig, {"tol": args.tol, "residuals": residuals, "failed": failed})
    if failed:
        print(f"failed identities: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def cmd_szego(args) -> int:
    pot, schur = _load_potential(args.input, _validation_tol(args))
    if schur is not None:
        doc = docio.potential_document(pot)
    else:
        doc = docio.schur_document(dirac_to_schur(pot))
    docio.write_text(docio.dumps(doc), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json-report", metavar="PATH", help="also write a machine-readable report")
    common.add_argument("--validation-tol", type=float, default=None,
                        help="class-membership tolerance for loaded potentials (default 1e-9 or $DIRAC_LAB_TOL)")

    def gen_flags(p):
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--m1", type=int, required=True)
        p.add_argument("--m2", type=int, required=True)
        p.add_argument("--max-norm", type=float, default=DEFAULT_MAX_NORM)

    parser = _Parser(prog="dirac-lab", description="Forward and inverse problems for discrete Dirac systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="random Schur sequence")
    gen_flags(p)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("forward", parents=[common], help="Taylor data of the Weyl function")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--dump-snode", metavar="PATH", default=None)
    p.add_argument("--method", choices=("algebraic", "numeric"), default="algebraic")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("invert", parents=[common], help="potential from Taylor data")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("roundtrip", parents=[common], help="gen, forward, invert and compare")
    gen_flags(p)
    p.add_argument("--tol", type=float, default=ROUNDTRIP_TOL)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("verify", parents=[common], help="identity suite on a potential")
    p.add_argument("--input", required=True)
    p.add_argument("--z", type=_complex_arg, action="append", help="grid point, repeatable (e.g. 1+1j)")
    p.add_argument("--tol", type=float, default=VERIFY_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("szego", parents=[common], help="convert between schur and potential documents")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_szego)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.validation_tol is not None and not args.validation_tol > 0:
            raise ValidationError("--validation-tol must be positive")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
