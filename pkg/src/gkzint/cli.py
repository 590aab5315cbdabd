"""Command-line front end: system generation, integration, verification.

Subcommands:

  system     emit the hypergeometric system data (exponent matrix, lattice
             basis, Euler operators, toric pairs for the basis)
  integrate  evaluate Z over an admissible contour
  moments    evaluate a set of moment integrals
  verify     run the full verification pipeline and exit by verdict
  selftest   check the quadrature engine against closed-form values

Input is a polynomial document (JSON) from a file path or standard input
("-"). Output documents go to standard output with floats printed to 17
significant digits; wall-clock timing goes to standard error so output
stays byte-identical for identical (input, config, seed). Exit codes:
0 pass, 1 fail, 2 inconclusive (including contour-search failure),
3 input error.

Every flag can also be set through an environment variable with the
GKZINT_ prefix (e.g. GKZINT_TOL for --tol); flags win over environment.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import jsonio, oracle
from .integrator import (
    Contour,
    ContourError,
    admissible_contour,
    compute_moments,
    integrate_Z,
)
from .lattice import AlphaParameter, euler_rows, kernel_basis
from .operators import euler_operator, toric_pair
from .support import InputError, check_spanning, parse_polynomial
from .verifier import RunConfig, verify_all

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3

_ENV_PREFIX = "GKZINT_"


def _env_default(name: str, cast, fallback):
    raw = os.environ.get(_ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad value for {_ENV_PREFIX}{name}: {raw!r} ({exc})") from exc


def _parse_threads(raw) -> object:
    if raw == "auto":
        return "auto"
    return int(raw)


def _parse_contour_policy(raw: str):
    """auto, or per-variable angle pairs "tm,tp;tm,tp;..." in radians."""
    if raw == "auto":
        return "auto"
    pairs = []
    for part in raw.split(";"):
        bits = part.split(",")
        if len(bits) != 2:
            raise InputError(
                f"contour spec must be 'auto' or 'tm,tp;...' per variable, got {raw!r}"
            )
        try:
            pairs.append((float(bits[0]), float(bits[1])))
        except ValueError as exc:
            raise InputError(f"bad contour angle in {part!r}") from exc
    return tuple(pairs)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--tol",
        type=float,
        default=_env_default("TOL", float, 1e-9),
        help="relative quadrature tolerance (default 1e-9)",
    )
    p.add_argument(
        "--fd-h",
        type=float,
        default=_env_default("FD_H", float, 1e-5),
        help="relative finite-difference step (default 1e-5)",
    )
    p.add_argument(
        "--tol-verify",
        type=float,
        default=_env_default("TOL_VERIFY", float, 1e-6),
        help="relative Euler-residual tolerance (default 1e-6)",
    )
    p.add_argument(
        "--tol-fd-pair",
        type=float,
        default=_env_default("TOL_FD_PAIR", float, 1e-3),
        help="relative tolerance for toric FD comparisons (default 1e-3)",
    )
    p.add_argument(
        "--samples",
        type=int,
        default=_env_default("SAMPLES", int, 25),
        help="extra random lattice vectors to test (default 25)",
    )
    p.add_argument(
        "--l1-bound",
        type=int,
        default=_env_default("L1_BOUND", int, 6),
        help="l1 bound for sampled lattice vectors (default 6)",
    )
    p.add_argument(
        "--seed",
        type=int,
        default=_env_default("SEED", int, 0),
        help="seed for lattice sampling (default 0)",
    )
    p.add_argument(
        "--contour",
        type=str,
        default=_env_default("CONTOUR", str, "auto"),
        help="contour policy: auto, or explicit 'tm,tp;tm,tp;...' in radians",
    )
    p.add_argument(
        "--threads",
        type=str,
        default=_env_default("THREADS", str, "1"),
        help="worker threads for independent checks: integer or auto (default 1)",
    )


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read input {path!r}: {exc}") from exc


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        quad_tol=args.tol,
        fd_h_rel=args.fd_h,
        tol_verify=args.tol_verify,
        tol_fd_pair=args.tol_fd_pair,
        extra_lattice_samples=args.samples,
        lattice_l1_bound=args.l1_bound,
        seed=args.seed,
        contour_policy=_parse_contour_policy(args.contour),
        threads=_parse_threads(args.threads),
        debug_zero_alpha=getattr(args, "debug_alpha_zero", False),
    )


def _emit(doc) -> None:
    sys.stdout.write(jsonio.dumps(doc) + "\n")


def cmd_system(args: argparse.Namespace) -> int:
    support, coeffs = parse_polynomial(_read_input(args.input))
    if not check_spanning(support):
        raise InputError("exponents do not span the ambient space")
    basis = kernel_basis(support)
    doc = {
        "n": support.n,
        "exponents": [list(k) for k in support.exponents],
        "exponent_matrix": [
            [int(x) for x in row] for row in support.exponent_matrix()
        ],
        "has_constant_term": support.has_constant_term,
        "lattice_basis": basis.to_document(),
        "alpha": list(AlphaParameter.for_dimension(support.n).entries),
        "euler_operators": [
            euler_operator(support, row.axis).to_document()
            for row in euler_rows(support)
        ],
        "toric_pairs_for_basis": [
            toric_pair(support, v).to_document() for v in basis.vectors
        ],
    }
    _emit(doc)
    return EXIT_PASS


def cmd_integrate(args: argparse.Namespace) -> int:
    _support, coeffs = parse_polynomial(_read_input(args.input))
    config = _config_from_args(args)
    contour = admissible_contour(coeffs, config.contour_policy)
    res = integrate_Z(coeffs, contour, config.quad_tol, max_evals=config.quad_max_evals)
    _emit({"contour": contour.to_document(), "Z": res.to_document()})
    return EXIT_PASS if res.converged else EXIT_INCONCLUSIVE


def cmd_moments(args: argparse.Namespace) -> int:
    support, coeffs = parse_polynomial(_read_input(args.input))
    config = _config_from_args(args)
    contour = admissible_contour(coeffs, config.contour_policy)
    if args.index:
        indices = []
        for raw in args.index:
            try:
                indices.append(tuple(int(x) for x in raw.split(",")))
            except ValueError as exc:
                raise InputError(f"bad moment index {raw!r}") from exc
    else:
        indices = list(support.exponents)
    table = compute_moments(
        indices, coeffs, contour, config.quad_tol, max_evals=config.quad_max_evals
    )
    _emit({"contour": contour.to_document(), "moments": table.to_document()})
    ok = all(res.converged for res in table.entries.values())
    return EXIT_PASS if ok else EXIT_INCONCLUSIVE


def cmd_verify(args: argparse.Namespace) -> int:
    _support, coeffs = parse_polynomial(_read_input(args.input))
    config = _config_from_args(args)
    start = time.perf_counter()
    report = verify_all(coeffs, config)
    _emit(report.to_document())
    print(f"wall time: {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(report.verdict, EXIT_INCONCLUSIVE)


def _selftest_cases():
    """Closed-form targets exercising both engine paths and both contours."""
    cases = []
    for name, entries in [
        ("gaussian_1d_unit", (-1.0,)),
        ("gaussian_1d_scaled", (-2.0,)),
        ("gaussian_2d_unit", (-1.0, -1.0)),
        ("gaussian_3d_mixed", (-1.0, -0.5, -2.0)),
    ]:
        form = oracle.GaussianForm.diagonal(entries)
        n = len(entries)
        terms = []
        for i, a in enumerate(entries):
            k = [0] * n
            k[i] = 2
            terms.append({"k": k, "c": [float(a), 0.0]})
        cases.append((name, {"n": n, "terms": terms}, oracle.gaussian_Z(form)))
    for m, a in [(1, 1.0), (2, 1.0), (3, 1.0), (2, 2.0)]:
        cases.append(
            (
                f"monomial_m{m}_a{a:g}",
                {"n": 1, "terms": [{"k": [2 * m], "c": [-a, 0.0]}]},
                oracle.monomial_Z(m, a),
            )
        )
    cross = {
        "n": 2,
        "terms": [
            {"k": [2, 0], "c": [-1.0, 0.0]},
            {"k": [1, 1], "c": [0.3, 0.0]},
            {"k": [0, 2], "c": [-1.0, 0.0]},
        ],
    }
    form = oracle.GaussianForm(((-1.0, 0.15), (0.15, -1.0)))
    cases.append(("gaussian_2d_cross", cross, oracle.gaussian_Z(form)))
    return cases


def cmd_selftest(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    bound = max(50.0 * config.quad_tol, 1e-10)
    checks = []
    ok_all = True
    for name, doc, expected in _selftest_cases():
        _support, coeffs = parse_polynomial(doc)
        contour = admissible_contour(coeffs, "auto")
        res = integrate_Z(coeffs, contour, config.quad_tol, max_evals=config.quad_max_evals)
        rel = abs(res.value - expected) / abs(expected)
        ok = res.converged and rel <= bound
        ok_all = ok_all and ok
        checks.append(
            {
                "name": name,
                "relative_error": rel,
                "bound": bound,
                "status": "pass" if ok else "fail",
            }
        )
    _emit({"checks": checks, "status": "pass" if ok_all else "fail"})
    return EXIT_PASS if ok_all else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkzint",
        description=(
            "Generate the GKZ hypergeometric system attached to a polynomial's "
            "support and verify it numerically for Z = int exp(S(x)) dx."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_system = sub.add_parser("system", help="emit the hypergeometric system data")
    p_system.add_argument("input", nargs="?", default="-", help="input file or - for stdin")
    p_system.set_defaults(func=cmd_system)

    p_int = sub.add_parser("integrate", help="evaluate Z over an admissible contour")
    p_int.add_argument("input", nargs="?", default="-")
    _add_common_flags(p_int)
    p_int.set_defaults(func=cmd_integrate)

    p_mom = sub.add_parser("moments", help="evaluate moment integrals")
    p_mom.add_argument("input", nargs="?", default="-")
    p_mom.add_argument(
        "--index",
        action="append",
        default=None,
        help="moment multi-index like '2,0' (repeatable; default: all support exponents)",
    )
    _add_common_flags(p_mom)
    p_mom.set_defaults(func=cmd_moments)

    p_ver = sub.add_parser("verify", help="verify the full system; exit by verdict")
    p_ver.add_argument("input", nargs="?", default="-")
    _add_common_flags(p_ver)
    p_ver.add_argument(
        "--debug-alpha-zero",
        action="store_true",
        help="corrupt the Euler right-hand side to 0 (mutation sentinel; must fail)",
    )
    p_ver.set_defaults(func=cmd_verify)

    p_self = sub.add_parser("selftest", help="oracle-vs-quadrature self checks")
    _add_common_flags(p_self)
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ContourError as exc:
        print(f"contour error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
