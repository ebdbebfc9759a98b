"""Command-line entry point.

Exit codes: 0 for success / a passing check, 1 for a mathematically negative
answer (vanishing product, failed verification, solver below tolerance),
2 for usage or I/O errors.  Results go to stdout as JSON (CSV for tables on
request); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bounds as bounds_mod
from . import cobordism, masspart, solver

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


def _emit(obj, out_path: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def _parse_forms(text: str, k: int) -> list[cobordism.GroupElement]:
    forms = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        forms.append(cobordism.coerce_element(chunk, k=k))
    if not forms:
        raise ValueError("no forms given")
    return forms


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_range(text: str) -> list[int]:
    """Comma-separated integers and a..b spans, e.g. "1..8,16,32"."""
    values: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            a, b = tok.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty range {tok!r}")
            values.extend(range(lo, hi + 1))
        else:
            values.append(int(tok))
    if not values:
        raise ValueError(f"no values in {text!r}")
    return values


def _load_measures(spec: str) -> list[masspart.WeightedPointMeasure]:
    return [masspart.load_point_file(p) for p in spec.split(",") if p]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthopart",
        description="Nonvanishing criteria over GF(2), orthogonal mass-partition bounds, and equipartition solvers.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress stderr progress")
    sub = parser.add_subparsers(dest="command", required=True)

    crit = sub.add_parser("criterion", help="nonvanishing tests for products of linear forms")
    crit_sub = crit.add_subparsers(dest="space", required=True)
    cs = crit_sub.add_parser("spheres", help="test in a ring with explicit caps")
    cs.add_argument("--dims", required=True, help="comma-separated caps, e.g. 2,2")
    cs.add_argument("--forms", required=True, help="semicolon-separated bit strings, leftmost bit is the first slot")
    cv = crit_sub.add_parser("stiefel", help="test in the frame-manifold ring with caps n-1..n-k")
    cv.add_argument("--n", type=int, required=True)
    cv.add_argument("--k", type=int, required=True)
    cv.add_argument("--forms", required=True)

    b = sub.add_parser("bounds", help="dimension bound tables")
    b.add_argument("--m", required=True, help="range, e.g. 1..64 or 3,5,7")
    b.add_argument("--k", required=True, help="range, e.g. 2..5")
    b.add_argument("--n", default="k", help="subset order: an integer or 'k' (default)")
    b.add_argument("--format", choices=("json", "csv"), default="json")

    v = sub.add_parser("verify", help="check an equipartition claim against point sets")
    v.add_argument("--points", required=True, help="comma-separated point files, one per measure")
    v.add_argument("--planes", required=True, help="JSON file with plane coefficient vectors")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--tol", type=float, default=1e-3, help="per-cell fraction tolerance")
    v.add_argument("--ortho-tol", type=float, default=1e-9)

    s = sub.add_parser("solve", help="search for orthogonal equipartitioning planes")
    s.add_argument("--points", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=None, help="verification cell tolerance (default 4/sqrt(N))")
    s.add_argument("--residual-tol", type=float, default=None)
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument("--out", default=None, help="also write the result JSON here")

    p = sub.add_parser("pancake", help="two orthogonal lines, four equal parts, exact")
    p.add_argument("--points", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for interface uniformity; the sweep is deterministic")
    p.add_argument("--out", default=None)

    t = sub.add_parser("selftest", help="run the built-in oracles")
    t.add_argument("--max-k", type=int, default=4, help="largest k for the permutation-sum identity")

    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return EXIT_OK if code == 0 else EXIT_USAGE

    try:
        if args.command == "criterion":
            if args.space == "spheres":
                dims = _parse_int_list(args.dims)
                forms = _parse_forms(args.forms, k=len(dims))
                report = cobordism.criterion_spheres(forms, dims)
            else:
                dims_k = args.k
                forms = _parse_forms(args.forms, k=dims_k)
                report = cobordism.criterion_stiefel(forms, args.n, args.k)
            _emit(report.to_json_dict())
            return EXIT_OK if report.nonzero else EXIT_NEGATIVE

        if args.command == "bounds":
            ms = _parse_range(args.m)
            ks = _parse_range(args.k)
            n_mode: int | str = "k" if args.n == "k" else int(args.n)
            records = bounds_mod.bounds_table(ms, ks, n_mode)
            if args.format == "csv":
                sys.stdout.write(bounds_mod.table_to_csv(records))
            else:
                _emit({"records": [r.to_json_dict() for r in records]})
            return EXIT_OK

        if args.command == "verify":
            measures = _load_measures(args.points)
            planes = masspart.load_planes_json(args.planes)
            report = masspart.verify_equipartition(
                measures, planes, args.n, args.tol, args.ortho_tol
            )
            _emit(report.to_json_dict())
            return EXIT_OK if report.passed else EXIT_NEGATIVE

        if args.command == "solve":
            measures = _load_measures(args.points)
            opts = solver.SolveOptions(
                restarts=args.restarts,
                max_iters=args.max_iters,
                seed=args.seed,
                verify_tol=args.tol,
                residual_tol=args.residual_tol,
                threads=max(1, args.threads),
            )
            if not args.quiet:
                print(
                    f"solving: k={args.k} n={args.n or args.k} restarts={args.restarts} seed={args.seed}",
                    file=sys.stderr,
                )
            result = solver.solve_orthogonal(measures, args.k, args.n, opts)
            _emit(result.to_json_dict(), args.out)
            return EXIT_OK if result.status == "solved" else EXIT_NEGATIVE

        if args.command == "pancake":
            measures = _load_measures(args.points)
            if len(measures) != 1:
                raise ValueError("pancake expects exactly one point file")
            result = solver.pancake_solve(measures[0])
            _emit(result.to_json_dict(), args.out)
            return EXIT_OK if result.status == "solved" else EXIT_NEGATIVE

        if args.command == "selftest":
            return _selftest(max_k=args.max_k, quiet=args.quiet)

    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


def _selftest(max_k: int = 4, quiet: bool = False) -> int:
    from .f2ring import RingSpec

    identity_pairs = []
    identity_ok = True
    for k in range(1, max_k + 1):
        for n in range(1, k + 1):
            cap = bounds_mod.constraint_count(n, k)
            ring = RingSpec((cap,) * k)
            expanded = cobordism.partition_product(k, n, ring)
            closed = cobordism.partition_product_perm_sum(k, n, ring)
            same = expanded == closed
            identity_ok = identity_ok and same
            identity_pairs.append({"k": k, "n": n, "match": same})
            if not quiet:
                print(f"perm-sum identity k={k} n={n}: {'ok' if same else 'MISMATCH'}", file=sys.stderr)
    scan = cobordism.certificate_margin_scan(6)
    payload = {
        "perm_sum_identity": {"max_k": max_k, "ok": identity_ok, "pairs": identity_pairs},
        "margin_scan": scan.to_json_dict(),
        "pass": identity_ok and scan.ok,
    }
    _emit(payload)
    return EXIT_OK if payload["pass"] else EXIT_NEGATIVE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
