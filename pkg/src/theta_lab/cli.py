"""Command-line surface.

Subcommands: `eval` (one theta value), `verify` (identity suites),
`half-periods` (enumeration with parity tags), `pfaffian`.

Exit codes: 0 success / all cells pass, 1 verification failures,
2 invalid input.  Complex numbers are encoded as [re, im] pairs and
matrices row-major, so reports round-trip losslessly at double precision.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .harness import SuiteConfig, run_suite
from .identities import IDENTITY_NAMES
from .numerics import SkewMatrix, pfaffian
from .theta import Characteristic, EvalSettings, RiemannMatrix, enumerate_half_periods, theta_eval_info

__all__ = ["main"]


def _load_json_arg(raw: str):
    """Inline JSON if the argument looks like JSON, else a file path."""
    text = raw.strip()
    if not text.startswith(("[", "{")):
        text = Path(raw).read_text()
    return json.loads(text)


def _parse_tau(obj) -> RiemannMatrix:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2 and arr.shape == (1, 2):  # g=1 shorthand: [[re, im]]
        return RiemannMatrix(np.array([[complex(arr[0, 0], arr[0, 1])]]))
    if arr.ndim == 3 and arr.shape[0] == arr.shape[1] and arr.shape[2] == 2:
        return RiemannMatrix(arr[..., 0] + 1j * arr[..., 1])
    raise ValueError("tau must be a g x g matrix of [re, im] pairs (or [[re, im]] for g = 1)")


def _parse_point(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("u must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _parse_char(obj) -> Characteristic:
    if not isinstance(obj, dict) or set(obj) != {"a", "b"}:
        raise ValueError('characteristic must be {"a": [...], "b": [...]}')
    return Characteristic(np.asarray(obj["a"], dtype=float), np.asarray(obj["b"], dtype=float))


def _parse_skew(obj) -> SkewMatrix:
    def entry(x) -> complex:
        if isinstance(x, (int, float)):
            return complex(x)
        if isinstance(x, list) and len(x) == 2:
            return complex(x[0], x[1])
        raise ValueError("matrix entries must be numbers or [re, im] pairs")

    if isinstance(obj, dict):
        if set(obj) != {"n", "upper"}:
            raise ValueError('upper-triangle form must be {"n": int, "upper": [...]}')
        n = int(obj["n"])
        vals = [entry(x) for x in obj["upper"]]
        if len(vals) != n * (n - 1) // 2:
            raise ValueError(f"expected {n * (n - 1) // 2} upper-triangle entries for n={n}")
        A = np.zeros((n, n), dtype=complex)
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                A[i, j] = vals[k]
                k += 1
        return SkewMatrix.from_upper(A)
    rows = [[entry(x) for x in row] for row in obj]
    return SkewMatrix.from_matrix(np.asarray(rows, dtype=complex), tol=1e-12)


def cmd_eval(args) -> int:
    tau = _parse_tau(_load_json_arg(args.tau))
    u = _parse_point(_load_json_arg(args.u))
    ch = _parse_char(_load_json_arg(args.char))
    value, radius, terms = theta_eval_info(u, tau, ch, EvalSettings(epsilon=args.eps))
    print(json.dumps({"value": [value.real, value.imag], "radius": radius, "terms": terms}))
    return 0


def _format_table(report) -> str:
    rows = [("identity", "g", "max_residual", "mean_residual", "failures")]
    for c in report.cells:
        rows.append(
            (c.identity, str(c.g), f"{c.max_residual:.3e}", f"{c.mean_residual:.3e}", str(len(c.failures)))
        )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = []
    for r in rows:
        lines.append(
            f"{r[0]:<{widths[0]}}  {r[1]:>{widths[1]}}  {r[2]:>{widths[2]}}  "
            f"{r[3]:>{widths[3]}}  {r[4]:>{widths[4]}}"
        )
    return "\n".join(lines)


def cmd_verify(args) -> int:
    if args.identity == "all":
        names = IDENTITY_NAMES
    else:
        names = tuple(n.strip() for n in args.identity.split(",") if n.strip())
        bad = [n for n in names if n not in IDENTITY_NAMES]
        if bad:
            print(
                f"error: unknown identity {', '.join(bad)}; valid names: "
                f"{', '.join(IDENTITY_NAMES)}",
                file=sys.stderr,
            )
            return 2
    dims = tuple(int(x) for x in args.g.split(","))
    cfg = SuiteConfig(
        seed=args.seed,
        dims=dims,
        trials_per_cell=args.trials,
        identities=names,
        target_residual=args.target,
    )
    report = run_suite(cfg)
    print(_format_table(report))
    status = "PASS" if report.total_failures == 0 else "FAIL"
    print(f"wall time: {report.wall_time_s:.2f} s   failures: {report.total_failures}   {status}")
    if args.json:
        payload = json.dumps(report.to_dict(include_wall_time=args.timing), indent=2) + "\n"
        Path(args.json).write_text(payload)
    return 0 if report.total_failures == 0 else 1


def cmd_half_periods(args) -> int:
    if args.g < 1:
        print("error: g must be >= 1", file=sys.stderr)
        return 2
    even, odd = enumerate_half_periods(args.g)
    for tag, group in (("even", even), ("odd", odd)):
        for hp in group:
            a = ",".join("1/2" if x else "0" for x in (hp.a * 2).astype(int))
            b = ",".join("1/2" if x else "0" for x in (hp.b * 2).astype(int))
            print(f"{tag}  a=[{a}] b=[{b}]")
    print(f"even: {len(even)}  odd: {len(odd)}")
    return 0


def cmd_pfaffian(args) -> int:
    skew = _parse_skew(_load_json_arg(args.matrix))
    if skew.n % 2:
        print(f"error: Pfaffian requires an even dimension, got {skew.n}", file=sys.stderr)
        return 2
    pf = pfaffian(skew)
    det = complex(np.linalg.det(skew.entries))
    check = abs(pf * pf - det)
    print(json.dumps({"pfaffian": [pf.real, pf.imag], "pf_squared_minus_det": check}))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="theta-lab",
        description="Evaluate multidimensional theta functions and verify their identity families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one theta value")
    p_eval.add_argument("--tau", required=True, help="g x g complex matrix as JSON (inline or file)")
    p_eval.add_argument("--u", required=True, help="argument as JSON list of [re, im] pairs")
    p_eval.add_argument("--char", required=True, help='characteristic as {"a": [...], "b": [...]}')
    p_eval.add_argument("--eps", type=float, default=1e-12, help="truncation tolerance")
    p_eval.set_defaults(func=cmd_eval)

    p_verify = sub.add_parser("verify", help="run identity suites")
    p_verify.add_argument("--identity", default="all", help="identity name(s) or 'all'")
    p_verify.add_argument("--g", default="1,2", help="comma-separated dimensions")
    p_verify.add_argument("--trials", type=int, default=25)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--target", type=float, default=1e-9)
    p_verify.add_argument("--json", default=None, help="path for the JSON report")
    p_verify.add_argument(
        "--timing",
        action="store_true",
        help="embed measured wall time in the JSON report (makes it non-reproducible)",
    )
    p_verify.set_defaults(func=cmd_verify)

    p_hp = sub.add_parser("half-periods", help="enumerate half-periods with parity tags")
    p_hp.add_argument("--g", type=int, required=True)
    p_hp.set_defaults(func=cmd_half_periods)

    p_pf = sub.add_parser("pfaffian", help="Pfaffian of a skew matrix")
    p_pf.add_argument("--matrix", required=True, help="JSON file or inline JSON")
    p_pf.set_defaults(func=cmd_pfaffian)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # malformed input must never crash the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
