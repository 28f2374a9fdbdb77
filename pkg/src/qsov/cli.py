"""Command line front end for the verification harness."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness as H


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=H.MODELS, default="gl2-rational")
    p.add_argument("--sites", type=int, default=3, help="number of sites N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "float"), default="float")
    p.add_argument("--tol", type=float, default=None,
                   help="override the bound of every upper-bound check")
    p.add_argument("--out", type=Path, default=None,
                   help=f"report path (default: ${H.OUT_DIR_ENV} or ./reports)")
    p.add_argument("--eta", type=complex, default=None)
    p.add_argument("--alpha", type=complex, default=None)
    p.add_argument("--trig-twist", type=int, choices=(0, 1), default=0,
                   help="a in the six-vertex twist K^(a, alpha)")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in H.SUITES:
        _common(sub.add_parser(name, help=f"run the {name} suite"))
    sp = sub.add_parser("sweep", help="run a suite over a parameter axis")
    _common(sp)
    sp.add_argument("--suite", choices=H.SUITES + ("all",), default="all")
    sp.add_argument("--axis", choices=H.SWEEP_AXES, required=True)
    sp.add_argument("--values", nargs="+", required=True)
    rp = sub.add_parser("report", help="summarize report files")
    rp.add_argument("files", nargs="+", type=Path)
    rp.add_argument("--json", action="store_true")
    return parser


def _config(args, suite: str) -> H.ExperimentConfig:
    return H.ExperimentConfig(suite=suite, model=args.model, sites=args.sites, seed=args.seed,
                              mode=args.mode, tol=args.tol, eta=args.eta, alpha=args.alpha,
                              trig_twist=args.trig_twist)


def _print_results(results, quiet: bool) -> None:
    if quiet:
        return
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        val = "error" if r.residual is None else f"{r.residual:.3e}"
        line = f"{flag}  {r.suite:9s} {r.check:34s} {val:>10s}  tol {r.tol:.1e}"
        if r.error:
            line += f"  ({r.error})"
        print(line)


def _print_sweep_table(blocks) -> None:
    suites = sorted({r.suite for _, rs in blocks for r in rs})
    print(f"{'value':>14s}  " + "  ".join(f"{s:>10s}" for s in suites) + "  failed")
    for head, rs in blocks:
        s = H.summarize([r.row() for r in rs])
        cells = [s["max_residual"].get(name) for name in suites]
        val = json.dumps(head["sweep"]["value"])
        print(f"{val:>14s}  " + "  ".join("         -" if c is None else f"{c:10.2e}" for c in cells)
              + f"  {s['failed']}")


def _parse_value(axis: str, v: str):
    return int(v) if axis in ("N", "seed") else complex(v)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        ok = True
        out = {}
        for f in args.files:
            s = H.summarize(H.read_report(f))
            out[str(f)] = s
            ok &= s["failed"] == 0
            if not args.json:
                print(f"{f}: {s['passed']}/{s['checks']} passed")
                for suite, check, res, tol in s["failures"]:
                    print(f"  FAIL {suite}/{check}: residual {res} tol {tol}")
        if args.json:
            print(json.dumps(out, indent=2))
        return 0 if ok else 1

    try:
        if args.command == "sweep":
            cfg = _config(args, args.suite)
            values = [_parse_value(args.axis, v) for v in args.values]
            blocks = H.sweep(cfg, args.axis, values)
            tag = f"sweep-{args.axis}-{cfg.suite}-{cfg.model}-{cfg.mode}-s{cfg.seed}"
        else:
            cfg = _config(args, args.command)
            blocks = [(H.header(cfg), H.run_checks(cfg))]
            tag = None
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    path = args.out or H.default_report_path(cfg, tag)
    H.write_report(path, blocks)
    results = [r for _, rs in blocks for r in rs]
    _print_results(results, args.quiet)
    if args.command == "sweep" and not args.quiet:
        _print_sweep_table(blocks)
    ok = H.all_passed(results)
    if not args.quiet:
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed; report: {path}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
