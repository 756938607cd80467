"""Command line entry point: solve, limit, sweep, convergence, verify."""
from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .config import load_config
from .output import emit_outputs, write_csv, write_json


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smallhole",
                                description="Laplace problem in a domain with a small hole: "
                                            "finite-eps solves, limit system and eps sweeps.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "solve at one eps"), ("limit", "limit system and xi roots"),
                       ("sweep", "eps sweep with asymptotic fits"),
                       ("convergence", "re-solve for a list of node counts"),
                       ("verify", "bundled identity checks")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", metavar="PATH", help="JSON config file (defaults apply when omitted)")
        s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted override, e.g. eps_grid.count=8 or problem.n_outer=256")
        s.add_argument("--out", metavar="DIR", help="output directory (overrides config and env)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides)
        if args.out:
            cfg.output_dir = args.out
        cfg.validate()
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return 2
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "sweep":
        result = ex.run_sweep(cfg)
        emit_outputs(result, out, cfg.to_dict(), cfg.emit_plots)
        passed = result.passed
        checks = [(c.name, c.value, c.tolerance, c.passed) for c in result.checks]
    else:
        runner = {"solve": ex.run_solve, "limit": ex.run_limit,
                  "convergence": ex.run_convergence, "verify": ex.run_verify}[args.command]
        report = runner(cfg)
        report["config"] = cfg.to_dict()
        write_json(out / f"{args.command}.json", report)
        if args.command == "convergence":
            cols = ("n", "xi", "u_macro", "u_micro", "energy", "delta", "oracle_error",
                    "limit_mu_i_spread", "newton_iters", "residual")
            write_csv(out / "convergence.csv", cols, report["rows"])
        passed = report["passed"]
        checks = [(c["name"], c["value"], c["tolerance"], c["passed"]) for c in report["checks"]]

    for name, value, tol, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<40s} {value:.3e}  (tol {tol:.1e})")
    print(f"{args.command}: {'all checks passed' if passed else 'some checks failed'}; outputs in {out}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
