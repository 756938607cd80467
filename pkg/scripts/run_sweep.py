#!/usr/bin/env python3
"""Run an eps sweep from a config file and print the table next to the limit targets."""
import argparse
import sys

from smallhole import experiments as ex
from smallhole.config import load_config
from smallhole.output import emit_outputs


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("config", nargs="?", help="JSON config (defaults when omitted)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    args = p.parse_args()

    cfg = load_config(args.config, args.overrides)
    res = ex.run_sweep(cfg)
    out = cfg.out_dir
    emit_outputs(res, out, cfg.to_dict(), cfg.emit_plots)

    lim = res.limit
    print(f"xi_limit={lim['xi']:.10g}  macro target={lim['scaled_macro_target']:.10g}  "
          f"micro target={lim['scaled_micro_target']:.10g}")
    print(f"{'eps':>10} {'eps*delta':>10} {'scaled u(x)':>14} {'scaled u(eps t)':>16} {'energy':>14} {'iters':>5}")
    for r in res.rows:
        print(f"{r.eps:10.4g} {r.eps_delta:10.4g} {r.scaled_u_macro:14.8f} {r.scaled_u_micro:16.8f} "
              f"{r.energy:14.8f} {r.newton_iters:5d}")
    if res.fit:
        print(f"E1_hat={res.fit['E1_hat']:.6g} (limit {res.fit['E1_limit']:.6g})  "
              f"E2_hat={res.fit['E2_hat']:.6g} (limit {res.fit['E2_limit']:.6g})")
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.value:.3e} (tol {c.tolerance:.1e})")
    print(f"outputs written to {out}")
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
