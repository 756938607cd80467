#!/usr/bin/env python3
"""Self-convergence in N at fixed eps, plus the oracle error when the config is an annulus."""
import argparse
import sys

from smallhole import experiments as ex
from smallhole.config import load_config


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("config", nargs="?")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n", type=int, nargs="+", default=None, help="node counts (default from config)")
    args = p.parse_args()

    cfg = load_config(args.config)
    rep = ex.run_convergence(cfg, args.n, args.eps)
    print(f"eps = {rep['eps']}")
    print(f"{'N':>5} {'xi':>22} {'delta':>10} {'oracle err':>10} {'residual':>10}")
    for r in rep["rows"]:
        print(f"{r['n']:5d} {r['xi']:22.16g} {r['delta']:10.2e} {r['oracle_error']:10.2e} {r['residual']:10.2e}")
    for c in rep["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  {c['value']:.3e}")
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
