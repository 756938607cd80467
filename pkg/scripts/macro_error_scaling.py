#!/usr/bin/env python3
"""How the rescaled macroscopic error depends on eps and on the evaluation point.

For delta = 1/(eps |log eps|) the correction to eps delta u(eps, x) is proportional to
eps delta = 1/|log eps|, so the error at the smallest grid value is roughly
C(x) / |log eps_min| with C(x) read off here.
"""
import argparse

import numpy as np

from smallhole import experiments as ex
from smallhole.config import load_config


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("config", nargs="?")
    p.add_argument("--points", type=float, nargs="+", default=[0.3, 0.5, 0.8, 1.1],
                   help="x coordinates of evaluation points on the positive axis")
    args = p.parse_args()

    base = load_config(args.config)
    for x in args.points:
        cfg = load_config(args.config, [f"x_macro=[{x}, 0.0]"])
        try:
            cfg.validate()
        except ValueError as exc:
            print(f"x=({x}, 0): skipped ({exc})")
            continue
        res = ex.run_sweep(cfg)
        err = np.array(res.fit["scaled_macro_errors"])
        ed = np.array([r.eps_delta for r in res.rows])
        orders = res.fit["orders_macro_vs_eps_delta"]
        print(f"x=({x}, 0): final error {err[-1]:.4f}, C = error/(eps delta) {err[-1] / ed[-1]:.4f}, "
              f"last order vs eps delta {orders[-1]:.3f}, monotone {res.fit['monotone_macro']}")
    print(f"grid: eps in [{base.eps_grid.eps_min}, {base.eps_grid.eps_max}], "
          f"eps delta at the end = {1 / abs(np.log(base.eps_grid.eps_min)):.4f}")


if __name__ == "__main__":
    main()
