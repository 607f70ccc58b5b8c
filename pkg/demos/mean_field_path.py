#!/usr/bin/env python3
"""Solve the deterministic input path for a few excitation levels.

The limit equation I_t = (2p-1) q int_0^t phi(t-s) h(I_s) ds settles at the
root of x = (2p-1) q h(x); this prints the terminal value next to that root
so you can see how fast the path gets there.
"""

import argparse

from hawkes_meanfield import (arctan_transfer, exponential_kernel,
                              fixed_point, solve_mean_field)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=float, default=12.0)
    ap.add_argument("--q", type=float, default=0.5)
    args = ap.parse_args()

    kernel = exponential_kernel(1.0)
    h = arctan_transfer()

    print(f"q = {args.q}, horizon = {args.horizon}")
    print(f"{'p':>5} {'I(T)':>10} {'fixed point':>12} {'gap':>10}")
    for p in (0.2, 0.35, 0.5, 0.65, 0.8, 0.95):
        path = solve_mean_field(kernel, h, p, args.q, args.horizon)
        star = fixed_point(kernel, h, p, args.q)
        terminal = path.values[-1]
        print(f"{p:>5.2f} {terminal:>10.5f} {star:>12.5f} "
              f"{abs(terminal - star):>10.2e}")


if __name__ == "__main__":
    main()
