"""Support-edge coefficient a1 on a refinement ladder next to the quadrature value.

Usage: python scripts/free_boundary_table.py [--threads N] [--t-end T]
"""

import argparse
import dataclasses
import math

from l1pde.analytic import free_boundary_prediction
from l1pde.studies import FreeBoundaryStudy, free_boundary_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--t-end", type=float, default=FreeBoundaryStudy.t_end)
    args = ap.parse_args()
    st = dataclasses.replace(FreeBoundaryStudy(), t_end=args.t_end)
    pred = free_boundary_prediction(lambda r: st.amplitude * math.exp(-st.rate * r * r), st.gamma)
    fits = free_boundary_ladder(st, args.threads)
    print(f"{'n':>6s} {'a0':>10s} {'a1':>10s} {'beta':>8s}")
    for ft in fits:
        beta = "" if ft.beta is None else f"{ft.beta:.4f}"
        print(f"{ft.n:6d} {ft.a0:10.5f} {ft.a1:10.5f} {beta:>8s}")
    print(f"\npredicted a0 {pred.a0:.5f}, quadrature a1 {pred.a1:.6f}")


if __name__ == "__main__":
    main()
