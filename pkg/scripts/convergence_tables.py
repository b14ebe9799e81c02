"""Refinement tables: traveling wave, exact elliptic solution, signum-Gordon.

Usage: python scripts/convergence_tables.py [--threads N]
"""

import argparse

from l1pde.applications import sg_self_convergence
from l1pde.diagnostics import convergence_rate, successive_ratios
from l1pde.studies import elliptic_convergence, traveling_wave_convergence


def show(title, cols, rows):
    print(f"\n{title}")
    print("  ".join(f"{c:>12s}" for c in cols))
    for r in rows:
        print("  ".join(f"{v:12d}" if isinstance(v, int) else f"{v:12.4e}" for v in r))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    tw = traveling_wave_convergence(threads=args.threads)
    show("traveling wave, max-in-time error", ["n", "h", "L1", "L2", "Linf"],
         zip(tw["n"], tw["h"], tw["E_L1"], tw["E_L2"], tw["E_Linf"]))
    print("slopes: " + ", ".join(f"{q} {tw[f'slope_{q}']:.3f}" for q in ("L1", "L2", "Linf")))

    el = elliptic_convergence(threads=args.threads)
    show("stationary problem vs closed form", ["n", "h", "Linf", "iterations"],
         zip(el["n"], el["h"], el["E_Linf"], el["iterations"]))
    print(f"slope: {el['slope_Linf']:.3f}")

    sg = sg_self_convergence()
    ratios = successive_ratios(sg["errors"])
    show("signum-Gordon oscillon vs fine reference", ["n", "h", "L2"],
         zip(sg["n"], sg["h"], sg["errors"]))
    print(f"ratios: {', '.join(f'{r:.3f}' for r in ratios)}; "
          f"slope {convergence_rate(sg['h'], sg['errors'])['slope']:.3f}")


if __name__ == "__main__":
    main()
