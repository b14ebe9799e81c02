"""Stationary solve against direct toppling on the sandpile shapes.

Usage: python scripts/sandpile_compare.py [--n N]
"""

import argparse

from l1pde.applications import (
    SandpileProblem,
    jaccard,
    make_flower_mask,
    make_fractal_mask,
    sandpile_solve,
    sandpile_topple,
    two_squares,
)
from l1pde.grid import Grid


def problems(n):
    yield "two squares", two_squares(n)
    g = Grid(2, n, -1.0, 1.0)
    yield "flower", SandpileProblem(g, ((make_flower_mask(g), 4.0),))
    yield "snowflake", SandpileProblem(g, ((make_fractal_mask(g), 4.0),))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    args = ap.parse_args()
    print(f"{'shape':12s} {'mass':>8s} {'|supp u|':>9s} {'jaccard':>8s} {'DR s':>7s} {'topple s':>9s}")
    for name, p in problems(args.n):
        res = sandpile_solve(p, tol=1e-9)
        top = sandpile_topple(p)
        print(f"{name:12s} {p.mass:8.4f} {res.support.measure:9.4f} "
              f"{jaccard(res.occupied.mask, top.occupied.mask):8.4f} "
              f"{res.seconds:7.1f} {top.seconds:9.1f}")


if __name__ == "__main__":
    main()
