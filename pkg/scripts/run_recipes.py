"""Run shipped recipes through the command-line runner.

Usage: python scripts/run_recipes.py [--out DIR] [--threads N] [name ...]

Without names every recipe runs. Each lands in ``DIR/<recipe>``.
"""

import argparse
import sys
import time

from l1pde.cli import main as cli_main
from l1pde.config import list_recipes, load_config

# recipe -> subcommand, decided by which section the config carries
SECTION_COMMAND = [
    ("study", "convergence"),
    ("sandpile", "sandpile"),
    ("graph", "graph"),
    ("freeboundary", "freeboundary"),
    ("signum_gordon", "signum-gordon"),
]


def command_for(name: str) -> str:
    sections = load_config(f"recipe:{name}").sections
    for section, cmd in SECTION_COMMAND:
        if section in sections:
            return cmd
    return "solve"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*")
    ap.add_argument("--out", default="out/recipes")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    names = args.names or list_recipes()
    worst = 0
    for name in names:
        cmd = command_for(name)
        t0 = time.perf_counter()
        rc = cli_main([cmd, "--config", f"recipe:{name}", "--out", f"{args.out}/{name}",
                       "--threads", str(args.threads), "--quiet"])
        print(f"{name:24s} {cmd:14s} exit {rc}  {time.perf_counter() - t0:7.1f}s")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
