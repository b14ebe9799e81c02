"""Command-line experiment runner.

Every subcommand takes one INI config and writes into an output directory:
field snapshots as CSV, a trace CSV where applicable, ``report.json`` (numbers
only, byte-for-byte reproducible) and ``manifest.json`` (config echo, file
hashes, wall-clock timings).

Exit codes: 0 success, 2 invalid config, 3 solver failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    FreeBoundaryError,
    QuadratureError,
    exact_elliptic,
    free_boundary_a1,
    support_bound_elliptic,
    support_bound_parabolic,
)
from .applications import (
    GraphScenario,
    SandpileProblem,
    jaccard,
    knn_graph,
    make_flower_mask,
    make_fractal_mask,
    oscillon_data,
    run_graph_diffusion,
    run_signum_gordon,
    sandpile_solve,
    sandpile_topple,
    sg_self_convergence,
    two_squares,
)
from .applications.heat import evolve_heat
from .config import RunConfig, build_field, load_config, solver_config
from .diagnostics import convergence_rate, entropy_check
from .grid import Field, Grid, write_field_csv
from .schemes import ConfigError, SolverError, dr_solve_stationary
from .studies import (
    EllipticStudy,
    FreeBoundaryStudy,
    TravelingWaveStudy,
    elliptic_convergence,
    free_boundary_ladder,
    traveling_wave_convergence,
)

log = logging.getLogger("l1pde")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "L1PDE_OUT"


class Outputs:
    """Collects written files and phase timings for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []
        self.timings: dict[str, float] = {}
        root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def field(self, name: str, u: Field) -> None:
        write_field_csv(u, self.path(name))

    def json(self, name: str, obj) -> None:
        self.path(name).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")

    def table(self, name: str, header: list[str], rows) -> None:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in r) for r in rows]
        self.path(name).write_text("\n".join(lines) + "\n")

    def timed(self, phase: str):
        out = self

        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                out.timings[phase] = out.timings.get(phase, 0.0) + time.perf_counter() - self.t0

        return _T()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Outputs, rc: RunConfig, command: str, config_path: str) -> None:
    files = [
        {"path": name, "sha256": _sha256(out.root / name), "bytes": (out.root / name).stat().st_size}
        for name in out.files
    ]
    manifest = {
        "command": command,
        "config_path": str(config_path),
        "config": rc.sections,
        "seed": rc.seed,
        "version": __version__,
        "files": files,
        "timings": out.timings,
    }
    (out.root / "manifest.json").write_text(json.dumps(_clean(manifest), indent=2, sort_keys=True) + "\n")


def _warn_near_edge(u: Field, label: str) -> None:
    mask = u.values != 0
    if not mask.any():
        return
    g = u.grid
    margin = 5
    for ax in range(g.dim):
        idx = np.flatnonzero(mask.any(axis=tuple(a for a in range(g.dim) if a != ax)))
        if idx[0] < margin or idx[-1] > g.n - 1 - margin:
            log.warning("%s: support within 5h of the domain edge; periodic wrap may matter", label)
            return


# -- solve ------------------------------------------------------------------

def cmd_solve(rc: RunConfig, out: Outputs, threads: int) -> dict:
    grid = rc.grid.build()
    g = build_field(rc.initial, grid)
    f = build_field(rc.forcing, grid)
    cfg = solver_config(rc, grid)
    if rc.mode == "stationary":
        return _solve_stationary(rc, grid, f, g, cfg, out)
    with out.timed("evolve"):
        run = evolve_heat(f, g, cfg, sample_times=rc.output.times or (cfg.t_end,),
                          record_every=rc.output.record_every)
    for i, (t, u) in enumerate(sorted(run.snapshots.items())):
        out.field(f"snapshot_{i:03d}.csv", u)
        _warn_near_edge(u, f"t={t:g}")
    run.trace.to_csv(out.path("trace.csv"))
    rep = {
        "scheme": cfg.scheme, "tau": run.tau, "steps": run.steps, "gamma": cfg.gamma,
        "t_end": cfg.t_end, "snapshot_times": sorted(run.snapshots),
        "extinction_time": run.extinction_time,
        "space_time_support": run.space_time_support,
    }
    if cfg.gamma > 0:
        rep["support_bound_parabolic"] = support_bound_parabolic(g, f, cfg.gamma, T=cfg.t_end)
        if rc.output.record_every == 1:
            chk = entropy_check(run.trace, cfg.gamma)
            rep["entropy_check"] = {"passed": chk.passed, "worst_margin": chk.worst_margin}
    if len(run.trace):
        s = run.trace.column("support")
        rep["max_support"] = float(s.max())
        rep["time_of_max_support"] = float(run.trace.t[int(s.argmax())])
    return rep


def _solve_stationary(rc, grid, f, g, cfg, out) -> dict:
    if cfg.scheme != "DR":
        raise ConfigError("stationary solves use scheme = DR")
    with out.timed("stationary"):
        u, iters = dr_solve_stationary(f, cfg, g)
    out.field("solution.csv", u)
    _warn_near_edge(u, "stationary")
    supp = float(np.count_nonzero(u.values) * grid.cell_volume)
    rep = {"iterations": iters, "tau": cfg.tau, "gamma": cfg.gamma, "support_measure": supp}
    if cfg.gamma > 0:
        rep["support_bound_elliptic"] = support_bound_elliptic(f, cfg.gamma)
    if rc.forcing.kind == "algebraic" and grid.dim == 1 and 0 < cfg.gamma <= 1 \
            and rc.forcing.get("amplitude", 1.0) == 1.0 and rc.forcing.get("center", 0.0) == 0.0:
        rep["error_vs_exact_Linf"] = float(np.abs(u.values - exact_elliptic(grid.axis(), cfg.gamma)).max())
    return rep


# -- convergence --------------------------------------------------------------

def cmd_convergence(rc: RunConfig, out: Outputs, threads: int) -> dict:
    kind = rc.get("study", "kind", "traveling_wave")
    ladder = tuple(rc.get_ints("study", "ladder", [250, 500, 1000, 2000]))
    if len(ladder) < 4:
        raise ConfigError("a convergence ladder needs at least four resolutions")
    if kind == "traveling_wave":
        st = TravelingWaveStudy(
            gamma=rc.get("study", "gamma", 0.05, float), sigma=rc.get("study", "sigma", 2.0, float),
            x0=rc.get("study", "x0", 2.0, float), x_min=rc.get("study", "x_min", 0.0, float),
            x_max=rc.get("study", "x_max", 16.0, float), t_end=rc.get("study", "t_end", 1.0, float),
            tau_factor=rc.get("study", "tau_factor", 0.25, float),
            pin_boundary=rc.get_bool("study", "pin_boundary", True), ladder=ladder,
        )
        if st.tau_factor > 0.25:
            raise ConfigError("IMEX needs tau_factor <= 0.25 (tau <= h^2/4)")
        with out.timed("ladder"):
            res = traveling_wave_convergence(st, threads)
        out.table("convergence.csv", ["h", "E1", "E2", "Einf"],
                  zip(res["h"], res["E_L1"], res["E_L2"], res["E_Linf"]))
        return res
    if kind == "elliptic":
        st = EllipticStudy(
            gamma=rc.get("study", "gamma", 0.5, float), x_min=rc.get("study", "x_min", -8.0, float),
            x_max=rc.get("study", "x_max", 8.0, float),
            tau_factor=rc.get("study", "tau_factor", 1.0, float),
            tol=rc.get("study", "tol", 1e-10, float), ladder=ladder,
        )
        with out.timed("ladder"):
            res = elliptic_convergence(st, threads)
        out.table("convergence.csv", ["h", "Einf"], zip(res["h"], res["E_Linf"]))
        return res
    if kind == "signum_gordon":
        with out.timed("ladder"):
            res = sg_self_convergence(
                ns=ladder, n_ref=rc.get("study", "n_ref", 32768, int),
                t_end=rc.get("study", "t_end", 2.0, float),
                courant=rc.get("study", "courant", 0.5, float),
                half_width=rc.get("study", "half_width", 4.0, float),
                amplitude=rc.get("study", "amplitude", 1.0, float),
                radius=rc.get("study", "radius", 1.0, float),
            )
        res["slope_L2"] = convergence_rate(res["h"], res["errors"])["slope"]
        out.table("convergence.csv", ["h", "E2"], zip(res["h"], res["errors"]))
        return res
    if kind == "synthetic":
        # errors C*h^p; checks the fitting path end to end
        length = rc.get("study", "x_max", 1.0, float) - rc.get("study", "x_min", 0.0, float)
        c, p = rc.get("study", "constant", 1.0, float), rc.get("study", "order", 2.0, float)
        h = length / np.asarray(ladder, dtype=float)
        err = c * h**p
        fit = convergence_rate(h, err)
        out.table("convergence.csv", ["h", "E"], zip(h, err))
        return {"n": list(ladder), "h": h, "errors": err, "slope": fit["slope"],
                "log_c": fit["log_c"], "residual": fit.residual}
    raise ConfigError(f"unknown convergence study {kind!r}")


# -- sandpile -----------------------------------------------------------------

def _sandpile_problem(rc: RunConfig) -> SandpileProblem:
    shape = rc.get("sandpile", "shape", "two_squares")
    n = rc.get("sandpile", "n", 500, int)
    if shape == "two_squares":
        return two_squares(n, rc.get("sandpile", "side", 0.3, float),
                           alphas=tuple(rc.get_floats("sandpile", "alphas", [1.0, 1.0])))
    grid = Grid(2, n, rc.get("sandpile", "x_min", -1.0, float), rc.get("sandpile", "x_max", 1.0, float))
    alpha = rc.get("sandpile", "alpha", 4.0, float)
    if shape == "flower":
        mask = make_flower_mask(grid, rc.get("sandpile", "r0", 0.25, float),
                                rc.get("sandpile", "eps", 0.6, float), rc.get("sandpile", "k", 6, int))
    elif shape == "fractal":
        mask = make_fractal_mask(grid, rc.get("sandpile", "radius", 0.3, float),
                                 rc.get("sandpile", "depth", 3, int))
    else:
        raise ConfigError(f"unknown sandpile shape {shape!r}")
    return SandpileProblem(grid, ((mask, alpha),))


def cmd_sandpile(rc: RunConfig, out: Outputs, threads: int) -> dict:
    p = _sandpile_problem(rc)
    with out.timed("douglas_rachford"):
        res = sandpile_solve(p, rc.get("sandpile", "tau_factor", 0.025, float),
                             rc.get("sandpile", "tol", 1e-10, float))
    out.field("solution.csv", res.u)
    out.field("support.csv", Field(p.grid, res.occupied.mask.astype(float)))
    _warn_near_edge(res.u, "sandpile")
    rep = {
        "iterations": res.iterations,
        "mass": p.mass,
        "support_measure": res.support.measure,
        "occupied_measure": res.occupied.measure,
        "mass_identity_rel_error": abs(res.support.measure - p.mass) / p.mass if p.mass else 0.0,
        "min_u": float(res.u.values.min()),
    }
    if rc.get_bool("sandpile", "topple", True):
        with out.timed("toppling"):
            top = sandpile_topple(p)
        rep["toppling_sweeps"] = top.sweeps
        rep["jaccard"] = jaccard(res.occupied.mask, top.occupied.mask)
        rep["odometer_max_diff"] = float(np.abs(top.odometer * p.grid.h**2 / 4 - res.u.values).max())
        log.info("douglas-rachford %.2fs, toppling %.2fs (ratio %.2f)", res.seconds, top.seconds,
                 top.seconds / res.seconds)
    return rep


# -- graph ----------------------------------------------------------------------

def cmd_graph(rc: RunConfig, out: Outputs, threads: int) -> dict:
    with out.timed("graph"):
        G, z = knn_graph(rc.get("graph", "n_nodes", 2000, int), rc.get("graph", "ambient_dim", 100, int),
                         rc.get("graph", "k", 8, int), rc.seed, rc.get("graph", "noise", 0.05, float))
    src_raw = rc.get("graph", "source", "auto")
    source = int(np.argmin(z[:, 0])) if src_raw == "auto" else int(src_raw)
    sc = GraphScenario(G, source, rc.get("graph", "gamma", cast=float),
                       rc.get("graph", "tau", 0.05, float), rc.get("graph", "t_end", 100.0, float))
    times = rc.get_floats("graph", "times", [])
    with out.timed("diffusion"):
        run = run_graph_diffusion(sc, sample_times=times)
    run.trace.to_csv(out.path("trace.csv"))
    if run.snapshots:
        ts = sorted(run.snapshots)
        out.table("nodes.csv", ["node", *(repr(t) for t in ts)],
                  ([i, *(run.snapshots[t][i] for t in ts)] for i in range(G.n_nodes)))
    l1 = 1.0
    bound = math.inf if sc.gamma == 0 else l1 / sc.gamma
    return {
        "n_nodes": G.n_nodes, "n_components": run.n_components, "source": source,
        "gamma": sc.gamma, "tau": sc.tau, "max_support": run.max_support,
        "support_bound": bound, "extinction_time": run.extinction_time,
        "saturation_time": run.saturation_time,
    }


# -- free boundary ------------------------------------------------------------------

def cmd_freeboundary(rc: RunConfig, out: Outputs, threads: int) -> dict:
    s = "freeboundary"
    st = FreeBoundaryStudy(
        amplitude=rc.get(s, "amplitude", 2.0, float), rate=rc.get(s, "rate", 5.0, float),
        gamma=rc.get(s, "gamma", 1.0, float), x_min=rc.get(s, "x_min", -8.0, float),
        x_max=rc.get(s, "x_max", 8.0, float), t_end=rc.get(s, "t_end", 0.02, float),
        tau_factor=rc.get(s, "tau_factor", 0.25, float), samples=rc.get(s, "samples", 200, int),
        window=tuple(rc.get_floats(s, "window", [0.1, 0.9])),
        ladder=tuple(rc.get_ints(s, "ladder", [256, 512, 1024, 2048, 4096, 8192, 16384])),
        free_exponent_n=tuple(rc.get_ints(s, "free_exponent_n", [4096])),
    )
    if st.tau_factor > 0.25:
        raise ConfigError("IMEX needs tau_factor <= 0.25 (tau <= h^2/4)")
    with out.timed("quadrature"):
        pred = free_boundary_a1()
    with out.timed("ladder"):
        fits = free_boundary_ladder(st, threads)
    out.table("a1_table.csv", ["n", "a0", "a1", "beta"],
              ([ft.n, ft.a0, ft.a1, "" if ft.beta is None else ft.beta] for ft in fits))
    finest = fits[-1]
    out.table("edges_finest.csv", ["time", "a"], zip(finest.times, finest.edges))
    return {
        "ladder": [{"n": ft.n, "a0": ft.a0, "a1": ft.a1, "beta": ft.beta} for ft in fits],
        "a1_quadrature": pred.a1,
        "quadrature": pred.report,
        "finest_minus_quadrature": finest.a1 - pred.a1,
    }


# -- signum-Gordon ------------------------------------------------------------------

def cmd_signum_gordon(rc: RunConfig, out: Outputs, threads: int) -> dict:
    s = "signum_gordon"
    hw = rc.get(s, "half_width", 4.0, float)
    grid = Grid(rc.get(s, "dim", 1, int), rc.get(s, "n", 1024, int), -hw, hw)
    g1, g2 = oscillon_data(grid, rc.get(s, "amplitude", 1.0, float), rc.get(s, "radius", 1.0, float))
    tau = rc.get(s, "courant", 0.5, float) * grid.h
    t_end = rc.get(s, "t_end", 2.0, float)
    with out.timed("leapfrog"):
        run = run_signum_gordon(g1, g2, tau, t_end, sample_times=rc.get_floats(s, "times", [t_end]))
    for i, (t, u) in enumerate(sorted(run.snapshots.items())):
        out.field(f"snapshot_{i:03d}.csv", u)
    times = run.tau * np.arange(run.support.size)
    out.table("support.csv", ["time", "support"], zip(times, run.support))
    return {"tau": run.tau, "steps": run.steps, "max_support": float(run.support.max()),
            "final_support": float(run.support[-1]), "snapshot_times": sorted(run.snapshots)}


COMMANDS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "sandpile": cmd_sandpile,
    "graph": cmd_graph,
    "freeboundary": cmd_freeboundary,
    "signum-gordon": cmd_signum_gordon,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="l1pde", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out/<command>)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for ladders")
        sp.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    out_dir = Path(args.out or os.environ.get(OUT_ENV) or Path("out") / args.command)
    try:
        rc = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = Outputs(out_dir)
        report = COMMANDS[args.command](rc, out, args.threads)
        out.json("report.json", report)
        write_manifest(out, rc, args.command, args.config)
    except (ConfigError, ValueError) as e:
        log.error("configuration error: %s", e)
        return EXIT_CONFIG
    except (SolverError, FreeBoundaryError, QuadratureError) as e:
        log.error("solver failure: %s", e)
        return EXIT_SOLVER
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_IO
    log.info("wrote %s", out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
