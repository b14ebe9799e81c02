"""Proximal machinery for the L1 term and the linear operators it is paired with."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.sparse as sp

from .grid import Field, Grid

__all__ = [
    "shrink",
    "subgradient_select",
    "laplacian_apply",
    "laplacian_symbol",
    "Resolvent",
    "resolvent_inverse",
    "Graph",
    "graph_laplacian_apply",
    "read_graph",
    "write_graph",
]


def _shrink(v: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return v.copy()
    return np.copysign(np.maximum(np.abs(v) - sigma, 0.0), v)


def shrink(v, sigma: float):
    """Soft threshold ``sign(v) * max(|v| - sigma, 0)``.

    Entries with ``|v| <= sigma`` become exactly zero. Works on a :class:`Field`
    (returning a Field) or on a plain array.
    """
    if sigma < 0:
        raise ValueError("shrink threshold must be nonnegative")
    if isinstance(v, Field):
        return v.with_values(_shrink(v.values, sigma))
    out = _shrink(np.asarray(v, dtype=float), sigma)
    return out if out.ndim else float(out)


def subgradient_select(u, f, gamma: float):
    """The element of ``d|u|`` picked out by the forcing.

    ``sign(u)`` off zero; at ``u == 0`` the minimiser of ``|f - gamma*q|`` over
    ``|q| <= 1``, which is ``clip(f/gamma, -1, 1)``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    p = np.where(u != 0, np.sign(u), np.clip(f / gamma, -1.0, 1.0))
    return p if p.ndim else float(p)


def _laplacian(v: np.ndarray, h: float) -> np.ndarray:
    out = -2.0 * v.ndim * v
    for ax in range(v.ndim):
        out += np.roll(v, 1, axis=ax)
        out += np.roll(v, -1, axis=ax)
    out /= h * h
    return out


def laplacian_apply(u: Field) -> Field:
    """Second-difference (1D) or five-point (2D) Laplacian with periodic wrap."""
    return u.with_values(_laplacian(u.values, u.grid.h))


def laplacian_symbol(grid: Grid, real: bool = True) -> np.ndarray:
    """Eigenvalues of the negated discrete Laplacian, per Fourier mode.

    With ``real=True`` the layout matches ``scipy.fft.rfftn`` output.
    """
    n, h = grid.n, grid.h
    k_full = np.arange(n)
    lam_full = (2.0 / h**2) * (1.0 - np.cos(2.0 * np.pi * k_full / n))
    if grid.dim == 1:
        return lam_full[: n // 2 + 1] if real else lam_full
    lam_last = lam_full[: n // 2 + 1] if real else lam_full
    return lam_full[:, None] + lam_last[None, :]


class Resolvent:
    """``(I - tau*Lap_h)^{-1}`` diagonalised by the real FFT.

    Build once per run and call repeatedly; each instance owns its symbol.
    """

    def __init__(self, grid: Grid, tau: float, workers: int | None = None):
        if tau <= 0:
            raise ValueError("resolvent step must be positive")
        self.grid = grid
        self.tau = tau
        self.workers = workers
        self._den = 1.0 + tau * laplacian_symbol(grid, real=True)

    def apply(self, z: np.ndarray) -> np.ndarray:
        zh = scipy.fft.rfftn(z, workers=self.workers)
        zh /= self._den
        return scipy.fft.irfftn(zh, s=z.shape, workers=self.workers)

    def __call__(self, z: Field) -> Field:
        return z.with_values(self.apply(z.values))


def resolvent_inverse(z: Field, tau: float) -> Field:
    return Resolvent(z.grid, tau)(z)


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted undirected graph with no isolated nodes."""

    adjacency: sp.csr_matrix

    def __post_init__(self):
        a = sp.csr_matrix(self.adjacency, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if a.nnz and a.data.min() < 0:
            raise ValueError("edge weights must be nonnegative")
        if a.diagonal().any():
            raise ValueError("adjacency must have zero diagonal")
        if abs(a - a.T).max() > 0:
            raise ValueError("adjacency must be symmetric")
        deg = np.asarray(a.sum(axis=1)).ravel()
        if (deg <= 0).any():
            raise ValueError(f"graph has {(deg <= 0).sum()} isolated node(s)")
        object.__setattr__(self, "adjacency", a)

    @classmethod
    def from_edges(cls, n_nodes: int, i, j, w) -> "Graph":
        i, j, w = (np.asarray(a) for a in (i, j, w))
        if (i >= j).any():
            raise ValueError("edges must be listed once with i < j")
        if (w <= 0).any():
            raise ValueError("edge weights must be positive")
        a = sp.coo_matrix((w, (i, j)), shape=(n_nodes, n_nodes))
        return cls((a + a.T).tocsr())

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @cached_property
    def normalized_adjacency(self) -> sp.csr_matrix:
        s = sp.diags(1.0 / np.sqrt(self.degree))
        return (s @ self.adjacency @ s).tocsr()

    def edges(self):
        upper = sp.triu(self.adjacency, k=1).tocoo()
        return upper.row, upper.col, upper.data


def graph_laplacian_apply(g: Graph, u) -> np.ndarray:
    """``(I - D^{-1/2} A D^{-1/2}) u``; diffusion is ``u_t = -L u``."""
    u = np.asarray(u, dtype=float)
    return u - g.normalized_adjacency @ u


def read_graph(path, n_nodes: int | None = None) -> Graph:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            a, b, w = line.split()
            rows.append((int(a), int(b), float(w)))
    if not rows:
        raise ValueError(f"{path}: no edges")
    i, j, w = map(np.array, zip(*rows))
    if n_nodes is None:
        n_nodes = int(max(i.max(), j.max())) + 1
    return Graph.from_edges(n_nodes, i, j, w)


def write_graph(g: Graph, path) -> None:
    i, j, w = g.edges()
    lines = [f"# nodes: {g.n_nodes}"]
    lines += [f"{a} {b} {x:.17g}" for a, b, x in zip(i, j, w)]
    Path(path).write_text("\n".join(lines) + "\n")
