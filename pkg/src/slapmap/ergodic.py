"""Ulam discretisation and ergodic decomposition of piecewise affine maps.

The domain is cut into cells whose boundaries contain every branch endpoint
(so each cell sits inside one branch), a uniform grid, and the first
``orbit_depth`` forward images of the one-sided branch endpoints.  The last
group matters: supports of the invariant densities are bounded by such
images, and aligning cells with them keeps roundoff from leaking mass
between components.

Transition weights are exact: the image of a cell is an interval and the
weight to cell j is the fraction of that interval lying in cell j.
Terminal strongly connected classes of the resulting digraph stand in for
the ergodic components, their cyclic period for the mixing period.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import NoConvergence, NotExpanding
from .pwamap import LEFT, RIGHT, TOL, PiecewiseAffineMap, flip

EDGE_THRESHOLD = 1e-14
ORBIT_DEPTH = 64


@dataclass(frozen=True, eq=False)
class UlamModel:
    edges: np.ndarray
    matrix: sp.csr_matrix
    grid: int
    map_digest: str

    @property
    def n_cells(self) -> int:
        return len(self.edges) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


def breakpoint_orbits(f: PiecewiseAffineMap, depth: int, merge_tol: float) -> list[float]:
    """Forward images (up to ``depth`` steps) of every one-sided branch endpoint.

    An orbit is cut short once it comes within ``merge_tol`` of a branch
    endpoint or of a point already collected; from there on its future is
    covered by that point's own orbit.
    """
    ends = f.endpoints
    seen: list[float] = []

    def near(pts, y):
        i = bisect.bisect_left(pts, y)
        return any(abs(pts[j] - y) <= merge_tol for j in (i - 1, i) if 0 <= j < len(pts))

    starts = [(e, s) for e in ends for s in (LEFT, RIGHT)]
    starts = [(e, s) for e, s in starts if not (e == f.domain_lo and s == LEFT) and not (e == f.domain_hi and s == RIGHT)]
    for x, side in starts:
        for _ in range(depth):
            b = f.branches[f.branch_index(x, side)]
            y = min(max(b(x), f.domain_lo), f.domain_hi)
            if b.slope < 0:
                side = flip(side)
            if near(ends, y) or near(seen, y):
                break
            bisect.insort(seen, y)
            x = y
    return seen


def bin_edges(f: PiecewiseAffineMap, n: int, orbit_depth: int = ORBIT_DEPTH) -> np.ndarray:
    lo, hi = f.domain_lo, f.domain_hi
    merge_tol = TOL * f.length
    fixed = sorted(set(f.endpoints) | set(breakpoint_orbits(f, orbit_depth, merge_tol)))
    fixed_arr = np.array(fixed)
    grid = np.linspace(lo, hi, n + 1)[1:-1]
    pos = np.searchsorted(fixed_arr, grid)
    left = np.abs(grid - fixed_arr[np.clip(pos - 1, 0, len(fixed_arr) - 1)])
    right = np.abs(fixed_arr[np.clip(pos, 0, len(fixed_arr) - 1)] - grid)
    grid = grid[np.minimum(left, right) > merge_tol]
    return np.union1d(fixed_arr, grid)


def build_ulam(f: PiecewiseAffineMap, n: int, orbit_depth: int = ORBIT_DEPTH) -> UlamModel:
    """Exact Ulam matrix of ``f`` on a grid of ``n`` uniform cells plus refinements."""
    if n < 10:
        raise ValueError("n must be >= 10")
    if not f.is_expanding:
        raise NotExpanding(f"min |slope| = {f.min_expansion} <= 1")
    edges = bin_edges(f, n, orbit_depth)
    N = len(edges) - 1
    snap = TOL * f.length

    los = np.array([b.lo for b in f.branches])
    slopes = np.array([b.slope for b in f.branches])
    icpts = np.array([b.intercept for b in f.branches])
    cell_lo, cell_hi = edges[:-1], edges[1:]
    bidx = np.clip(np.searchsorted(los, cell_lo, side="right") - 1, 0, len(los) - 1)
    y0 = slopes[bidx] * cell_lo + icpts[bidx]
    y1 = slopes[bidx] * cell_hi + icpts[bidx]
    a = np.clip(np.minimum(y0, y1), f.domain_lo, f.domain_hi)
    b = np.clip(np.maximum(y0, y1), f.domain_lo, f.domain_hi)

    j0 = np.clip(np.searchsorted(edges, a, side="right") - 1, 0, N - 1)
    j1 = np.clip(np.searchsorted(edges, b, side="left") - 1, 0, N - 1)
    j1 = np.maximum(j1, j0)
    counts = j1 - j0 + 1
    rows = np.repeat(np.arange(N), counts)
    offsets = np.cumsum(counts) - counts
    cols = j0[rows] + (np.arange(rows.size) - offsets[rows])
    overlap = np.minimum(b[rows], edges[cols + 1]) - np.maximum(a[rows], edges[cols])

    # roundoff slivers at either end of an image interval
    at_end = (cols == j0[rows]) | (cols == j1[rows])
    keep = overlap > 0
    keep &= ~(at_end & (overlap < snap) & (counts[rows] > 1))
    rows, cols, overlap = rows[keep], cols[keep], overlap[keep]

    total = np.bincount(rows, weights=overlap, minlength=N)
    w = overlap / total[rows]
    keep = w >= EDGE_THRESHOLD
    rows, cols, w = rows[keep], cols[keep], w[keep]
    total = np.bincount(rows, weights=w, minlength=N)
    w = w / total[rows]
    M = sp.csr_matrix((w, (rows, cols)), shape=(N, N))
    return UlamModel(edges, M, n, f.digest())


def terminal_classes(M: UlamModel | sp.spmatrix) -> list[np.ndarray]:
    """Strongly connected components without edges leaving them, ordered by first cell."""
    A = M.matrix if isinstance(M, UlamModel) else sp.csr_matrix(M)
    ncomp, labels = connected_components(A, directed=True, connection="strong")
    coo = A.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_labels = np.unique(labels[coo.row[leaving]])
    terminal = np.setdiff1d(np.arange(ncomp), open_labels)
    classes = [np.flatnonzero(labels == t) for t in terminal]
    classes.sort(key=lambda c: c[0])
    return classes


def _restricted(A: sp.csr_matrix, cells: np.ndarray) -> sp.csr_matrix:
    return A[cells][:, cells].tocsr()


def class_period(M: UlamModel | sp.spmatrix, cells: np.ndarray) -> tuple[int, list[np.ndarray]]:
    """Period of a terminal class and its cyclic parts, in the order the map visits them.

    BFS levels from the first cell; the period is the gcd of
    level(u) + 1 - level(v) over all edges u -> v of the class.
    """
    A = M.matrix if isinstance(M, UlamModel) else sp.csr_matrix(M)
    sub = _restricted(A, cells)
    level = shortest_path(sub, unweighted=True, indices=0, directed=True)
    level = level.astype(np.int64)
    coo = sub.tocoo()
    diffs = np.abs(level[coo.row] + 1 - level[coo.col])
    period = int(np.gcd.reduce(diffs)) if diffs.size else 1
    period = max(period, 1)
    parts = [cells[level % period == r] for r in range(period)]
    return period, parts


def stationary_density(
    M: UlamModel | sp.spmatrix,
    cells: np.ndarray,
    period: int | None = None,
    tol: float = 1e-12,
    max_iter: int = 10**6,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Invariant probability of a terminal class, one mass per class cell.

    Power iteration on the averaged operator (P + P^2 + ... + P^k) / k,
    which removes the rotation between the k cyclic parts.  Stops when the
    total-variation change falls below ``tol``.
    """
    A = M.matrix if isinstance(M, UlamModel) else sp.csr_matrix(M)
    if period is None:
        period = class_period(A, cells)[0]
    PT = _restricted(A, cells).T.tocsr()
    if start is None:
        if isinstance(M, UlamModel):
            v = M.widths[cells].astype(float)
        else:
            v = np.ones(len(cells))
    else:
        v = np.asarray(start, dtype=float)
    v = v / v.sum()
    change = math.inf
    for _ in range(max_iter):
        u = PT @ v
        acc = u.copy()
        for _ in range(period - 1):
            u = PT @ u
            acc += u
        new = acc / acc.sum()
        change = 0.5 * np.abs(new - v).sum()
        v = new
        if change < tol:
            return v
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps", residual=change)


def _merge_cells(edges: np.ndarray, cells: np.ndarray) -> list[tuple[float, float]]:
    out = []
    start = prev = None
    for c in cells:
        if prev is not None and c == prev + 1:
            prev = c
            continue
        if start is not None:
            out.append((float(edges[start]), float(edges[prev + 1])))
        start = prev = c
    if start is not None:
        out.append((float(edges[start]), float(edges[prev + 1])))
    return out


@dataclass
class ErgodicComponent:
    cells: np.ndarray
    support: list[tuple[float, float]]
    period: int
    cyclic_parts: list[np.ndarray]
    density: np.ndarray  # probability mass per cell of ``cells``
    edges: np.ndarray = field(repr=False)

    @property
    def support_measure(self) -> float:
        return sum(hi - lo for lo, hi in self.support)

    def density_values(self) -> np.ndarray:
        """Density (mass / cell width) on each cell of the component."""
        return self.density / (self.edges[self.cells + 1] - self.edges[self.cells])

    def density_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "density"])
        for c, rho in zip(self.cells, self.density_values()):
            w.writerow([repr(float(self.edges[c])), repr(float(self.edges[c + 1])), repr(float(rho))])
        return buf.getvalue()

    def masses_on(self, edges: np.ndarray) -> np.ndarray:
        """Mass of every cell of another partition (both partitions span the same domain)."""
        full = np.zeros(len(self.edges) - 1)
        full[self.cells] = self.density
        cdf = np.concatenate([[0.0], np.cumsum(full)])
        return np.diff(np.interp(edges, self.edges, cdf))


def total_variation(c1: ErgodicComponent, c2: ErgodicComponent) -> float:
    edges = np.union1d(c1.edges, c2.edges)
    return 0.5 * float(np.abs(c1.masses_on(edges) - c2.masses_on(edges)).sum())


@dataclass
class Refinement:
    bins: int
    count: int
    periods: list[int]
    density_tv: list[float]
    tv_bound: float
    stable: bool
    density_ok: bool

    def to_dict(self) -> dict:
        return {
            "bins": self.bins,
            "count": self.count,
            "periods": self.periods,
            "density_tv": self.density_tv,
            "tv_bound": self.tv_bound,
            "stable": self.stable,
            "density_ok": self.density_ok,
        }


@dataclass
class ErgodicReport:
    components: list[ErgodicComponent]
    bin_count: int
    grid: int
    map_digest: str
    domain: tuple[float, float]
    max_row_error: float
    refinement: Refinement | None = None

    @property
    def count(self) -> int:
        return len(self.components)

    @property
    def periods(self) -> list[int]:
        return [c.period for c in self.components]

    @property
    def unresolved(self) -> bool:
        return self.refinement is not None and not (self.refinement.stable and self.refinement.density_ok)

    def to_dict(self, density_paths: list[str] | None = None) -> dict:
        comps = []
        for k, c in enumerate(self.components):
            comps.append(
                {
                    "support": [[lo, hi] for lo, hi in c.support],
                    "support_measure": c.support_measure,
                    "cells": int(len(c.cells)),
                    "period": c.period,
                    "density_csv": density_paths[k] if density_paths else None,
                }
            )
        return {
            "bin_count": self.bin_count,
            "grid": self.grid,
            "map_digest": self.map_digest,
            "domain": list(self.domain),
            "max_row_error": self.max_row_error,
            "components": comps,
            "refinement": self.refinement.to_dict() if self.refinement else None,
            "unresolved": self.unresolved,
        }


# density refinement: TV(n, 2n) <= TV_CONSTANT * 5 / n
TV_CONSTANT = 10.0


def _components(model: UlamModel, tol: float, max_iter: int) -> list[ErgodicComponent]:
    comps = []
    for cells in terminal_classes(model):
        period, parts = class_period(model, cells)
        dens = stationary_density(model, cells, period, tol=tol, max_iter=max_iter)
        comps.append(ErgodicComponent(cells, _merge_cells(model.edges, cells), period, parts, dens, model.edges))
    return comps


def _match(a: list[ErgodicComponent], b: list[ErgodicComponent]) -> list[int | None]:
    """For each component of ``a`` the component of ``b`` sharing the most support."""
    out = []
    for ca in a:
        best, best_ov = None, 0.0
        for k, cb in enumerate(b):
            ov = sum(
                max(0.0, min(h1, h2) - max(l1, l2)) for l1, h1 in ca.support for l2, h2 in cb.support
            )
            if ov > best_ov:
                best, best_ov = k, ov
        out.append(best)
    return out


def analyze(
    f: PiecewiseAffineMap,
    n: int,
    refine: bool = True,
    orbit_depth: int = ORBIT_DEPTH,
    tol: float = 1e-12,
    max_iter: int = 10**6,
) -> ErgodicReport:
    """Ergodic decomposition of ``f`` at ``n`` grid cells, re-checked at ``2n``."""
    model = build_ulam(f, n, orbit_depth)
    comps = _components(model, tol, max_iter)
    row_err = float(np.abs(model.row_sums() - 1.0).max())
    report = ErgodicReport(comps, model.n_cells, n, model.map_digest, (f.domain_lo, f.domain_hi), row_err)
    if refine:
        fine = build_ulam(f, 2 * n, orbit_depth)
        fine_comps = _components(fine, tol, max_iter)
        match = _match(comps, fine_comps)
        tvs = [total_variation(c, fine_comps[k]) if k is not None else 1.0 for c, k in zip(comps, match)]
        bound = TV_CONSTANT * 5.0 / n
        stable = len(fine_comps) == len(comps) and all(
            k is not None and fine_comps[k].period == c.period for c, k in zip(comps, match)
        ) and len(set(match)) == len(match)
        report.refinement = Refinement(
            fine.n_cells,
            len(fine_comps),
            [c.period for c in fine_comps],
            tvs,
            bound,
            stable,
            all(t <= bound for t in tvs),
        )
        report.max_row_error = max(row_err, float(np.abs(fine.row_sums() - 1.0).max()))
    return report
