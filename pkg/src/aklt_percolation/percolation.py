"""Spanning detection, site/bond deletion sweeps, threshold extraction.

Spanning means a connected component of the reduced domain graph touches
both the left and the right boundary column of the open-x cylinder.  The
deletion study removes vertices (site mode) or edges (bond mode) of the
domain graph independently with probability p_delete, reusing every sampled
graph for several trials, and locates the p where the spanning probability
crosses one half.  The corresponding retention threshold is
p_th = 1 - p_delete*.

Each (grid point, sample) pair draws its randomness from a seed mixed out
of the master seed, the grid point and the sample index, so results are
identical whether or not the grid was refined and in whatever order points
are evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numba import njit

from .domains import (DomainGraph, Estimate, build_domain_graph,
                      domain_stats_observer, identify_domains)
from .lattices import BC_CYLINDER, Lattice
from .sampler import ChainParams, PovmConfig, mix_seed, run_chains


class CompactGraph(NamedTuple):
    """Minimal structure a deletion trial needs."""

    n_vertices: int
    edges: np.ndarray      # (M, 2) int32
    left: np.ndarray       # int32 vertex ids touching the left column
    right: np.ndarray


def boundary_domains(graph: DomainGraph, lattice: Lattice):
    if len(lattice.left_sites) == 0 or len(lattice.right_sites) == 0:
        raise ValueError("lattice has no boundary column metadata")
    left = np.unique(graph.site_domain[lattice.left_sites]).astype(np.int32)
    right = np.unique(graph.site_domain[lattice.right_sites]).astype(np.int32)
    return left, right


def compact_graph(graph: DomainGraph, lattice: Lattice) -> CompactGraph:
    left, right = boundary_domains(graph, lattice)
    return CompactGraph(graph.n_vertices, np.ascontiguousarray(graph.edges),
                        left, right)


def identity_compact_graph(lattice: Lattice) -> CompactGraph:
    """The bare lattice viewed as a domain graph with singleton domains."""
    return CompactGraph(lattice.n_sites, np.ascontiguousarray(lattice.edges),
                        lattice.left_sites, lattice.right_sites)


@njit(cache=True, nogil=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True, nogil=True)
def _span_trials(n, eu, ev, left, right, u_edge, u_vert, p, site_mode,
                 parent, flag):
    """Number of trials (rows of the uniform matrices) with a left-right
    spanning cluster after deletion with probability p."""
    n_span = 0
    for t in range(u_edge.shape[0]):
        for i in range(n):
            parent[i] = i
            flag[i] = 0
        for k in range(eu.size):
            if u_edge[t, k] < p:
                continue
            u, v = eu[k], ev[k]
            if site_mode and (u_vert[t, u] < p or u_vert[t, v] < p):
                continue
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru != rv:
                parent[rv] = ru
        hit = False
        for i in range(left.size):
            s = left[i]
            if site_mode and u_vert[t, s] < p:
                continue
            flag[_find(parent, s)] = 1
        for i in range(right.size):
            s = right[i]
            if site_mode and u_vert[t, s] < p:
                continue
            if flag[_find(parent, s)] == 1:
                hit = True
                break
        if hit:
            n_span += 1
    return n_span


def spans(graph: DomainGraph, lattice: Lattice) -> bool:
    """True iff one component of the domain graph touches both boundary
    columns of the lattice."""
    cg = compact_graph(graph, lattice)
    return _spans_compact(cg)


def _spans_compact(cg: CompactGraph) -> bool:
    n = cg.n_vertices
    parent = np.arange(n, dtype=np.int64)
    flag = np.zeros(n, dtype=np.int8)
    eu = cg.edges[:, 0].astype(np.int64)
    ev = cg.edges[:, 1].astype(np.int64)
    u_edge = np.ones((1, max(1, eu.size)))
    u_vert = np.ones((1, n))
    return bool(_span_trials(n, eu, ev, cg.left.astype(np.int64),
                             cg.right.astype(np.int64), u_edge[:, :eu.size],
                             u_vert, 0.0, False, parent, flag))


@dataclass(frozen=True)
class PercolationCurve:
    kind: str
    L: int
    mode: str                    # "site" | "bond"
    p_delete: np.ndarray
    p_span: np.ndarray
    p_span_err: np.ndarray
    n_samples: int
    trials_per_sample: int

    def as_rows(self):
        for p, ps, err in zip(self.p_delete, self.p_span, self.p_span_err):
            yield {"lattice": self.kind, "L": self.L, "mode": self.mode,
                   "p_delete": float(p), "p_span": float(ps),
                   "stderr": float(err), "n_samples": self.n_samples,
                   "n_trials": self.trials_per_sample}


def _point(graphs, mode, p, trials_per_sample, seed):
    """Spanning probability at one deletion probability, with the standard
    error taken across per-sample trial means (accounts for graph reuse)."""
    site_mode = mode == "site"
    p_key = int(round(p * 10 ** 6))
    means = np.empty(len(graphs))
    for s, cg in enumerate(graphs):
        rng = np.random.default_rng(np.random.PCG64(mix_seed(seed, p_key, s)))
        n, edges = cg.n_vertices, cg.edges
        u_edge = rng.random((trials_per_sample, max(1, len(edges)))) \
            if not site_mode else np.ones((trials_per_sample, max(1, len(edges))))
        u_vert = rng.random((trials_per_sample, n)) if site_mode \
            else np.ones((trials_per_sample, 1))
        parent = np.empty(n, dtype=np.int64)
        flag = np.empty(n, dtype=np.int8)
        cnt = _span_trials(n, edges[:, 0].astype(np.int64),
                           edges[:, 1].astype(np.int64),
                           cg.left.astype(np.int64), cg.right.astype(np.int64),
                           u_edge[:, :len(edges)], u_vert, p, site_mode,
                           parent, flag)
        means[s] = cnt / trials_per_sample
    m = float(means.mean())
    if len(means) > 1:
        err = float(means.std(ddof=1) / np.sqrt(len(means)))
    else:
        # single reused graph: plain binomial error over its trials
        err = float(np.sqrt(max(m * (1 - m), 1e-12) / trials_per_sample))
    return m, err


def deletion_sweep(graphs: Sequence[CompactGraph], mode: str,
                   p_grid: Iterable[float], trials_per_sample: int, seed: int,
                   *, kind: str = "", L: int = 0,
                   refine_step: float | None = 0.005,
                   refine_target: float = 0.5) -> PercolationCurve:
    """Evaluate p_span over the grid; optionally refine around the 0.5
    crossing with the given step."""
    if mode not in ("site", "bond"):
        raise ValueError("mode must be 'site' or 'bond'")
    graphs = list(graphs)
    if not graphs:
        raise ValueError("empty graph sample stream")
    grid = sorted({round(float(p), 6) for p in p_grid})
    if not grid or grid[0] < 0 or grid[-1] > 1:
        raise ValueError("p_delete grid must lie within [0, 1]")
    values = {p: _point(graphs, mode, p, trials_per_sample, seed) for p in grid}
    if refine_step:
        bracket = _crossing_bracket(grid, values, refine_target)
        if bracket is not None:
            lo, hi = bracket
            extra = np.round(np.arange(lo, hi, refine_step), 6)
            for p in extra:
                p = float(p)
                if p not in values:
                    values[p] = _point(graphs, mode, p, trials_per_sample, seed)
    ps = np.array(sorted(values))
    return PercolationCurve(
        kind=kind, L=L, mode=mode, p_delete=ps,
        p_span=np.array([values[p][0] for p in ps]),
        p_span_err=np.array([values[p][1] for p in ps]),
        n_samples=len(graphs), trials_per_sample=trials_per_sample)


def _crossing_bracket(grid, values, target):
    for a, b in zip(grid, grid[1:]):
        if values[a][0] >= target > values[b][0]:
            return a, b
    return None


class ThresholdOutOfRange(RuntimeError):
    def __init__(self, curve: PercolationCurve):
        lo, hi = curve.p_span[0], curve.p_span[-1]
        super().__init__(
            f"p_span never crosses 0.5 on the grid "
            f"[{curve.p_delete[0]}, {curve.p_delete[-1]}] "
            f"(p_span from {lo:.3f} to {hi:.3f})")
        self.curve = curve


def crossing_point(curve: PercolationCurve, target: float = 0.5) -> Estimate:
    """Linear interpolation of the p_span = target crossing."""
    ps, ys, errs = curve.p_delete, curve.p_span, curve.p_span_err
    for i in range(len(ps) - 1):
        if ys[i] >= target > ys[i + 1]:
            slope = (ys[i + 1] - ys[i]) / (ps[i + 1] - ps[i])
            p_star = ps[i] + (target - ys[i]) / slope
            err_y = float(np.hypot(errs[i], errs[i + 1])) / np.sqrt(2)
            err = abs(err_y / slope) if slope != 0 else float(ps[i + 1] - ps[i])
            return Estimate(float(p_star), float(err))
    raise ThresholdOutOfRange(curve)


@dataclass(frozen=True)
class ThresholdEstimate:
    p_delete_star: Estimate
    p_threshold: Estimate        # 1 - p_delete_star
    mode: str
    per_L: dict = field(default_factory=dict)


def estimate_threshold(curves_by_L: dict[int, PercolationCurve]) -> ThresholdEstimate:
    """Final threshold = crossing at the largest size; error is the larger
    of its interpolation error and the spread across the two largest sizes."""
    if not curves_by_L:
        raise ValueError("no curves")
    Ls = sorted(curves_by_L)
    per_L = {L: crossing_point(curves_by_L[L]) for L in Ls}
    best = per_L[Ls[-1]]
    err = best.error
    if len(Ls) >= 2:
        err = max(err, abs(best.value - per_L[Ls[-2]].value))
    mode = curves_by_L[Ls[-1]].mode
    star = Estimate(best.value, err)
    return ThresholdEstimate(p_delete_star=star,
                             p_threshold=Estimate(1.0 - star.value, star.error),
                             mode=mode, per_L=per_L)


def intersection_threshold(curve_small: PercolationCurve,
                           curve_large: PercolationCurve) -> Estimate:
    """Deletion probability where the spanning curves of two sizes cross.

    The 0.5-crossing of a single size carries an offset whenever the
    spanning probability at criticality is not one half (it depends on the
    sample aspect ratio); the point where two sizes give equal spanning
    probability converges much faster, so calibration runs use this."""
    common = sorted(set(np.round(curve_small.p_delete, 6))
                    & set(np.round(curve_large.p_delete, 6)))
    if len(common) < 2:
        raise ValueError("curves share fewer than two grid points")
    ps = np.array(common)

    def at(curve, p):
        i = int(np.argmin(np.abs(curve.p_delete - p)))
        return curve.p_span[i], curve.p_span_err[i]

    diff, derr = [], []
    for p in ps:
        ys, es = at(curve_small, p)
        yl, el = at(curve_large, p)
        diff.append(yl - ys)
        derr.append(np.hypot(es, el))
    diff = np.array(diff)
    for i in range(len(ps) - 1):
        if diff[i] >= 0 > diff[i + 1]:
            slope = (diff[i + 1] - diff[i]) / (ps[i + 1] - ps[i])
            p_star = ps[i] - diff[i] / slope
            err = float(np.hypot(derr[i], derr[i + 1]) / np.sqrt(2) / abs(slope))
            return Estimate(float(p_star), err)
    raise RuntimeError("size curves do not intersect on the common grid")


def bare_lattice_percolation(lattice: Lattice, mode: str,
                             p_grid: Iterable[float], trials: int,
                             seed: int = 0, **kw) -> PercolationCurve:
    """Deletion sweep on the lattice itself (every site its own domain);
    calibration path for the percolation machinery."""
    cg = identity_compact_graph(lattice)
    kind = lattice.kind.value if lattice.kind else "custom"
    return deletion_sweep([cg], mode, p_grid, trials, seed,
                          kind=kind, L=lattice.L, **kw)


def graph_collector_observer(lattice: Lattice, labels: np.ndarray):
    """Observer storing the compact domain graph of each measurement."""
    config = PovmConfig(lattice, labels)
    part = identify_domains(lattice, config)
    graph = build_domain_graph(lattice, part)
    return {"compact_graph": compact_graph(graph, lattice)}


def sample_domain_graphs(lattice: Lattice, params: ChainParams):
    """Equilibrated stream of compact domain graphs plus per-sample spanning.

    Returns (graphs, spans_list, chain_results)."""
    if lattice.bc != BC_CYLINDER:
        raise ValueError("spanning studies need the open-x cylinder")
    results = run_chains(lattice, params,
                         [graph_collector_observer, domain_stats_observer])
    graphs, span_flags = [], []
    for res in results:
        for cg in res.samples["compact_graph"]:
            graphs.append(cg)
            span_flags.append(_spans_compact(cg))
    return graphs, span_flags, results


@njit(cache=True, nogil=True)
def _wrap_find(parent, off, path, a):
    """Find with full path compression, rewriting offsets relative to the
    root.  off[a] afterwards holds the displacement of a from the root."""
    depth = 0
    node = a
    while parent[node] != node:
        path[depth] = node
        depth += 1
        node = parent[node]
    root = node
    suffix = 0.0
    for i in range(depth - 1, -1, -1):
        nd = path[i]
        suffix += off[nd]
        parent[nd] = root
        off[nd] = suffix
    return root


@njit(cache=True, nogil=True)
def _wrap_union(eu, ev, dx, keep, parent, off, path):
    """Union-find with x-displacement bookkeeping; returns True when a
    cluster closes on itself with a nonzero winding displacement."""
    for k in range(eu.size):
        if not keep[k]:
            continue
        u, v = eu[k], ev[k]
        ru = _wrap_find(parent, off, path, u)
        rv = _wrap_find(parent, off, path, v)
        pu = off[u] if u != ru else 0.0
        pv = off[v] if v != rv else 0.0
        if ru == rv:
            if abs(pv - pu - dx[k]) > 0.5:
                return True
        else:
            parent[rv] = ru
            off[rv] = pu + dx[k] - pv
    return False


def wrapping_spans(lattice: Lattice, keep_edges: np.ndarray | None = None) -> bool:
    """Torus variant of the spanning test: does any cluster wind around the
    periodic x direction?  Operates on lattice sites (identity domains);
    provided for sensitivity checks against the cylinder convention."""
    n = lattice.n_sites
    eu = lattice.edges[:, 0].astype(np.int64)
    ev = lattice.edges[:, 1].astype(np.int64)
    width = float(lattice.cells[0]) if lattice.cells[0] else \
        float(lattice.coords[:, 0].max() - lattice.coords[:, 0].min() + 1)
    dx = lattice.coords[ev, 0] - lattice.coords[eu, 0]
    dx = (dx + width / 2) % width - width / 2
    keep = np.ones(len(eu), dtype=np.bool_) if keep_edges is None \
        else np.asarray(keep_edges, dtype=np.bool_)
    parent = np.arange(n, dtype=np.int64)
    off = np.zeros(n, dtype=np.float64)
    path = np.zeros(n, dtype=np.int64)
    return bool(_wrap_union(eu, ev, dx, keep, parent, off, path))
