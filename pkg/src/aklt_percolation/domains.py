"""Domain identification and the mod-2 reduced domain graph.

A domain is a maximal connected cluster of equal-label sites.  Contracting
every internal (same-label) edge turns a configuration into a multigraph on
domains; edges between two domains then cancel pairwise, so only pairs with
odd lattice-edge multiplicity keep a single edge.  The result is the simple
graph whose connectivity decides computational usefulness.

Statistics follow the convention, fixed empirically against the published
reference ensembles, that ``vertices_per_site``, ``edges_per_site`` and
``avg_degree`` describe the largest connected component of the reduced
graph (the part a computation could use), while ``avg_domain_size``
averages over all domains (its inverse is ``domains_per_site``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numba import njit

from .lattices import Lattice
from .sampler import ChainParams, PovmConfig, Observer, run_chains


@dataclass(frozen=True)
class DomainPartition:
    domain_id: np.ndarray      # (N,) int32, compact ids 0..n_domains-1
    domain_sizes: np.ndarray   # (n_domains,) int64
    n_domains: int
    n_internal_edges: int
    n_external_edges_multi: int


@dataclass(frozen=True)
class DomainGraph:
    """Simple graph of domains after the mod-2 edge reduction.

    ``site_domain`` is the provenance back-map from lattice sites to domain
    ids (invert it to recover the member sites of a domain)."""

    n_vertices: int
    edges: np.ndarray          # (M, 2) int32, a < b
    vertex_weight: np.ndarray  # (n_vertices,) domain sizes
    site_domain: np.ndarray    # (N,) int32

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        if len(self.edges):
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def to_json(self) -> str:
        import json
        return json.dumps({
            "n_vertices": int(self.n_vertices),
            "edges": [[int(a), int(b)] for a, b in self.edges],
            "sizes": [int(s) for s in self.vertex_weight],
        }, sort_keys=True)


@njit(cache=True, nogil=True)
def _uf_find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True, nogil=True)
def _union_same_label(labels, eu, ev, parent, size):
    n = parent.size
    for i in range(n):
        parent[i] = i
        size[i] = 1
    internal = 0
    for k in range(eu.size):
        u, v = eu[k], ev[k]
        if labels[u] == labels[v]:
            internal += 1
            ru = _uf_find(parent, u)
            rv = _uf_find(parent, v)
            if ru != rv:
                if size[ru] < size[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                size[ru] += size[rv]
    return internal


@njit(cache=True, nogil=True)
def _compact_ids(parent, out):
    n = parent.size
    nd = 0
    for i in range(n):
        if _uf_find(parent, i) == i:
            out[i] = nd
            nd += 1
    for i in range(n):
        out[i] = out[_uf_find(parent, i)]
    return nd


def identify_domains(lattice: Lattice, config: PovmConfig) -> DomainPartition:
    """Union-find pass over all edges, uniting same-label endpoints."""
    if config.labels.shape != (lattice.n_sites,):
        raise ValueError("config does not match lattice")
    n = lattice.n_sites
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    eu = np.ascontiguousarray(lattice.edges[:, 0].astype(np.int64))
    ev = np.ascontiguousarray(lattice.edges[:, 1].astype(np.int64))
    internal = int(_union_same_label(config.labels, eu, ev, parent, size))
    domain_id = np.empty(n, dtype=np.int32)
    nd = int(_compact_ids(parent, domain_id))
    sizes = np.bincount(domain_id, minlength=nd).astype(np.int64)
    return DomainPartition(domain_id=domain_id, domain_sizes=sizes,
                           n_domains=nd, n_internal_edges=internal,
                           n_external_edges_multi=lattice.n_edges - internal)


def build_domain_graph(lattice: Lattice, partition: DomainPartition) -> DomainGraph:
    """Keep one edge per domain pair with odd lattice-edge multiplicity."""
    did = partition.domain_id
    du = did[lattice.edges[:, 0]].astype(np.int64)
    dv = did[lattice.edges[:, 1]].astype(np.int64)
    ext = du != dv
    a = np.minimum(du[ext], dv[ext])
    b = np.maximum(du[ext], dv[ext])
    nd = partition.n_domains
    keys, counts = np.unique(a * nd + b, return_counts=True)
    odd = keys[counts % 2 == 1]
    edges = np.stack([odd // nd, odd % nd], axis=1).astype(np.int32) \
        if len(odd) else np.zeros((0, 2), dtype=np.int32)
    return DomainGraph(n_vertices=nd, edges=edges,
                       vertex_weight=partition.domain_sizes,
                       site_domain=did)


@njit(cache=True, nogil=True)
def _giant_component(n, eu, ev, parent):
    """(vertex count, edge count) of the largest component of a graph."""
    for i in range(n):
        parent[i] = i
    for k in range(eu.size):
        ru = _uf_find(parent, eu[k])
        rv = _uf_find(parent, ev[k])
        if ru != rv:
            parent[rv] = ru
    vcount = np.zeros(n, dtype=np.int64)
    ecount = np.zeros(n, dtype=np.int64)
    for i in range(n):
        vcount[_uf_find(parent, i)] += 1
    for k in range(eu.size):
        ecount[_uf_find(parent, eu[k])] += 1
    best = 0
    for i in range(n):
        if vcount[i] > vcount[best]:
            best = i
    return vcount[best], ecount[best]


class GraphSample(NamedTuple):
    """Scalar observables of one sampled configuration."""

    n_sites: int
    n_domains: int
    n_nonisolated: int
    n_edges_mod2: int
    n_giant_vertices: int
    n_giant_edges: int
    largest_domain: int
    n_internal_edges: int
    n_external_multi: int


def graph_sample(partition: DomainPartition, graph: DomainGraph) -> GraphSample:
    deg = graph.degrees()
    parent = np.empty(graph.n_vertices, dtype=np.int64)
    vg, eg = _giant_component(graph.n_vertices,
                              graph.edges[:, 0].astype(np.int64),
                              graph.edges[:, 1].astype(np.int64), parent)
    return GraphSample(
        n_sites=int(partition.domain_sizes.sum()),
        n_domains=partition.n_domains,
        n_nonisolated=int(np.sum(deg > 0)),
        n_edges_mod2=graph.n_edges,
        n_giant_vertices=int(vg),
        n_giant_edges=int(eg),
        largest_domain=int(partition.domain_sizes.max()),
        n_internal_edges=partition.n_internal_edges,
        n_external_multi=partition.n_external_edges_multi,
    )


def domain_stats_observer(lattice: Lattice, labels: np.ndarray):
    """Chain observer producing one GraphSample per measurement."""
    config = PovmConfig(lattice, labels)
    part = identify_domains(lattice, config)
    graph = build_domain_graph(lattice, part)
    return {"graph": graph_sample(part, graph)}


class Estimate(NamedTuple):
    value: float
    error: float

    def within(self, target: float, tol: float) -> bool:
        return abs(self.value - target) <= tol


def binned_error(series: np.ndarray, n_bins: int = 20) -> float:
    """Standard error from a binning analysis of one (possibly correlated)
    measurement series."""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        return float("nan")
    n_bins = min(n_bins, series.size)
    width = series.size // n_bins
    means = series[:n_bins * width].reshape(n_bins, width).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_bins))


def _pool(chains_values: list[np.ndarray]) -> Estimate:
    # error: the larger of the per-chain binning error (averaged in
    # quadrature) and the cross-chain standard error
    all_vals = np.concatenate(chains_values)
    mean = float(all_vals.mean())
    bin_errs = [binned_error(v) for v in chains_values if v.size >= 2]
    err_bin = float(np.sqrt(np.mean(np.square(bin_errs))) / np.sqrt(len(bin_errs))) \
        if bin_errs else float("nan")
    if len(chains_values) >= 2:
        chain_means = np.array([v.mean() for v in chains_values])
        err_cross = float(chain_means.std(ddof=1) / np.sqrt(len(chain_means)))
        err = max(err_bin, err_cross) if np.isfinite(err_bin) else err_cross
    else:
        err = err_bin
    return Estimate(mean, err)


STAT_FIELDS = ("avg_degree", "avg_domain_size", "largest_domain",
               "vertices_per_site", "edges_per_site", "domains_per_site",
               "mod2_edges_per_site", "isolated_per_site")


@dataclass(frozen=True)
class GraphStats:
    avg_degree: Estimate             # 2 Eg / Vg of the largest component
    avg_domain_size: Estimate        # N / all domains
    largest_domain: Estimate
    vertices_per_site: Estimate      # largest-component vertices / N
    edges_per_site: Estimate         # largest-component edges / N
    domains_per_site: Estimate       # all domains / N
    mod2_edges_per_site: Estimate    # all mod-2 edges / N
    isolated_per_site: Estimate
    n_samples: int
    n_sites: int

    def to_dict(self) -> dict:
        out = {}
        for name in STAT_FIELDS:
            est: Estimate = getattr(self, name)
            out[name] = {"value": est.value, "error": est.error}
        out["n_samples"] = self.n_samples
        out["n_sites"] = self.n_sites
        return out


def compute_stats(chains: Sequence[Sequence]) -> GraphStats:
    """Pool per-chain GraphSample series into means with error bars.

    ``chains`` is a sequence of chains, each a sequence of GraphSample (or
    (partition, graph) pairs, converted on the fly).  A flat sequence of
    samples is treated as a single chain.
    """
    chains = list(chains)
    if chains and (isinstance(chains[0], GraphSample) or
                   (isinstance(chains[0], tuple) and len(chains[0]) == 2 and
                    isinstance(chains[0][0], DomainPartition))):
        chains = [chains]
    norm_chains: list[list[GraphSample]] = []
    for chain in chains:
        rows = []
        for item in chain:
            if isinstance(item, GraphSample):
                rows.append(item)
            else:
                part, graph = item
                rows.append(graph_sample(part, graph))
        norm_chains.append(rows)
    total = sum(len(c) for c in norm_chains)
    if total < 2:
        raise ValueError("need at least two samples")
    n = norm_chains[0][0].n_sites

    def series(fn):
        return [np.array([fn(s) for s in chain], dtype=float)
                for chain in norm_chains if chain]

    return GraphStats(
        avg_degree=_pool(series(lambda s: 2.0 * s.n_giant_edges / max(1, s.n_giant_vertices))),
        avg_domain_size=_pool(series(lambda s: s.n_sites / s.n_domains)),
        largest_domain=_pool(series(lambda s: float(s.largest_domain))),
        vertices_per_site=_pool(series(lambda s: s.n_giant_vertices / s.n_sites)),
        edges_per_site=_pool(series(lambda s: s.n_giant_edges / s.n_sites)),
        domains_per_site=_pool(series(lambda s: s.n_domains / s.n_sites)),
        mod2_edges_per_site=_pool(series(lambda s: s.n_edges_mod2 / s.n_sites)),
        isolated_per_site=_pool(series(lambda s: (s.n_domains - s.n_nonisolated) / s.n_sites)),
        n_samples=total,
        n_sites=n,
    )


def measure_graph_ensemble(lattice: Lattice, params: ChainParams,
                           extra_observers: Sequence[Observer] = ()):
    """Sampling campaign returning GraphStats plus the raw chain results."""
    observers = [domain_stats_observer, *extra_observers]
    results = run_chains(lattice, params, observers)
    stats = compute_stats([r.samples["graph"] for r in results])
    return stats, results


def extrapolate_inverse_L(values_by_L: dict[int, Estimate]) -> Estimate:
    """Fit value(L) = a + b/L and report the L -> infinity intercept."""
    Ls = sorted(values_by_L)
    if len(Ls) < 2:
        raise ValueError("need at least two sizes")
    x = np.array([1.0 / L for L in Ls])
    y = np.array([values_by_L[L].value for L in Ls])
    b, a = np.polyfit(x, y, 1)
    errs = np.array([values_by_L[L].error for L in Ls])
    return Estimate(float(a), float(np.sqrt(np.mean(errs ** 2))))
