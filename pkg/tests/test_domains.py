import itertools
import json
from collections import Counter

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aklt_percolation import domains as dm
from aklt_percolation import lattices as lt
from aklt_percolation import sampler as sp


def naive_partition(lattice, labels):
    g = nx.Graph()
    g.add_nodes_from(range(lattice.n_sites))
    for u, v in lattice.edges:
        if labels[u] == labels[v]:
            g.add_edge(int(u), int(v))
    return list(nx.connected_components(g))


def naive_mod2_edges(lattice, domain_of):
    mult = Counter()
    for u, v in lattice.edges:
        a, b = domain_of[int(u)], domain_of[int(v)]
        if a != b:
            mult[(min(a, b), max(a, b))] += 1
    return sorted(k for k, m in mult.items() if m % 2 == 1)


def test_monochromatic_single_domain():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    config = sp.PovmConfig(lat, np.full(16, 2, dtype=np.int8))
    part = dm.identify_domains(lat, config)
    assert part.n_domains == 1
    assert part.n_internal_edges == 24
    assert part.n_external_edges_multi == 0


def test_proper_coloring_all_singletons():
    # 2-color the bipartite honeycomb: no adjacent sites match
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    labels = np.zeros(16, dtype=np.int8)
    color = {0: 0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in lat.neighbors(u):
            if int(v) not in color:
                color[int(v)] = 1 - color[u]
                stack.append(int(v))
    for v, c in color.items():
        labels[v] = c
    part = dm.identify_domains(lat, sp.PovmConfig(lat, labels))
    assert part.n_domains == lat.n_sites
    assert part.n_internal_edges == 0


def test_partition_matches_bruteforce_on_all_k4_configs(k4):
    for cfg in itertools.product(range(3), repeat=4):
        labels = np.array(cfg, dtype=np.int8)
        part = dm.identify_domains(k4, sp.PovmConfig(k4, labels))
        comps = naive_partition(k4, labels)
        assert part.n_domains == len(comps)
        for comp in comps:
            assert len({int(part.domain_id[v]) for v in comp}) == 1
        assert part.domain_sizes.sum() == 4


@pytest.mark.parametrize("kind,L", [
    (lt.LatticeKind.HONEYCOMB, 8),
    (lt.LatticeKind.SQUARE_OCTAGON, 8),
    (lt.LatticeKind.STAR, 6),
    (lt.LatticeKind.CROSS, 12),
])
def test_partition_invariants_on_random_configs(kind, L, rng):
    lat = lt.build_lattice(kind, L)
    for _ in range(10):
        config = sp.random_config(lat, rng)
        part = dm.identify_domains(lat, config)
        assert part.domain_sizes.sum() == lat.n_sites
        assert part.n_internal_edges + part.n_external_edges_multi == lat.n_edges
        # adjacent same-label sites share a domain; different labels never do
        for u, v in lat.edges:
            same = config.labels[u] == config.labels[v]
            shared = part.domain_id[u] == part.domain_id[v]
            if same:
                assert shared
            else:
                assert not shared
        # compact ids
        assert set(np.unique(part.domain_id)) == set(range(part.n_domains))


def test_mod2_even_multiplicity_cancels():
    # two 2-site domains joined by two lattice edges: no edge survives
    lat = lt.lattice_from_graph(4, [(0, 1), (2, 3), (0, 2), (1, 3)])
    labels = np.array([0, 0, 1, 1], dtype=np.int8)
    part = dm.identify_domains(lat, sp.PovmConfig(lat, labels))
    graph = dm.build_domain_graph(lat, part)
    assert part.n_domains == 2
    assert graph.n_edges == 0


def test_mod2_odd_multiplicity_keeps_one():
    # two 3-site domains joined by three edges: exactly one edge
    edges = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]
    lat = lt.lattice_from_graph(6, edges)
    labels = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)
    part = dm.identify_domains(lat, sp.PovmConfig(lat, labels))
    graph = dm.build_domain_graph(lat, part)
    assert part.n_domains == 2
    assert graph.n_edges == 1


def test_full_pipeline_against_naive_fixture():
    # 16-site square-octagon with a fixed config, reduced independently
    lat = lt.build_lattice(lt.LatticeKind.SQUARE_OCTAGON, 4)
    config = sp.random_config(lat, 123)
    part = dm.identify_domains(lat, config)
    graph = dm.build_domain_graph(lat, part)
    comps = naive_partition(lat, config.labels)
    rep = {}
    for i, comp in enumerate(sorted(comps, key=min)):
        for v in comp:
            rep[v] = i
    # map my domain ids onto the naive ids and compare edge sets
    remap = {}
    for v in range(lat.n_sites):
        remap[int(part.domain_id[v])] = rep[v]
    got = sorted(tuple(sorted((remap[int(a)], remap[int(b)])))
                 for a, b in graph.edges)
    want = naive_mod2_edges(lat, rep)
    assert got == want


def test_mod2_idempotent(rng):
    # reducing the reduced graph (each domain one site) changes nothing
    lat = lt.build_lattice(lt.LatticeKind.SQUARE_OCTAGON, 6)
    config = sp.random_config(lat, rng)
    part = dm.identify_domains(lat, config)
    graph = dm.build_domain_graph(lat, part)
    lat2 = lt.lattice_from_graph(graph.n_vertices, graph.edges.tolist())
    # identity partition: every reduced vertex is its own domain
    part2 = dm.DomainPartition(
        domain_id=np.arange(graph.n_vertices, dtype=np.int32),
        domain_sizes=np.ones(graph.n_vertices, dtype=np.int64),
        n_domains=graph.n_vertices,
        n_internal_edges=0,
        n_external_edges_multi=graph.n_edges)
    graph2 = dm.build_domain_graph(lat2, part2)
    assert sorted(map(tuple, graph2.edges.tolist())) == \
        sorted(map(tuple, graph.edges.tolist()))


def test_domain_graph_is_simple(rng):
    lat = lt.build_lattice(lt.LatticeKind.CROSS, 12)
    for _ in range(5):
        config = sp.random_config(lat, rng)
        graph = dm.build_domain_graph(lat, dm.identify_domains(lat, config))
        assert np.all(graph.edges[:, 0] < graph.edges[:, 1])
        keys = {tuple(e) for e in graph.edges.tolist()}
        assert len(keys) == graph.n_edges


def test_domain_graph_json():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    config = sp.random_config(lat, 5)
    graph = dm.build_domain_graph(lat, dm.identify_domains(lat, config))
    doc = json.loads(graph.to_json())
    assert doc["n_vertices"] == graph.n_vertices
    assert len(doc["edges"]) == graph.n_edges
    assert sum(doc["sizes"]) == lat.n_sites


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_edge_accounting_property(seed):
    lat = lt.build_lattice(lt.LatticeKind.STAR, 6)
    config = sp.random_config(lat, seed)
    part = dm.identify_domains(lat, config)
    assert part.n_internal_edges + part.n_external_edges_multi == lat.n_edges
    sample = dm.graph_sample(part, dm.build_domain_graph(lat, part))
    assert sample.n_giant_vertices <= sample.n_nonisolated <= sample.n_domains


def test_compute_stats_identities():
    lat = lt.build_lattice(lt.LatticeKind.SQUARE_OCTAGON, 10)
    params = sp.ChainParams(seed=9, burn_in_sweeps=100, measure_sweeps=400,
                            measure_interval=2, n_chains=2)
    stats, results = dm.measure_graph_ensemble(lat, params)
    # per-sample identity is exact: avg size times domain count equals N
    for res in results:
        for s in res.samples["graph"]:
            assert (s.n_sites / s.n_domains) * s.n_domains == pytest.approx(s.n_sites)
    # products of means agree up to a Jensen gap that shrinks like 1/N
    prod = stats.avg_domain_size.value * stats.domains_per_site.value
    assert abs(prod - 1.0) < 300 / lat.n_sites
    # degree identity inside the largest component
    lhs = stats.avg_degree.value * stats.vertices_per_site.value
    rhs = 2 * stats.edges_per_site.value
    assert abs(lhs - rhs) < 300 / lat.n_sites


def test_compute_stats_requires_two_samples():
    with pytest.raises(ValueError):
        dm.compute_stats([[]])


def test_compute_stats_accepts_raw_pairs():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    pairs = []
    for seed in range(4):
        config = sp.random_config(lat, seed)
        part = dm.identify_domains(lat, config)
        pairs.append((part, dm.build_domain_graph(lat, part)))
    stats = dm.compute_stats(pairs)
    assert stats.n_samples == 4
    assert stats.n_sites == 16
