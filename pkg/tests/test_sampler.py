import itertools

import networkx as nx
import numpy as np
import pytest

from aklt_percolation import domains as dm
from aklt_percolation import lattices as lt
from aklt_percolation import sampler as sp


def exact_exponent(lattice, labels):
    """Independent oracle: pure-python BFS over the same-label subgraph."""
    n = lattice.n_sites
    adj = [[] for _ in range(n)]
    internal = 0
    for u, v in lattice.edges:
        u, v = int(u), int(v)
        if labels[u] == labels[v]:
            adj[u].append(v)
            adj[v].append(u)
            internal += 1
    seen = [False] * n
    components = 0
    for start in range(n):
        if seen[start]:
            continue
        components += 1
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return components + internal


def exact_distribution(lattice):
    """Exhaustively enumerated target distribution on a small graph."""
    probs = {}
    for cfg in itertools.product(range(3), repeat=lattice.n_sites):
        bad = any(cfg[a] == cfg[b] == cfg[c] for a, b, c in lattice.triangles)
        if bad:
            continue
        probs[cfg] = 2.0 ** exact_exponent(lattice, cfg)
    total = sum(probs.values())
    return {c: p / total for c, p in probs.items()}


def chain_histogram(lattice, sweeps, seed, burn_in=200):
    params = sp.ChainParams(seed=seed, burn_in_sweeps=burn_in,
                            measure_sweeps=sweeps, measure_interval=1)
    counts = {}

    def record(lat, labels):
        key = tuple(int(x) for x in labels)
        counts[key] = counts.get(key, 0) + 1
        return {}

    result = sp.run_chain(lattice, params, [record])
    return counts, result


def tv_distance(counts, probs):
    total = sum(counts.values())
    return 0.5 * sum(abs(counts.get(c, 0) / total - p) for c, p in probs.items())


# ---------------------------------------------------------------------------
# weight exponent


def test_weight_exponent_hand_counted(k4):
    # two adjacent same labels: 3 domains, 1 internal edge
    config = sp.PovmConfig(k4, np.array([0, 0, 1, 2], dtype=np.int8))
    assert sp.weight_exponent(k4, config) == 4


def test_weight_exponent_monochromatic_honeycomb():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    config = sp.PovmConfig(lat, np.full(16, 2, dtype=np.int8))
    assert sp.weight_exponent(lat, config) == 1 + 24


def test_exponent_matches_oracle_on_all_k4_configs(k4):
    for cfg in itertools.product(range(3), repeat=4):
        config = sp.PovmConfig(k4, np.array(cfg, dtype=np.int8))
        assert sp.weight_exponent(k4, config) == exact_exponent(k4, cfg)


def test_exact_distribution_normalizes(k4):
    probs = exact_distribution(k4)
    assert len(probs) == 81
    assert abs(sum(probs.values()) - 1.0) < 1e-12


def test_config_validation(k4):
    with pytest.raises(ValueError):
        sp.PovmConfig(k4, np.zeros(5, dtype=np.int8))
    with pytest.raises(ValueError):
        sp.PovmConfig(k4, np.array([0, 1, 2, 3], dtype=np.int8))


# ---------------------------------------------------------------------------
# local acceptance


@pytest.mark.parametrize("graph_name", ["k4", "cube"])
def test_local_equals_global_ratio_exhaustive(graph_name, k4, cube):
    lattice = {"k4": k4, "cube": cube}[graph_name]
    n = lattice.n_sites
    for cfg in itertools.product(range(3), repeat=n):
        labels = np.array(cfg, dtype=np.int8)
        config = sp.PovmConfig(lattice, labels)
        before = exact_exponent(lattice, cfg)
        for site in range(n):
            for new in range(3):
                if new == cfg[site]:
                    continue
                flipped = list(cfg)
                flipped[site] = new
                want = min(1.0, 2.0 ** (exact_exponent(lattice, flipped) - before))
                assert sp.local_acceptance(lattice, config, site, new) == want


def test_local_equals_global_on_honeycomb_sampled(rng):
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    for _ in range(200):
        labels = rng.integers(0, 3, lat.n_sites).astype(np.int8)
        config = sp.PovmConfig(lat, labels)
        before = exact_exponent(lat, labels)
        site = int(rng.integers(0, lat.n_sites))
        new = (labels[site] + 1 + int(rng.integers(0, 2))) % 3
        flipped = labels.copy()
        flipped[site] = new
        want = min(1.0, 2.0 ** (exact_exponent(lat, flipped) - before))
        assert sp.local_acceptance(lat, config, site, int(new)) == want


def test_quasilocal_acceptance_half_when_neighbors_reconnect():
    # flip a site whose two same-label neighbors stay connected through an
    # outside path: 2 domains before, 3 after, no internal edges after
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    c = 5
    n1, n2, n3 = (int(v) for v in lat.neighbors(c))
    labels = np.full(lat.n_sites, 1, dtype=np.int8)  # background of y
    labels[[c, n1, n2]] = 0
    labels[n3] = 1
    # connect n1 and n2 with a path of x-labels avoiding c
    g = nx.Graph()
    g.add_edges_from((int(u), int(v)) for u, v in lat.edges)
    g.remove_node(c)
    path = nx.shortest_path(g, n1, n2)
    labels[path] = 0
    config = sp.PovmConfig(lat, labels)
    assert sp.local_acceptance(lat, config, c, 2) == 0.5
    # breaking the path gives 4 domains after the flip: acceptance 1
    labels2 = labels.copy()
    mid = path[len(path) // 2]
    assert mid not in (n1, n2)
    labels2[mid] = 2
    config2 = sp.PovmConfig(lat, labels2)
    assert sp.local_acceptance(lat, config2, c, 2) == 1.0


def test_symmetric_move_accepts():
    # isolated site flipped to a label none of its neighbors carries
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 4)
    labels = np.full(lat.n_sites, 1, dtype=np.int8)
    labels[0] = 0
    config = sp.PovmConfig(lat, labels)
    assert sp.local_acceptance(lat, config, 0, 2) == 1.0


def test_same_label_flip_rejected(k4):
    config = sp.PovmConfig(k4, np.array([0, 1, 2, 0], dtype=np.int8))
    with pytest.raises(ValueError):
        sp.local_acceptance(k4, config, 0, 0)


def test_frustrated_flip_has_zero_acceptance(prism):
    labels = np.array([0, 0, 1, 2, 2, 1], dtype=np.int8)
    config = sp.PovmConfig(prism, labels)
    # flipping site 2 to 0 would make triangle (0,1,2) monochromatic
    assert sp.local_acceptance(prism, config, 2, 0) == 0.0


# ---------------------------------------------------------------------------
# sweeps and chains


def test_sweep_reproducible_and_counts(k4):
    config1 = sp.random_config(k4, 7)
    config2 = sp.PovmConfig(k4, config1.labels.copy())
    _, acc1 = sp.metropolis_sweep(k4, config1, 99)
    _, acc2 = sp.metropolis_sweep(k4, config2, 99)
    assert acc1 == acc2
    assert np.array_equal(config1.labels, config2.labels)
    assert 0 <= acc1 <= k4.n_sites


def test_acceptance_rate_strictly_inside_unit_interval():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 20)
    params = sp.ChainParams(seed=3, burn_in_sweeps=50, measure_sweeps=50)
    r1 = sp.run_chain(lat, params)
    r2 = sp.run_chain(lat, params)
    assert 0.0 < r1.acceptance_rate < 1.0
    assert r1.n_accepted == r2.n_accepted  # determinism


def test_chain_telescoping_bookkeeping(cube):
    params = sp.ChainParams(seed=17, burn_in_sweeps=100, measure_sweeps=500)
    res = sp.run_chain(cube, params)
    assert res.exponent_final == res.exponent_initial + res.exponent_delta_accumulated


@pytest.mark.parametrize("graph_name,sweeps,tol", [
    ("k4", 200_000, 0.01),
    ("prism", 300_000, 0.01),
])
def test_stationary_distribution(graph_name, sweeps, tol, k4, prism):
    lattice = {"k4": k4, "prism": prism}[graph_name]
    probs = exact_distribution(lattice)
    counts, _ = chain_histogram(lattice, sweeps, seed=5)
    assert tv_distance(counts, probs) < tol
    # never visits a zero-weight configuration
    assert all(c in probs for c in counts)


def test_ergodicity_witness_k4(k4):
    # every one of the 81 configurations is reached
    counts, _ = chain_histogram(k4, 50_000, seed=8)
    assert len(counts) == 81


def test_ergodicity_witness_frustrated_prism(prism):
    probs = exact_distribution(prism)
    counts, _ = chain_histogram(prism, 200_000, seed=8)
    assert set(counts) == set(probs)


def test_star_constraint_never_violated():
    lat = lt.build_lattice(lt.LatticeKind.STAR, 6)
    params = sp.ChainParams(seed=2, burn_in_sweeps=100, measure_sweeps=2000,
                            measure_interval=1)

    def mono(lattice, labels):
        return {"mono": sp.PovmConfig(lattice, labels).monochromatic_triangles()}

    res = sp.run_chain(lat, params, [mono])
    assert max(res.samples["mono"]) == 0


def test_star_initial_config_valid():
    lat = lt.build_lattice(lt.LatticeKind.STAR, 12)
    for seed in range(5):
        config = sp.random_config(lat, seed)
        assert config.monochromatic_triangles() == 0


def test_chains_deterministic_and_independent_of_order():
    lat = lt.build_lattice(lt.LatticeKind.HONEYCOMB, 8)
    params = sp.ChainParams(seed=21, burn_in_sweeps=50, measure_sweeps=100,
                            measure_interval=2, n_chains=3)
    obs = [dm.domain_stats_observer]
    runs1 = sp.run_chains(lat, params, obs)
    runs2 = sp.run_chains(lat, params, obs)
    for a, b in zip(runs1, runs2):
        assert a.samples["graph"] == b.samples["graph"]
    # single chain re-run matches its slot in the campaign
    solo = sp.run_chain(lat, params, obs, chain_index=1)
    assert solo.samples["graph"] == runs1[1].samples["graph"]


def test_chain_params_validation():
    with pytest.raises(ValueError):
        sp.ChainParams(seed=0, burn_in_sweeps=0, measure_sweeps=10)
    with pytest.raises(ValueError):
        sp.ChainParams(seed=0, burn_in_sweeps=10, measure_sweeps=10,
                       measure_interval=0)
