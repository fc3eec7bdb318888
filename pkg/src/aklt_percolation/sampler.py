"""Metropolis sampling of correlated POVM outcome configurations.

A configuration assigns one of three labels (x, y, z) to every lattice site.
The target distribution weights a configuration by 2**(|V| - |EE|), where
|V| is the number of same-label connected domains and |EE| the number of
inter-domain edges counted with multiplicity.  Because |EE| + |E_I| is the
fixed total edge count, the weight is equivalently 2**(|V| + |E_I|) with
|E_I| the internal-edge count, which is what the code tracks.

Single-site flips are accepted with min(1, 2**delta), where delta is
evaluated quasi-locally: internal edges at the flipped site plus the number
of distinct domains touching the site's closed neighborhood, before and
after the flip.  Domains are grown on demand by breadth-first expansion, so
the per-flip cost is bounded by the sizes of the few domains touched.

On the star lattice, flips that would make a triangle monochromatic have
zero target weight and are rejected outright; initial configurations are
drawn from the 24 admissible label triples per triangle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Mapping, Sequence

import numpy as np
from numba import njit

from .lattices import Lattice

MASK64 = (1 << 64) - 1


class PovmLabel(IntEnum):
    X = 0
    Y = 1
    Z = 2


@dataclass
class PovmConfig:
    """Per-site POVM outcome labels attached to their lattice."""

    lattice: Lattice
    labels: np.ndarray  # (N,) int8 with values in {0, 1, 2}

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int8)
        if self.labels.shape != (self.lattice.n_sites,):
            raise ValueError("label array does not match lattice size")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 2):
            raise ValueError("labels must be 0 (x), 1 (y) or 2 (z)")

    def copy(self) -> "PovmConfig":
        return PovmConfig(self.lattice, self.labels.copy())

    def monochromatic_triangles(self) -> int:
        tri = self.lattice.triangles
        if len(tri) == 0:
            return 0
        lab = self.labels[tri]
        return int(np.sum((lab[:, 0] == lab[:, 1]) & (lab[:, 1] == lab[:, 2])))


@dataclass(frozen=True)
class ChainParams:
    seed: int
    burn_in_sweeps: int
    measure_sweeps: int
    measure_interval: int = 1
    n_chains: int = 1

    def __post_init__(self):
        if self.burn_in_sweeps <= 0 or self.measure_sweeps <= 0:
            raise ValueError("sweep counts must be positive")
        if self.measure_interval < 1:
            raise ValueError("measure_interval must be >= 1")
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")


def mix_seed(*parts: int) -> int:
    """Deterministic 64-bit seed derivation (splitmix64 over the parts)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (int(p) & MASK64)) & MASK64
        h = (h * 0xBF58476D1CE4E5B9) & MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & MASK64
        h ^= h >> 31
    return h


def random_config(lattice: Lattice, rng) -> PovmConfig:
    """Uniform random configuration; triangle-constrained kinds are
    rejection-sampled per triangle (triangles are vertex-disjoint)."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    labels = rng.integers(0, 3, lattice.n_sites).astype(np.int8)
    for a, b, c in lattice.triangles:
        while labels[a] == labels[b] == labels[c]:
            labels[a], labels[b], labels[c] = rng.integers(0, 3, 3)
    return PovmConfig(lattice, labels)


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True, nogil=True)
def _count_local_domains(labels, indptr, indices, c, stamp, stack, cur):
    """Distinct domains among site c and its neighbors, flooding each domain
    fully so that far-connected neighbors are not double counted."""
    v = 0
    lo, hi = indptr[c], indptr[c + 1]
    for s in range(lo, hi + 1):
        seed = c if s == hi else indices[s]
        if stamp[seed] == cur:
            continue
        v += 1
        lab = labels[seed]
        stamp[seed] = cur
        stack[0] = seed
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(indptr[u], indptr[u + 1]):
                w = indices[k]
                if stamp[w] != cur and labels[w] == lab:
                    stamp[w] = cur
                    stack[top] = w
                    top += 1
    return v


@njit(cache=True, nogil=True)
def _flip_delta(labels, indptr, indices, c, new, stamp, stack, counter):
    """Change in (domain count + internal edges) if site c flips to new.
    Leaves labels unmodified."""
    old = labels[c]
    ei_old = 0
    ei_new = 0
    for k in range(indptr[c], indptr[c + 1]):
        lw = labels[indices[k]]
        if lw == old:
            ei_old += 1
        elif lw == new:
            ei_new += 1
    counter[0] += 1
    vc_old = _count_local_domains(labels, indptr, indices, c, stamp, stack, counter[0])
    labels[c] = new
    counter[0] += 1
    vc_new = _count_local_domains(labels, indptr, indices, c, stamp, stack, counter[0])
    labels[c] = old
    return (vc_new + ei_new) - (vc_old + ei_old)


@njit(cache=True, nogil=True)
def _run_sweeps(labels, indptr, indices, tri_a, tri_b, sites, other, urand,
                stamp, stack, counter):
    """Attempt len(sites) single-site flips in order.  Returns the number of
    accepted flips and the telescoped change of the weight exponent."""
    accepted = 0
    delta_sum = 0
    for t in range(sites.size):
        c = sites[t]
        old = labels[c]
        new = old + 1 + other[t]
        if new >= 3:
            new -= 3
        p1 = tri_a[c]
        if p1 >= 0 and labels[p1] == new and labels[tri_b[c]] == new:
            continue  # zero-weight target: monochromatic triangle
        delta = _flip_delta(labels, indptr, indices, c, new, stamp, stack, counter)
        if delta >= 0 or urand[t] < 2.0 ** delta:
            labels[c] = new
            accepted += 1
            delta_sum += delta
    return accepted, delta_sum


# ---------------------------------------------------------------------------
# public operations


class _Workspace:
    """Reusable per-chain scratch arrays for the BFS kernels."""

    def __init__(self, lattice: Lattice):
        n = lattice.n_sites
        self.stamp = np.zeros(n, dtype=np.int64)
        self.stack = np.zeros(n, dtype=np.int32)
        self.counter = np.zeros(1, dtype=np.int64)
        self.tri_a = np.ascontiguousarray(lattice.tri_partner[:, 0])
        self.tri_b = np.ascontiguousarray(lattice.tri_partner[:, 1])


def weight_exponent(lattice: Lattice, config: PovmConfig) -> int:
    """|V| + |E_I|: domain count plus internal-edge count.

    The unnormalized configuration weight is 2 to this power (a constant
    factor 2**|E| away from 2**(|V| - |EE|))."""
    from .domains import identify_domains

    part = identify_domains(lattice, config)
    return part.n_domains + part.n_internal_edges


def local_acceptance(lattice: Lattice, config: PovmConfig, site: int,
                     new_label: int) -> float:
    """Metropolis acceptance min(1, 2**delta) for flipping one site.

    Returns 0.0 when the flip would create a monochromatic triangle."""
    if config.lattice is not lattice and config.labels.shape != (lattice.n_sites,):
        raise ValueError("config does not belong to this lattice")
    new_label = int(new_label)
    if new_label == int(config.labels[site]):
        raise ValueError("new label equals current label")
    p1, p2 = lattice.tri_partner[site]
    if p1 >= 0 and config.labels[p1] == new_label and config.labels[p2] == new_label:
        return 0.0
    ws = _Workspace(lattice)
    delta = _flip_delta(config.labels, lattice.adj_indptr, lattice.adj_indices,
                        site, new_label, ws.stamp, ws.stack, ws.counter)
    return min(1.0, 2.0 ** int(delta))


def metropolis_sweep(lattice: Lattice, config: PovmConfig, rng,
                     workspace: _Workspace | None = None) -> tuple[PovmConfig, int]:
    """One sweep = N attempted flips at uniformly random sites.  Mutates
    ``config`` in place and returns it with the accepted-flip count."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    ws = workspace or _Workspace(lattice)
    n = lattice.n_sites
    sites = rng.integers(0, n, n)
    other = rng.integers(0, 2, n)
    urand = rng.random(n)
    accepted, _ = _run_sweeps(config.labels, lattice.adj_indptr,
                              lattice.adj_indices, ws.tri_a, ws.tri_b,
                              sites, other, urand, ws.stamp, ws.stack, ws.counter)
    return config, int(accepted)


Observer = Callable[[Lattice, np.ndarray], Mapping[str, object]]


@dataclass
class ChainResult:
    chain_index: int
    n_measurements: int
    n_attempts: int
    n_accepted: int
    samples: dict = field(default_factory=dict)
    exponent_initial: int = 0
    exponent_final: int = 0
    exponent_delta_accumulated: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / max(1, self.n_attempts)


def run_chain(lattice: Lattice, params: ChainParams,
              observers: Sequence[Observer] = (), chain_index: int = 0) -> ChainResult:
    """Run one Markov chain: burn-in, then measurements every
    ``measure_interval`` sweeps.  Fully deterministic in (seed, chain_index)."""
    seed = (params.seed ^ chain_index) & MASK64
    rng = np.random.default_rng(np.random.PCG64(seed))
    config = random_config(lattice, rng)
    ws = _Workspace(lattice)
    n = lattice.n_sites
    result = ChainResult(chain_index=chain_index, n_measurements=0,
                         n_attempts=0, n_accepted=0)
    result.exponent_initial = weight_exponent(lattice, config)

    def advance(n_sweeps):
        total_acc = 0
        total_delta = 0
        sites = rng.integers(0, n, n_sweeps * n)
        other = rng.integers(0, 2, n_sweeps * n)
        urand = rng.random(n_sweeps * n)
        acc, dsum = _run_sweeps(config.labels, lattice.adj_indptr,
                                lattice.adj_indices, ws.tri_a, ws.tri_b,
                                sites, other, urand, ws.stamp, ws.stack,
                                ws.counter)
        total_acc += int(acc)
        total_delta += int(dsum)
        result.n_attempts += n_sweeps * n
        result.n_accepted += total_acc
        result.exponent_delta_accumulated += total_delta

    advance(params.burn_in_sweeps)
    n_measure = params.measure_sweeps // params.measure_interval
    for _ in range(n_measure):
        advance(params.measure_interval)
        for obs in observers:
            for key, value in obs(lattice, config.labels).items():
                result.samples.setdefault(key, []).append(value)
        result.n_measurements += 1
    result.exponent_final = weight_exponent(lattice, config)
    return result


def run_chains(lattice: Lattice, params: ChainParams,
               observers: Sequence[Observer] = ()) -> list[ChainResult]:
    """All chains of the campaign; chain i is seeded with seed XOR i, so
    results do not depend on execution order."""
    return [run_chain(lattice, params, observers, chain_index=i)
            for i in range(params.n_chains)]
