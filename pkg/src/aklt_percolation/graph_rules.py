"""Graph rewrites of single-qubit Pauli measurements on graph states.

Measuring a qubit of a graph state in a Pauli basis maps the graph to a new
graph, up to local Clifford corrections on the remaining qubits:

* Z deletes the vertex and its incident edges,
* Y locally complements at the vertex and then deletes it,
* X locally complements at a chosen neighbor, applies the Y rule, and
  locally complements at that neighbor again.

Graphs are tracked up to local Clifford equivalence, i.e. up to the orbit
generated by local complementations; outcome-dependent byproducts never
leave that orbit.

The module also carries the measurement patterns that convert cluster
states on the square-octagon, cross and star lattices into a cluster state
on a (smaller) honeycomb lattice: a sparse pattern per unit cell followed
by measuring out the remaining degree-2 vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import networkx as nx

from .lattices import (BC_TORUS, Lattice, LatticeKind, LatticeSizeError,
                       brick_edges, build_lattice)

PAULI_BASES = ("X", "Y", "Z")


class SimpleGraph:
    """Mutable simple graph with integer vertex ids; no loops, no parallels."""

    __slots__ = ("_adj",)

    def __init__(self, vertices=(), edges=()):
        self._adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def from_lattice(cls, lattice: Lattice) -> "SimpleGraph":
        return cls(range(lattice.n_sites), lattice.edges.tolist())

    def copy(self) -> "SimpleGraph":
        g = SimpleGraph()
        g._adj = {v: set(nb) for v, nb in self._adj.items()}
        return g

    # -- queries ----------------------------------------------------------
    @property
    def vertices(self) -> set[int]:
        return set(self._adj)

    @property
    def n_vertices(self) -> int:
        return len(self._adj)

    def edge_set(self) -> frozenset:
        return frozenset((u, v) for u, nbs in self._adj.items()
                         for v in nbs if u < v)

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def has_vertex(self, v) -> bool:
        return v in self._adj

    def neighbors(self, v) -> set[int]:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def __eq__(self, other):
        return isinstance(other, SimpleGraph) and self._adj == other._adj

    def key(self):
        return (frozenset(self._adj), self.edge_set())

    def __repr__(self):
        return f"SimpleGraph(|V|={self.n_vertices}, |E|={self.n_edges})"

    # -- mutation ---------------------------------------------------------
    def add_vertex(self, v):
        self._adj.setdefault(int(v), set())

    def add_edge(self, u, v):
        u, v = int(u), int(v)
        if u == v:
            raise ValueError("self-loops are not allowed")
        self._adj.setdefault(u, set()).add(v)
        self._adj.setdefault(v, set()).add(u)

    def remove_edge(self, u, v):
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def toggle_edge(self, u, v):
        if v in self._adj[u]:
            self.remove_edge(u, v)
        else:
            self.add_edge(u, v)

    def delete_vertex(self, v):
        for w in list(self._adj[v]):
            self._adj[w].discard(v)
        del self._adj[v]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self._adj)
        g.add_edges_from(self.edge_set())
        return g


def local_complement(graph: SimpleGraph, v: int) -> SimpleGraph:
    """Toggle every edge between neighbors of v; all else unchanged."""
    if not graph.has_vertex(v):
        raise KeyError(f"vertex {v} not in graph")
    out = graph.copy()
    for a, b in combinations(sorted(graph.neighbors(v)), 2):
        out.toggle_edge(a, b)
    return out


def measure_pauli(graph: SimpleGraph, v: int, basis: str) -> SimpleGraph:
    """Post-measurement graph for a Pauli measurement at v (canonical
    outcome branch; other branches differ by local Cliffords only)."""
    if not graph.has_vertex(v):
        raise KeyError(f"vertex {v} not in graph")
    basis = basis.upper()
    if basis == "Z":
        out = graph.copy()
        out.delete_vertex(v)
        return out
    if basis == "Y":
        out = local_complement(graph, v)
        out.delete_vertex(v)
        return out
    if basis == "X":
        if graph.degree(v) == 0:
            out = graph.copy()
            out.delete_vertex(v)
            return out
        b = min(graph.neighbors(v))  # deterministic special neighbor
        out = local_complement(graph, b)
        out = local_complement(out, v)
        out.delete_vertex(v)
        return local_complement(out, b)
    raise ValueError(f"basis must be one of {PAULI_BASES}, got {basis!r}")


def apply_pattern(graph: SimpleGraph, pattern) -> SimpleGraph:
    """Apply an ordered list of (vertex, basis) measurements."""
    seen = set()
    out = graph
    for v, basis in pattern:
        if v in seen:
            raise ValueError(f"vertex {v} measured twice")
        seen.add(v)
        out = measure_pauli(out, v, basis)
    return out


def suppress_degree2(graph: SimpleGraph) -> SimpleGraph:
    """Measure out degree-2 vertices until none remain.

    Uses the Y rule, which splices a degree-2 vertex out of its chain
    exactly (local complementation bonds the two neighbors, then the vertex
    drops out), so subdivided edges contract without leftovers.
    """
    out = graph.copy()
    while True:
        target = None
        for v in sorted(out.vertices):
            if out.degree(v) == 2:
                target = v
                break
        if target is None:
            return out
        out = measure_pauli(out, target, "Y")


def lc_orbit(graph: SimpleGraph, cap: int = 100_000) -> set:
    """All labeled graphs reachable by local complementations."""
    start = graph.key()
    seen = {start}
    frontier = [graph]
    while frontier:
        g = frontier.pop()
        for v in g.vertices:
            h = local_complement(g, v)
            k = h.key()
            if k not in seen:
                if len(seen) >= cap:
                    raise RuntimeError("local-complementation orbit exceeds cap")
                seen.add(k)
                frontier.append(h)
    return seen


def lc_equivalent(g1: SimpleGraph, g2: SimpleGraph, cap: int = 100_000) -> bool:
    """Same labeled graph up to local complementations."""
    if frozenset(g1.vertices) != frozenset(g2.vertices):
        return False
    if g1.key() == g2.key():
        return True
    return g2.key() in lc_orbit(g1, cap=cap)


# ---------------------------------------------------------------------------
# reduction of the other trivalent cluster states to the honeycomb


def reduction_pattern(lattice: Lattice) -> list[tuple[int, str]]:
    """Per-cell measurement pattern that, followed by degree-2 suppression,
    turns the cluster state's graph into a honeycomb."""
    kind = lattice.kind
    W, H = lattice.cells
    if kind is LatticeKind.SQUARE_OCTAGON:
        # one Z per square, alternating between the N and S corner so that
        # the surviving corner keeps its vertical bridge
        pattern = []
        for j in range(H):
            for i in range(W):
                corner = 0 if (i + j) % 2 == 0 else 2  # N or S
                pattern.append((4 * (j * W + i) + corner, "Z"))
        return pattern
    if kind is LatticeKind.STAR:
        # one Y per triangle, on the east corner
        return [(3 * (y * W + x) + 0, "Y") for y in range(H) for x in range(W)]
    if kind is LatticeKind.CROSS:
        # one Z per horizontal connector square (on the west hexagon's east
        # pair: second corner on bond-up parents, first on bond-down ones)
        # and two Z per vertical square (u1 below, d2 above), leaving each
        # hexagon a 4-site path with one railed interior corner
        pattern = []
        for y in range(H):
            for x in range(W):
                base = 6 * (y * W + x)
                if (x + y) % 2 == 0:  # bond-up parent site
                    pattern.append((base + 1, "Z"))   # e2
                    pattern.append((base + 2, "Z"))   # u1
                else:
                    pattern.append((base + 0, "Z"))   # e1
                    pattern.append((base + 5, "Z"))   # d2
        return pattern
    raise ValueError(f"no reduction pattern for lattice kind {kind}")


def _looks_like_honeycomb(g: nx.Graph, reference: nx.Graph) -> bool:
    # girth 6 in the bulk; small tori have shorter wrap cycles, so compare
    # against the girth of the reference of the same size
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        return False
    if any(d != 3 for _, d in g.degree()):
        return False
    if not nx.is_bipartite(g):
        return False
    return nx.girth(g) == nx.girth(reference)


@dataclass(frozen=True)
class ReductionResult:
    graph: SimpleGraph
    isomorphic: bool
    n_measured: int
    target_cells: tuple[int, int]


def reduce_to_honeycomb(kind: LatticeKind, L: int) -> ReductionResult:
    """Measure a cluster state on the given lattice down to a honeycomb.

    Verdict combines structural checks (connected, 3-regular, bipartite,
    girth 6) with explicit isomorphism against the expected honeycomb."""
    if kind is LatticeKind.HONEYCOMB:
        raise ValueError("the honeycomb is the reduction target")
    if kind is LatticeKind.SQUARE_OCTAGON and L % 4:
        raise LatticeSizeError("square-octagon reduction needs L divisible by 4")
    lattice = build_lattice(kind, L, BC_TORUS)
    target = {
        LatticeKind.SQUARE_OCTAGON: (L // 2, L // 2),
        LatticeKind.CROSS: (L // 2, L // 3),
        LatticeKind.STAR: (L, L // 3),
    }[kind]
    graph = SimpleGraph.from_lattice(lattice)
    pattern = reduction_pattern(lattice)
    reduced = suppress_degree2(apply_pattern(graph, pattern))
    got = reduced.to_networkx()
    ref = nx.Graph(brick_edges(*target, BC_TORUS))
    iso = (got.number_of_nodes() == target[0] * target[1]
           and _looks_like_honeycomb(got, ref)
           and nx.is_isomorphic(got, ref))
    return ReductionResult(graph=reduced, isomorphic=iso,
                           n_measured=len(pattern), target_cells=target)
