"""Trivalent Archimedean lattices on rectilinear grids.

All four 3-regular Archimedean tilings -- honeycomb 6.6.6, square-octagon
4.8.8, cross 4.6.12 and star 3.12.12 -- are generated on integer grids so
that site lookup and neighbor traversal are O(1).  The linear size L is
chosen so that the total site count is N = L**2 for every kind.

The honeycomb is built as a brick wall: W x H sites with full rows and a
vertical bond on every other site.  The other lattices are derived from a
brick-wall "parent": square-octagon places a 4-site square per cell, star
replaces each parent site by a triangle, cross replaces each parent site by
a hexagon whose corner pairs attach to the parent's three bond directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

BC_TORUS = "torus"
BC_CYLINDER = "cylinder-open-x"


class LatticeSizeError(ValueError):
    """Raised when (kind, L) is not a buildable combination."""


class LatticeKind(Enum):
    HONEYCOMB = "honeycomb"
    SQUARE_OCTAGON = "square-octagon"
    CROSS = "cross"
    STAR = "star"

    @classmethod
    def from_name(cls, name: str) -> "LatticeKind":
        for kind in cls:
            if kind.value == name or kind.name.lower() == name.lower():
                return kind
        raise ValueError(f"unknown lattice kind {name!r}")


# Corner labels inside one unit of each derived lattice.  These orderings are
# load-bearing: measurement patterns and the brick parent reconstruction in
# graph_rules index corners through them.
SQOCT_CORNERS = ("N", "E", "S", "W")
STAR_CORNERS = ("E", "W", "V")
CROSS_CORNERS_A = ("e1", "e2", "u1", "u2", "w1", "w2")  # parent site with bond up
CROSS_CORNERS_B = ("e1", "e2", "w1", "w2", "d1", "d2")  # parent site with bond down


@dataclass(frozen=True)
class Lattice:
    """Immutable vertex/edge structure of one generated lattice.

    Adjacency is stored in CSR form (``adj_indptr``/``adj_indices``) next to
    the plain edge list; both describe the same simple graph.  ``left_sites``
    and ``right_sites`` hold the boundary columns used for spanning tests
    under the open-x cylinder.
    """

    kind: LatticeKind | None
    L: int
    bc: str
    n_sites: int
    edges: np.ndarray          # (E, 2) int32, u < v, deterministic order
    adj_indptr: np.ndarray     # (N+1,) int64
    adj_indices: np.ndarray    # (2E,) int32
    coords: np.ndarray         # (N, 2) float64 grid embedding
    triangles: np.ndarray      # (T, 3) int32; empty unless the kind has them
    tri_partner: np.ndarray    # (N, 2) int32; -1 when site is in no triangle
    left_sites: np.ndarray     # (.,) int32
    right_sites: np.ndarray    # (.,) int32
    cells: tuple[int, int] = field(default=(0, 0))  # parent grid (W, H)

    @property
    def N(self) -> int:
        return self.n_sites

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj_indices[self.adj_indptr[v]:self.adj_indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.adj_indptr[v + 1] - self.adj_indptr[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adj_indptr)


def _finish(kind, L, bc, n, edge_list, coords, triangles, left, right, cells):
    edges = np.array(sorted(tuple(sorted(e)) for e in edge_list), dtype=np.int32)
    if len(edges) != len({(int(u), int(v)) for u, v in edges}):
        raise AssertionError("duplicate edges generated")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise AssertionError("self-loop generated")
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.zeros(2 * len(edges), dtype=np.int32)
    fill = indptr[:-1].copy()
    for u, v in edges:
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    tri = np.array(triangles, dtype=np.int32).reshape(-1, 3)
    partner = np.full((n, 2), -1, dtype=np.int32)
    for a, b, c in tri:
        partner[a] = (b, c)
        partner[b] = (a, c)
        partner[c] = (a, b)
    return Lattice(
        kind=kind, L=L, bc=bc, n_sites=n, edges=edges,
        adj_indptr=indptr, adj_indices=indices,
        coords=np.asarray(coords, dtype=np.float64),
        triangles=tri, tri_partner=partner,
        left_sites=np.array(sorted(left), dtype=np.int32),
        right_sites=np.array(sorted(right), dtype=np.int32),
        cells=cells,
    )


def brick_edges(W: int, H: int, bc: str = BC_TORUS):
    """Edge list of the brick-wall honeycomb on a W x H site grid.

    Sites are indexed y*W + x.  Every row is a cycle (chain when the x
    direction is open) and site (x, y) carries a vertical bond up exactly
    when x + y is even.  H must be even for 3-regularity to close on the
    torus; W must be even for the tiling to stay bipartite across the wrap.
    """
    edges = []
    for y in range(H):
        for x in range(W):
            i = y * W + x
            if x + 1 < W:
                edges.append((i, i + 1))
            elif bc == BC_TORUS:
                edges.append((i, y * W))
            if (x + y) % 2 == 0:
                edges.append((i, ((y + 1) % H) * W + x))
    return edges


def _build_honeycomb(L, bc):
    if L % 2 or L < 4:
        raise LatticeSizeError(f"honeycomb needs even L >= 4, got {L}")
    W = H = L
    n = W * H
    coords = [(x, y) for y in range(H) for x in range(W)]
    left = [y * W for y in range(H)]
    right = [y * W + (W - 1) for y in range(H)]
    return _finish(LatticeKind.HONEYCOMB, L, bc, n, brick_edges(W, H, bc),
                   coords, [], left, right, (W, H))


def _build_square_octagon(L, bc):
    if L % 2 or L < 4:
        raise LatticeSizeError(f"square-octagon needs even L >= 4, got {L}")
    nx = ny = L // 2
    n = 4 * nx * ny

    def sid(i, j, k):
        return 4 * (j * nx + i) + k

    N_, E_, S_, W_ = range(4)
    edges = []
    coords = np.zeros((n, 2))
    offs = {N_: (0.5, 0.8), E_: (0.8, 0.5), S_: (0.5, 0.2), W_: (0.2, 0.5)}
    for j in range(ny):
        for i in range(nx):
            for k, (dx, dy) in offs.items():
                coords[sid(i, j, k)] = (i + dx, j + dy)
            # the square
            edges += [(sid(i, j, N_), sid(i, j, E_)), (sid(i, j, E_), sid(i, j, S_)),
                      (sid(i, j, S_), sid(i, j, W_)), (sid(i, j, W_), sid(i, j, N_))]
            # bridges
            if i + 1 < nx:
                edges.append((sid(i, j, E_), sid(i + 1, j, W_)))
            elif bc == BC_TORUS:
                edges.append((sid(i, j, E_), sid(0, j, W_)))
            edges.append((sid(i, j, N_), sid(i, (j + 1) % ny, S_)))
    left = [sid(0, j, k) for j in range(ny) for k in range(4)]
    right = [sid(nx - 1, j, k) for j in range(ny) for k in range(4)]
    return _finish(LatticeKind.SQUARE_OCTAGON, L, bc, n, edges, coords,
                   [], left, right, (nx, ny))


def _build_star(L, bc):
    if L % 6 or L < 6:
        raise LatticeSizeError(f"star needs L divisible by 6, L >= 6, got {L}")
    W, H = L, L // 3
    n = 3 * W * H

    def sid(x, y, k):
        return 3 * (y * W + x) + k

    E_, W_, V_ = range(3)
    edges, triangles = [], []
    coords = np.zeros((n, 2))
    for y in range(H):
        for x in range(W):
            up = (x + y) % 2 == 0
            coords[sid(x, y, E_)] = (x + 0.25, y)
            coords[sid(x, y, W_)] = (x - 0.25, y)
            coords[sid(x, y, V_)] = (x, y + 0.25 if up else y - 0.25)
            triangles.append((sid(x, y, E_), sid(x, y, W_), sid(x, y, V_)))
            edges += [(sid(x, y, E_), sid(x, y, W_)),
                      (sid(x, y, W_), sid(x, y, V_)),
                      (sid(x, y, V_), sid(x, y, E_))]
            if x + 1 < W:
                edges.append((sid(x, y, E_), sid(x + 1, y, W_)))
            elif bc == BC_TORUS:
                edges.append((sid(x, y, E_), sid(0, y, W_)))
            if up:
                edges.append((sid(x, y, V_), sid(x, (y + 1) % H, V_)))
    left = [sid(0, y, k) for y in range(H) for k in range(3)]
    right = [sid(W - 1, y, k) for y in range(H) for k in range(3)]
    return _finish(LatticeKind.STAR, L, bc, n, edges, coords,
                   triangles, left, right, (W, H))


def _build_cross(L, bc):
    if L % 12 or L < 12:
        raise LatticeSizeError(f"cross needs L divisible by 12, L >= 12, got {L}")
    W, H = L // 2, L // 3
    n = 6 * W * H

    def sid(x, y, k):
        return 6 * (y * W + x) + k

    # Corner angles for the embedding; combinatorics only uses the cyclic
    # order (consecutive corners are hexagon edges) plus the pair tables.
    ang_a = (-30, 30, 60, 120, 150, 210)
    ang_b = (-30, 30, 150, 210, 240, 300)
    edges = []
    coords = np.zeros((n, 2))
    for y in range(H):
        for x in range(W):
            a_type = (x + y) % 2 == 0
            angles = ang_a if a_type else ang_b
            for k, ang in enumerate(angles):
                coords[sid(x, y, k)] = (x + 0.3 * np.cos(np.radians(ang)),
                                        y + 0.3 * np.sin(np.radians(ang)))
            for k in range(6):
                edges.append((sid(x, y, k), sid(x, y, (k + 1) % 6)))
            # east connectors: this site's E pair (0, 1) to the east site's
            # W pair, following (p2-q1, q2-p1)
            ex = x + 1
            wrap = ex == W
            if not wrap or bc == BC_TORUS:
                ex %= W
                e_a = (ex + y) % 2 == 0
                q1, q2 = (4, 5) if e_a else (2, 3)
                edges.append((sid(x, y, 1), sid(ex, y, q1)))
                edges.append((sid(ex, y, q2), sid(x, y, 0)))
            # vertical connectors from A-type sites: U pair (2, 3) to the
            # upper B-type site's D pair (4, 5)
            if a_type:
                uy = (y + 1) % H
                edges.append((sid(x, y, 3), sid(x, uy, 4)))
                edges.append((sid(x, uy, 5), sid(x, y, 2)))
    left = [sid(0, y, k) for y in range(H) for k in range(6)]
    right = [sid(W - 1, y, k) for y in range(H) for k in range(6)]
    return _finish(LatticeKind.CROSS, L, bc, n, edges, coords,
                   [], left, right, (W, H))


_BUILDERS = {
    LatticeKind.HONEYCOMB: _build_honeycomb,
    LatticeKind.SQUARE_OCTAGON: _build_square_octagon,
    LatticeKind.STAR: _build_star,
    LatticeKind.CROSS: _build_cross,
}


def build_lattice(kind: LatticeKind, L: int, bc: str = BC_TORUS) -> Lattice:
    """Build one of the four trivalent lattices with N = L**2 sites."""
    if bc not in (BC_TORUS, BC_CYLINDER):
        raise ValueError(f"unknown boundary condition {bc!r}")
    if not isinstance(L, (int, np.integer)) or L <= 0:
        raise LatticeSizeError(f"L must be a positive integer, got {L!r}")
    lat = _BUILDERS[kind](int(L), bc)
    assert lat.n_sites == L * L
    return lat


def lattice_from_graph(n_sites, edge_list, *, triangles=(), coords=None,
                       left=(), right=(), kind=None, L=0,
                       bc="custom") -> Lattice:
    """Wrap an arbitrary simple graph in the Lattice interface.

    Used for small test graphs (K4, cube, bridged triangles) that exercise
    the sampler on non-lattice adjacency.  ``triangles`` enables the
    no-monochromatic-triangle constraint on the listed triples.
    """
    if coords is None:
        coords = np.zeros((n_sites, 2))
    return _finish(kind, L, bc, n_sites, list(edge_list), coords,
                   list(triangles), list(left), list(right), (0, 0))


def complete_graph_k4() -> Lattice:
    return lattice_from_graph(
        4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def cube_graph() -> Lattice:
    """3-regular graph on 8 vertices (the cube)."""
    edges = [(0, 1), (1, 2), (2, 3), (3, 0),
             (4, 5), (5, 6), (6, 7), (7, 4),
             (0, 4), (1, 5), (2, 6), (3, 7)]
    return lattice_from_graph(8, edges)


def bridged_triangles() -> Lattice:
    """Two triangles joined corner-to-corner (the 3-prism), with the
    triangle constraint active -- a minimal frustrated test graph."""
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3),
             (0, 3), (1, 4), (2, 5)]
    return lattice_from_graph(6, edges, triangles=[(0, 1, 2), (3, 4, 5)])


def enumerate_triangles(lattice: Lattice) -> list[tuple[int, int, int]]:
    """All 3-cycles of the lattice, found from adjacency alone."""
    found = set()
    adj = [set(lattice.neighbors(v).tolist()) for v in range(lattice.n_sites)]
    for u, v in lattice.edges:
        for w in adj[int(u)] & adj[int(v)]:
            found.add(tuple(sorted((int(u), int(v), int(w)))))
    return sorted(found)


def kagome_from_star(star: Lattice) -> Lattice:
    """Contract every bridge (non-triangle) edge of a star lattice.

    Merging the two endpoints of each inter-triangle edge turns the star
    lattice into a kagome lattice: triangle corners pair up into 4-valent
    kagome sites.  Boundary membership is inherited from either endpoint.
    """
    if star.kind is not LatticeKind.STAR:
        raise ValueError("kagome contraction is defined for star lattices")
    in_triangle = set()
    for a, b, c in star.triangles:
        a, b, c = int(a), int(b), int(c)
        in_triangle |= {(min(a, b), max(a, b)), (min(b, c), max(b, c)),
                        (min(a, c), max(a, c))}
    parent = np.arange(star.n_sites)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in star.edges:
        if (int(u), int(v)) in in_triangle:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    roots = np.array([find(i) for i in range(star.n_sites)])
    uniq, new_id = np.unique(roots, return_inverse=True)
    n = len(uniq)
    edges = set()
    for u, v in star.edges:
        if (int(u), int(v)) not in in_triangle:
            continue  # contracted away
        a, b = int(new_id[u]), int(new_id[v])
        if a != b:
            edges.add((min(a, b), max(a, b)))
    coords = np.zeros((n, 2))
    counts = np.bincount(new_id, minlength=n).astype(float)
    np.add.at(coords, new_id, star.coords)
    coords /= counts[:, None]
    left = sorted({int(new_id[s]) for s in star.left_sites})
    right = sorted({int(new_id[s]) for s in star.right_sites})
    return lattice_from_graph(n, sorted(edges), coords=coords, left=left,
                              right=right, kind=None, L=star.L, bc=star.bc)


def to_json(lattice: Lattice) -> str:
    """Serialize structure to the documented debug/interchange schema."""
    doc = {
        "kind": lattice.kind.value if lattice.kind else None,
        "L": lattice.L,
        "bc": lattice.bc,
        "n_vertices": lattice.n_sites,
        "edges": [[int(u), int(v)] for u, v in lattice.edges],
        "triangles": [[int(a), int(b), int(c)] for a, b, c in lattice.triangles],
    }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> Lattice:
    doc = json.loads(text)
    kind = LatticeKind.from_name(doc["kind"]) if doc["kind"] else None
    return lattice_from_graph(doc["n_vertices"], [tuple(e) for e in doc["edges"]],
                              triangles=[tuple(t) for t in doc["triangles"]],
                              kind=kind, L=doc["L"], bc=doc["bc"])
