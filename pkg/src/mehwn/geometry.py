"""Poisson node fields, per-slot connection graphs, and cluster utilities.

Nodes are sampled from a Poisson point process on a bounded rectangle (no
torus wrap).  In a given time slot each node is active with probability q,
and two active nodes are linked when their distance is at most the
communication range.  Distance ties at exactly the range count as linked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .rng import STREAM_ACTIVATE, STREAM_PPP, STREAM_THIN, derive_rng
from .unionfind import DisjointSet


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangular deployment area."""

    width: float
    height: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.width) and self.width > 0):
            raise ParameterError(f"region width must be positive and finite, got {self.width}")
        if not (math.isfinite(self.height) and self.height > 0):
            raise ParameterError(f"region height must be positive and finite, got {self.height}")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def x_min(self) -> float:
        return self.origin[0]

    @property
    def x_max(self) -> float:
        return self.origin[0] + self.width

    @property
    def y_min(self) -> float:
        return self.origin[1]

    @property
    def y_max(self) -> float:
        return self.origin[1] + self.height

    def contains(self, positions: np.ndarray, slack: float = 1e-9) -> bool:
        """True when every row of ``positions`` lies inside the rectangle."""
        if len(positions) == 0:
            return True
        x, y = positions[:, 0], positions[:, 1]
        return bool(
            (x >= self.x_min - slack).all()
            and (x <= self.x_max + slack).all()
            and (y >= self.y_min - slack).all()
            and (y <= self.y_max + slack).all()
        )


@dataclass(frozen=True)
class PointSet:
    """Node positions plus the intensity they were drawn at.

    ``density`` tracks the process intensity through transformations:
    thinning with keep probability c multiplies it by c.
    """

    positions: np.ndarray
    region: Region
    density: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.density) and self.density >= 0):
            raise ParameterError(f"density must be finite and non-negative, got {self.density}")
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.size == 0:
            pos = pos.reshape(0, 2)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ParameterError(f"positions must have shape (n, 2), got {pos.shape}")
        pos = np.ascontiguousarray(pos)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.positions[:, 1]

    def distance(self, u: int, v: int) -> float:
        return float(np.hypot(*(self.positions[u] - self.positions[v])))


@dataclass
class InstantaneousGraph:
    """Links among the nodes active in one time slot.

    An edge (i, j) exists only when both nodes are active and their
    Euclidean distance is at most ``range``.  The graph is undirected;
    ``edges`` holds each pair once with i < j, lexicographically sorted.
    """

    points: PointSet
    active: np.ndarray
    edges: np.ndarray
    range: float
    slot: int = 0
    _adjacency: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style (offsets, neighbors) over all node indices."""
        if self._adjacency is None:
            n = self.n_nodes
            if self.n_edges == 0:
                self._adjacency = (np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64))
            else:
                src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
                dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
                order = np.lexsort((dst, src))
                src, dst = src[order], dst[order]
                offsets = np.zeros(n + 1, dtype=np.int64)
                np.add.at(offsets, src + 1, 1)
                np.cumsum(offsets, out=offsets)
                self._adjacency = (offsets, dst)
        return self._adjacency

    def neighbors(self, u: int) -> np.ndarray:
        offsets, dst = self.adjacency()
        return dst[offsets[u]:offsets[u + 1]]


@dataclass(frozen=True)
class Cluster:
    """Maximal set of mutually reachable active nodes in one slot."""

    members: frozenset[int]
    slot: int

    def __len__(self) -> int:
        return len(self.members)


def sample_ppp(density: float, region: Region, seed: int) -> PointSet:
    """Sample a Poisson point process of the given intensity on the region.

    The node count is Poisson with mean density * area and positions are
    i.i.d. uniform.  Deterministic given the seed.
    """
    if not (math.isfinite(density) and density >= 0):
        raise ParameterError(f"density must be finite and non-negative, got {density}")
    rng = derive_rng(seed, STREAM_PPP)
    n = int(rng.poisson(density * region.area))
    pos = np.empty((n, 2), dtype=np.float64)
    pos[:, 0] = region.x_min + rng.random(n) * region.width
    pos[:, 1] = region.y_min + rng.random(n) * region.height
    return PointSet(pos, region, density)


def thin(points: PointSet, keep_prob: float, seed: int) -> PointSet:
    """Keep each node independently with probability ``keep_prob``.

    The result is again a Poisson process, with intensity scaled by the
    keep probability.
    """
    if not (math.isfinite(keep_prob) and 0.0 <= keep_prob <= 1.0):
        raise ParameterError(f"keep probability must be in [0, 1], got {keep_prob}")
    if keep_prob == 1.0:
        return PointSet(points.positions, points.region, points.density)
    rng = derive_rng(seed, STREAM_THIN)
    keep = rng.random(len(points)) < keep_prob
    return PointSet(points.positions[keep], points.region, points.density * keep_prob)


def activate(points: PointSet, q: float, slot: int, seed: int) -> np.ndarray:
    """Per-node active flags for one slot: each node on with probability q.

    Flags are a function of (seed, slot, node index) only, so slots can be
    evaluated in any order.
    """
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise ParameterError(f"activation probability must be in [0, 1], got {q}")
    if slot < 0:
        raise ParameterError(f"slot index must be non-negative, got {slot}")
    rng = derive_rng(seed, STREAM_ACTIVATE, slot)
    return rng.random(len(points)) < q


def _pairs_within(pos: np.ndarray, r: float) -> np.ndarray:
    """Index pairs (i < j) at Euclidean distance <= r, via a uniform grid.

    Cells have side r, so candidates for a node sit in its own and the
    eight surrounding cells; expected cost is near-linear in n.
    """
    n = pos.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    cx = np.floor(pos[:, 0] / r).astype(np.int64)
    cy = np.floor(pos[:, 1] / r).astype(np.int64)
    cx -= cx.min()
    cy -= cy.min()
    stride = cy.max() + 2
    key = cx * stride + cy
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    starts = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
    bounds = np.r_[starts, len(sorted_key)]
    cells = {int(sorted_key[s]): order[s:e] for s, e in zip(bounds[:-1], bounds[1:])}

    r2 = r * r
    found: list[np.ndarray] = []
    # Offsets cover each unordered cell pair once.
    neighbor_offsets = (1, stride - 1, stride, stride + 1)
    for k in sorted(cells):
        idx = cells[k]
        p = pos[idx]
        if len(idx) > 1:
            d2 = ((p[:, None, :] - p[None, :, :]) ** 2).sum(axis=2)
            a, b = np.nonzero(np.triu(d2 <= r2, k=1))
            if len(a):
                found.append(np.column_stack([idx[a], idx[b]]))
        for off in neighbor_offsets:
            other = cells.get(k + off)
            if other is None:
                continue
            q = pos[other]
            d2 = ((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2)
            a, b = np.nonzero(d2 <= r2)
            if len(a):
                found.append(np.column_stack([idx[a], other[b]]))
    if not found:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.concatenate(found)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    pairs = np.column_stack([lo, hi])
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def build_instantaneous_graph(
    points: PointSet, active: np.ndarray, range_: float, slot: int = 0
) -> InstantaneousGraph:
    """Graph over the active nodes with links up to the communication range."""
    if not (math.isfinite(range_) and range_ > 0):
        raise ParameterError(f"communication range must be positive, got {range_}")
    active = np.asarray(active, dtype=bool)
    if active.shape != (len(points),):
        raise ParameterError(
            f"active flags must have length {len(points)}, got shape {active.shape}"
        )
    idx = np.flatnonzero(active)
    sub_pairs = _pairs_within(points.positions[idx], range_)
    edges = idx[sub_pairs] if len(sub_pairs) else np.empty((0, 2), dtype=np.int64)
    return InstantaneousGraph(points, active, edges, range_, slot)


def cluster_labels(graph: InstantaneousGraph) -> np.ndarray:
    """Cluster label per node: -1 for inactive, else a compact cluster id.

    Labels are numbered by the smallest member index, so they are stable
    for a given graph.
    """
    n = graph.n_nodes
    labels = np.full(n, -1, dtype=np.int64)
    idx = np.flatnonzero(graph.active)
    if len(idx) == 0:
        return labels
    local = {int(v): i for i, v in enumerate(idx)}
    dsu = DisjointSet(len(idx))
    for u, v in graph.edges:
        dsu.union(local[int(u)], local[int(v)])
    labels[idx] = dsu.labels()
    return labels


def clusters(graph: InstantaneousGraph) -> list[Cluster]:
    """Partition of the active nodes into maximal connected sets."""
    labels = cluster_labels(graph)
    groups: dict[int, list[int]] = {}
    for node in np.flatnonzero(labels >= 0):
        groups.setdefault(int(labels[node]), []).append(int(node))
    return [Cluster(frozenset(groups[k]), graph.slot) for k in sorted(groups)]


def rotate_frame(points: PointSet, u: int, v: int) -> PointSet:
    """Rigid motion taking node u to the origin and node v onto the +x axis.

    All pairwise distances are preserved; the returned set keeps the
    original region for provenance even though rotated coordinates may
    fall outside it.
    """
    if u == v:
        raise ParameterError("rotation axis needs two distinct nodes")
    n = len(points)
    if not (0 <= u < n and 0 <= v < n):
        raise ParameterError(f"node indices ({u}, {v}) out of range for {n} nodes")
    delta = points.positions[v] - points.positions[u]
    d = math.hypot(*delta)
    if d == 0:
        raise ParameterError(f"nodes {u} and {v} coincide; axis direction undefined")
    ex = delta / d
    ey = np.array([-ex[1], ex[0]])
    shifted = points.positions - points.positions[u]
    rotated = np.column_stack([shifted @ ex, shifted @ ey])
    return PointSet(rotated, points.region, points.density)


def cluster_extent_x(cluster: Cluster, points: PointSet) -> float:
    """Horizontal spread of a cluster: max minus min member x-coordinate."""
    if not cluster.members:
        raise ParameterError("cluster is empty")
    xs = points.x[sorted(cluster.members)]
    return float(xs.max() - xs.min())


def shortest_path_hops(graph: InstantaneousGraph, u: int, v: int) -> int | None:
    """Breadth-first hop count from u to v, or None when unreachable."""
    n = graph.n_nodes
    if not (0 <= u < n and 0 <= v < n):
        raise ParameterError(f"node indices ({u}, {v}) out of range for {n} nodes")
    if u == v:
        return 0
    offsets, dst = graph.adjacency()
    dist = np.full(n, -1, dtype=np.int64)
    dist[u] = 0
    frontier = [u]
    while frontier:
        nxt: list[int] = []
        for node in frontier:
            for nb in dst[offsets[node]:offsets[node + 1]]:
                if dist[nb] < 0:
                    dist[nb] = dist[node] + 1
                    if nb == v:
                        return int(dist[nb])
                    nxt.append(int(nb))
        frontier = nxt
    return None


def detect_percolation(graph: InstantaneousGraph, region: Region) -> bool:
    """Heuristic spanning check: some cluster touches both vertical sides.

    A cluster spans when it has a node within one communication range of
    the region's left edge and another within range of the right edge.
    """
    labels = cluster_labels(graph)
    idx = np.flatnonzero(labels >= 0)
    if len(idx) == 0:
        return False
    xs = graph.points.x[idx]
    labs = labels[idx]
    n_labels = int(labs.max()) + 1
    touches_left = np.zeros(n_labels, dtype=bool)
    touches_right = np.zeros(n_labels, dtype=bool)
    near_left = xs <= region.x_min + graph.range
    near_right = xs >= region.x_max - graph.range
    touches_left[labs[near_left]] = True
    touches_right[labs[near_right]] = True
    return bool((touches_left & touches_right).any())
