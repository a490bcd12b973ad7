"""Square-lattice coupling: occupied edges, components, and cluster mapping.

A square lattice with edge length equal to the communication range is laid
over the region.  Every lattice edge carries a disk whose diameter is the
edge itself; an edge is occupied when at least one node lies in its disk
(closed: distance exactly half a range counts as inside).  Occupied edges
group into connected components whose vertex counts and horizontal extents
bound the clusters living underneath them.

Two occupied edges are connected when their disks intersect, i.e. their
midpoints are at most one edge length apart.  This covers the six edges
sharing an endpoint plus the opposite parallel edge of each adjacent cell,
whose disk touches at the cell centre.  The endpoint-only reading is
available as ``adjacency="vertex"`` for sensitivity checks; with it, two
nodes of one cluster sitting in the touching disks of opposite cell edges
would break the one-component-per-cluster guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelViolationError, ParameterError
from .geometry import Cluster, PointSet, Region
from .unionfind import DisjointSet

ADJACENCY_MODES = ("circle", "vertex")


@dataclass(frozen=True)
class Lattice:
    """Grid covering the region with edge length equal to the range."""

    region: Region
    edge_length: float
    cols: int
    rows: int

    @property
    def n_vertices(self) -> int:
        return (self.cols + 1) * (self.rows + 1)

    @property
    def n_horizontal(self) -> int:
        return self.cols * (self.rows + 1)

    @property
    def n_vertical(self) -> int:
        return (self.cols + 1) * self.rows

    @property
    def n_edges(self) -> int:
        return self.n_horizontal + self.n_vertical

    def horizontal_id(self, i: int, j: int) -> int:
        """Edge from vertex (i, j) to (i+1, j)."""
        return j * self.cols + i

    def vertical_id(self, i: int, j: int) -> int:
        """Edge from vertex (i, j) to (i, j+1)."""
        return self.n_horizontal + j * (self.cols + 1) + i

    def is_horizontal(self, edge_id: int) -> bool:
        return edge_id < self.n_horizontal

    def edge_vertices(self, edge_id: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """Endpoint vertex grid coordinates (i, j) of an edge."""
        if edge_id < self.n_horizontal:
            j, i = divmod(edge_id, self.cols)
            return (i, j), (i + 1, j)
        k = edge_id - self.n_horizontal
        j, i = divmod(k, self.cols + 1)
        return (i, j), (i, j + 1)

    def edge_midpoints(self) -> np.ndarray:
        """(n_edges, 2) physical midpoint coordinates, indexed by edge id."""
        r = self.edge_length
        x0, y0 = self.region.origin
        mids = np.empty((self.n_edges, 2), dtype=np.float64)
        hj, hi = np.divmod(np.arange(self.n_horizontal), self.cols)
        mids[: self.n_horizontal, 0] = x0 + (hi + 0.5) * r
        mids[: self.n_horizontal, 1] = y0 + hj * r
        vj, vi = np.divmod(np.arange(self.n_vertical), self.cols + 1)
        mids[self.n_horizontal:, 0] = x0 + vi * r
        mids[self.n_horizontal:, 1] = y0 + (vj + 0.5) * r
        return mids

    def interior_edge_mask(self) -> np.ndarray:
        """Edges whose disk lies fully inside the region.

        Boundary disks stick out where no nodes can fall, which biases
        occupancy statistics; interior edges match the unbounded-process
        formulas.
        """
        mids = self.edge_midpoints()
        half = self.edge_length / 2 - 1e-12
        return (
            (mids[:, 0] >= self.region.x_min + half)
            & (mids[:, 0] <= self.region.x_max - half)
            & (mids[:, 1] >= self.region.y_min + half)
            & (mids[:, 1] <= self.region.y_max - half)
        )

    def edge_neighbors(self, edge_id: int, adjacency: str = "circle") -> list[int]:
        """Edge ids adjacent to ``edge_id`` under the given adjacency mode."""
        cols, rows = self.cols, self.rows
        out: list[int] = []
        if edge_id < self.n_horizontal:
            j, i = divmod(edge_id, cols)
            for di in (-1, 1):  # collinear horizontals
                if 0 <= i + di < cols:
                    out.append(self.horizontal_id(i + di, j))
            for vi in (i, i + 1):  # verticals sharing an endpoint
                for vj in (j - 1, j):
                    if 0 <= vi <= cols and 0 <= vj < rows:
                        out.append(self.vertical_id(vi, vj))
            if adjacency == "circle":  # opposite horizontals, disks touch
                for dj in (-1, 1):
                    if 0 <= j + dj <= rows:
                        out.append(self.horizontal_id(i, j + dj))
        else:
            k = edge_id - self.n_horizontal
            j, i = divmod(k, cols + 1)
            for dj in (-1, 1):  # collinear verticals
                if 0 <= j + dj < rows:
                    out.append(self.vertical_id(i, j + dj))
            for hj in (j, j + 1):  # horizontals sharing an endpoint
                for hi in (i - 1, i):
                    if 0 <= hi < cols and 0 <= hj <= rows:
                        out.append(self.horizontal_id(hi, hj))
            if adjacency == "circle":  # opposite verticals
                for di in (-1, 1):
                    if 0 <= i + di <= cols:
                        out.append(self.vertical_id(i + di, j))
        return out


@dataclass(frozen=True)
class EdgeOccupancy:
    """Occupied flag per lattice edge, plus which edges each node occupies."""

    lattice: Lattice
    occupied: np.ndarray
    points: PointSet | None = None
    point_edges: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        occ = np.asarray(self.occupied, dtype=bool)
        if occ.shape != (self.lattice.n_edges,):
            raise ParameterError(
                f"occupancy must have one flag per edge ({self.lattice.n_edges}), got {occ.shape}"
            )
        object.__setattr__(self, "occupied", occ)

    @property
    def n_occupied(self) -> int:
        return int(self.occupied.sum())


@dataclass(frozen=True)
class LatticeComponent:
    """One connected set of occupied edges.

    ``size`` counts distinct vertices; ``diameter`` is the horizontal
    vertex-index extent in edge units (0 for a single vertical edge);
    ``neighbor_count`` counts in-lattice vertices one lattice edge away
    from the component but not in it.
    """

    edge_ids: np.ndarray
    vertices: np.ndarray
    size: int
    diameter: int
    neighbor_count: int
    midpoints: np.ndarray
    edge_length: float

    def __len__(self) -> int:
        return len(self.edge_ids)


def build_lattice(region: Region, range_: float) -> Lattice:
    """Lattice with edge length ``range_`` covering the region entirely."""
    if not (math.isfinite(range_) and range_ > 0):
        raise ParameterError(f"edge length must be positive, got {range_}")
    cols = max(1, int(math.ceil(region.width / range_ - 1e-9)))
    rows = max(1, int(math.ceil(region.height / range_ - 1e-9)))
    return Lattice(region, range_, cols, rows)


def occupy_edges(lattice: Lattice, points: PointSet) -> EdgeOccupancy:
    """Mark every edge whose disk contains at least one node.

    A node can occupy several edges at once where neighboring disks
    overlap.  Nodes must lie inside the lattice's region.
    """
    if not lattice.region.contains(points.positions):
        raise ParameterError("points fall outside the lattice region")
    r = lattice.edge_length
    x0, y0 = lattice.region.origin
    n = len(points)
    occupied = np.zeros(lattice.n_edges, dtype=bool)
    if n == 0:
        return EdgeOccupancy(lattice, occupied, points, tuple())

    u = (points.x - x0) / r
    v = (points.y - y0) / r
    fu = np.floor(u).astype(np.int64)
    fv = np.floor(v).astype(np.int64)
    owner = []
    edge = []
    pt_index = np.arange(n)

    def _collect(ci, cj, horizontal):
        if horizontal:
            ok = (ci >= 0) & (ci < lattice.cols) & (cj >= 0) & (cj <= lattice.rows)
            mx, my = ci + 0.5, cj.astype(np.float64)
        else:
            ok = (ci >= 0) & (ci <= lattice.cols) & (cj >= 0) & (cj < lattice.rows)
            mx, my = ci.astype(np.float64), cj + 0.5
        d2 = (u - mx) ** 2 + (v - my) ** 2
        hit = ok & (d2 <= 0.25)
        if not hit.any():
            return
        ids = (
            cj[hit] * lattice.cols + ci[hit]
            if horizontal
            else lattice.n_horizontal + cj[hit] * (lattice.cols + 1) + ci[hit]
        )
        owner.append(pt_index[hit])
        edge.append(ids)

    for di in (-1, 0):
        for dj in (0, 1):
            _collect(fu + di, fv + dj, horizontal=True)
    for di in (0, 1):
        for dj in (-1, 0):
            _collect(fu + di, fv + dj, horizontal=False)

    if owner:
        owners = np.concatenate(owner)
        edge_ids = np.concatenate(edge)
        occupied[edge_ids] = True
        order = np.lexsort((edge_ids, owners))
        owners, edge_ids = owners[order], edge_ids[order]
        bounds = np.searchsorted(owners, np.arange(n + 1))
        per_point = tuple(edge_ids[bounds[k]:bounds[k + 1]] for k in range(n))
    else:
        per_point = tuple(np.empty(0, dtype=np.int64) for _ in range(n))
    return EdgeOccupancy(lattice, occupied, points, per_point)


def _component_from_edges(lattice: Lattice, edge_ids: np.ndarray, mids: np.ndarray) -> LatticeComponent:
    verts = set()
    for eid in edge_ids:
        a, b = lattice.edge_vertices(int(eid))
        verts.add(a)
        verts.add(b)
    varr = np.array(sorted(verts), dtype=np.int64)
    xs = varr[:, 0]
    diameter = int(xs.max() - xs.min())
    neighbor = set()
    for (i, j) in verts:
        for ni, nj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
            if 0 <= ni <= lattice.cols and 0 <= nj <= lattice.rows and (ni, nj) not in verts:
                neighbor.add((ni, nj))
    return LatticeComponent(
        edge_ids=np.asarray(edge_ids, dtype=np.int64),
        vertices=varr,
        size=len(verts),
        diameter=diameter,
        neighbor_count=len(neighbor),
        midpoints=mids[edge_ids],
        edge_length=lattice.edge_length,
    )


def connected_components(occ: EdgeOccupancy, adjacency: str = "circle") -> list[LatticeComponent]:
    """Maximal connected sets of occupied edges, ordered by smallest edge id."""
    if adjacency not in ADJACENCY_MODES:
        raise ParameterError(f"adjacency must be one of {ADJACENCY_MODES}, got {adjacency!r}")
    lattice = occ.lattice
    occ_ids = np.flatnonzero(occ.occupied)
    if len(occ_ids) == 0:
        return []
    local = {int(e): k for k, e in enumerate(occ_ids)}
    dsu = DisjointSet(len(occ_ids))
    for k, eid in enumerate(occ_ids):
        for nb in lattice.edge_neighbors(int(eid), adjacency):
            other = local.get(nb)
            if other is not None:
                dsu.union(k, other)
    labels = dsu.labels()
    groups: dict[int, list[int]] = {}
    for k, lab in enumerate(labels):
        groups.setdefault(lab, []).append(int(occ_ids[k]))
    mids = lattice.edge_midpoints()
    comps = [
        _component_from_edges(lattice, np.array(groups[lab], dtype=np.int64), mids)
        for lab in sorted(groups, key=lambda lab: groups[lab][0])
    ]
    return comps


def component_diameter(c: LatticeComponent) -> int:
    """Horizontal extent in edges: max vertex column minus min vertex column."""
    if c.size == 0:
        raise ParameterError("component is empty")
    return c.diameter


def neighboring_vertices(c: LatticeComponent, lattice: Lattice) -> int:
    """In-lattice vertices adjacent to the component but outside it.

    An n-vertex component fully interior to the lattice has at most
    2n + 2 of them (the linear shape attains the maximum).
    """
    verts = {(int(i), int(j)) for i, j in c.vertices}
    neighbor = set()
    for (i, j) in verts:
        for ni, nj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
            if 0 <= ni <= lattice.cols and 0 <= nj <= lattice.rows and (ni, nj) not in verts:
                neighbor.add((ni, nj))
    return len(neighbor)


def point_in_component_area(pt: np.ndarray, c: LatticeComponent) -> bool:
    """True when the point lies in the union of the component's edge disks."""
    if c.size == 0:
        raise ParameterError("component is empty")
    d2 = ((c.midpoints - np.asarray(pt, dtype=np.float64)) ** 2).sum(axis=1)
    return bool((d2 <= (c.edge_length / 2) ** 2 + 1e-12).any())


def component_index_of_edges(comps: list[LatticeComponent], n_edges: int) -> np.ndarray:
    """Component index per edge id, -1 for unoccupied edges."""
    out = np.full(n_edges, -1, dtype=np.int64)
    for k, c in enumerate(comps):
        out[c.edge_ids] = k
    return out


def map_cluster_to_component(
    cluster: Cluster,
    points: PointSet,
    occ: EdgeOccupancy,
    comps: list[LatticeComponent],
    edge_to_component: np.ndarray | None = None,
) -> int:
    """Index of the unique component owning the cluster's occupied edges.

    The occupancy must have been computed from ``points`` (the set the
    cluster indexes into).  A cluster whose members occupy edges of two
    different components breaks the coupling model and raises
    ModelViolationError.
    """
    if not cluster.members:
        raise ParameterError("cluster is empty")
    if occ.points is not points or occ.point_edges is None:
        raise ParameterError("occupancy was not computed from the cluster's point set")
    if edge_to_component is None:
        edge_to_component = component_index_of_edges(comps, occ.lattice.n_edges)
    seen: set[int] = set()
    for node in cluster.members:
        for eid in occ.point_edges[node]:
            seen.add(int(edge_to_component[eid]))
    seen.discard(-1)
    if not seen:
        raise ParameterError("cluster members occupy no edges")
    if len(seen) > 1:
        raise ModelViolationError(
            f"cluster of {len(cluster.members)} nodes straddles components {sorted(seen)}"
        )
    return seen.pop()


def edge_rooted_component_sizes(occ: EdgeOccupancy, comps: list[LatticeComponent]) -> np.ndarray:
    """Per edge: vertex count of the component containing it, 0 if unoccupied.

    Rooting the size distribution at a fixed edge is what the component
    size probability refers to: the n=2 (single edge) probability is
    bounded by the occupation probability itself.
    """
    sizes = np.zeros(occ.lattice.n_edges, dtype=np.int64)
    for c in comps:
        sizes[c.edge_ids] = c.size
    return sizes
