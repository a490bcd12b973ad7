import numpy as np
import pytest

from mehwn.errors import ModelViolationError, ParameterError
from mehwn.geometry import Cluster, PointSet, Region, activate, sample_ppp, thin
from mehwn.lattice import (
    EdgeOccupancy,
    build_lattice,
    component_diameter,
    component_index_of_edges,
    connected_components,
    edge_rooted_component_sizes,
    map_cluster_to_component,
    neighboring_vertices,
    occupy_edges,
    point_in_component_area,
)

from oracles import bfs_lattice_components

REG = Region(20.0, 20.0)
LAT = build_lattice(REG, 1.0)


def occupancy_from_ids(lattice, ids):
    occ = np.zeros(lattice.n_edges, dtype=bool)
    occ[list(ids)] = True
    return EdgeOccupancy(lattice, occ)


class TestBuildLattice:
    def test_default_region_counts(self):
        assert LAT.cols == 20 and LAT.rows == 20
        assert LAT.n_vertices == 21 * 21
        assert LAT.n_edges == 2 * 20 * 21  # 840

    def test_unit_region(self):
        lat = build_lattice(Region(1, 1), 1.0)
        assert lat.n_vertices == 4 and lat.n_edges == 4

    def test_coarse_lattice(self):
        lat = build_lattice(REG, 2.0)
        assert (lat.cols + 1, lat.rows + 1) == (11, 11)

    def test_bad_range(self):
        with pytest.raises(ParameterError):
            build_lattice(REG, 0.0)

    def test_region_fully_covered(self):
        lat = build_lattice(Region(3.5, 2.2), 1.0)
        assert lat.cols * lat.edge_length >= 3.5
        assert lat.rows * lat.edge_length >= 2.2


class TestOccupyEdges:
    def test_empty_points(self):
        pts = PointSet(np.zeros((0, 2)), REG, 0.0)
        occ = occupy_edges(LAT, pts)
        assert occ.n_occupied == 0

    def test_single_node_on_horizontal_midpoint(self):
        # nearest vertical disk centres sit sqrt(0.5) > 0.5 away
        pts = PointSet(np.array([[0.5, 0.0]]), REG, 1.0)
        occ = occupy_edges(LAT, pts)
        assert occ.n_occupied == 1
        eid = int(np.flatnonzero(occ.occupied)[0])
        assert LAT.is_horizontal(eid)
        assert LAT.edge_vertices(eid) == ((0, 0), (1, 0))

    def test_overlap_point_occupies_two_edges(self):
        pts = PointSet(np.array([[0.75, 0.25]]), REG, 1.0)
        occ = occupy_edges(LAT, pts)
        assert occ.n_occupied == 2
        assert len(occ.point_edges[0]) == 2

    def test_every_node_occupies_some_edge(self):
        pts = sample_ppp(2.0, REG, seed=31)
        occ = occupy_edges(LAT, pts)
        assert all(len(e) > 0 for e in occ.point_edges)

    def test_matches_brute_force(self):
        pts = sample_ppp(1.0, REG, seed=37)
        occ = occupy_edges(LAT, pts)
        mids = LAT.edge_midpoints()
        brute = np.zeros(LAT.n_edges, dtype=bool)
        for e in range(LAT.n_edges):
            d2 = ((pts.positions - mids[e]) ** 2).sum(axis=1)
            brute[e] = bool((d2 <= 0.25).any())
        assert np.array_equal(occ.occupied, brute)

    def test_outside_region_rejected(self):
        pts = PointSet(np.array([[25.0, 5.0]]), Region(30, 30), 1.0)
        with pytest.raises(ParameterError):
            occupy_edges(LAT, pts)

    def test_occupied_fraction_tracks_formula(self):
        # interior-edge occupancy over thinned sets vs 1 - exp(-lam*sqrt(g)*pi/4)
        lam, g = 1.4, 0.25
        interior = LAT.interior_edge_mask()
        fracs = []
        for s in range(100):
            pts = thin(sample_ppp(lam, REG, seed=600 + s), np.sqrt(g), seed=600 + s)
            occ = occupy_edges(LAT, pts)
            fracs.append(occ.occupied[interior].mean())
        p = 1 - np.exp(-lam * np.sqrt(g) * np.pi / 4)
        se = np.std(fracs, ddof=1) / np.sqrt(len(fracs))
        assert abs(np.mean(fracs) - p) < 3 * se


class TestConnectedComponents:
    def test_single_horizontal_edge(self):
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5)])
        comps = connected_components(occ)
        assert len(comps) == 1
        assert comps[0].size == 2
        assert component_diameter(comps[0]) == 1

    def test_single_vertical_edge(self):
        occ = occupancy_from_ids(LAT, [LAT.vertical_id(5, 5)])
        comps = connected_components(occ)
        assert comps[0].size == 2
        assert component_diameter(comps[0]) == 0

    def test_two_edges_sharing_vertex(self):
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5), LAT.vertical_id(6, 5)])
        comps = connected_components(occ)
        assert len(comps) == 1 and comps[0].size == 3

    def test_touching_disks_merge_parallel_edges(self):
        # opposite horizontal edges of one cell: disks touch at the cell centre
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5), LAT.horizontal_id(5, 6)])
        assert len(connected_components(occ, adjacency="circle")) == 1
        assert len(connected_components(occ, adjacency="vertex")) == 2

    @pytest.mark.parametrize("mode", ["circle", "vertex"])
    @pytest.mark.parametrize("side,p_occ", [(5, 0.3), (5, 0.6), (10, 0.45)])
    def test_matches_bfs_oracle(self, mode, side, p_occ):
        lat = build_lattice(Region(side, side), 1.0)
        rng = np.random.default_rng(side * 100 + int(p_occ * 10))
        for _ in range(20):
            occupied = rng.random(lat.n_edges) < p_occ
            occ = EdgeOccupancy(lat, occupied)
            mine = {frozenset(int(e) for e in c.edge_ids) for c in connected_components(occ, mode)}
            oracle = set(bfs_lattice_components(lat, occupied, mode))
            assert mine == oracle

    def test_bad_adjacency_mode(self):
        occ = occupancy_from_ids(LAT, [0])
        with pytest.raises(ParameterError):
            connected_components(occ, adjacency="diagonal")


class TestComponentDiameter:
    def test_horizontal_chain(self):
        ids = [LAT.horizontal_id(i, 4) for i in (2, 3, 4)]  # 4 vertices in a row
        comps = connected_components(occupancy_from_ids(LAT, ids))
        assert component_diameter(comps[0]) == 3

    def test_vertical_chain(self):
        ids = [LAT.vertical_id(4, j) for j in (2, 3, 4)]
        comps = connected_components(occupancy_from_ids(LAT, ids))
        assert component_diameter(comps[0]) == 0

    def test_l_shape_three_columns(self):
        ids = [LAT.horizontal_id(2, 4), LAT.horizontal_id(3, 4), LAT.vertical_id(2, 4)]
        comps = connected_components(occupancy_from_ids(LAT, ids))
        assert len(comps) == 1
        assert component_diameter(comps[0]) == 2


class TestNeighboringVertices:
    def test_six_vertex_bent_shape_has_nine(self):
        # 6 connected vertices, 9 neighboring vertices
        base_i, base_j = 8, 8
        ids = [
            LAT.horizontal_id(base_i + 0, base_j + 1),  # (0,1)-(1,1)
            LAT.horizontal_id(base_i + 1, base_j + 1),  # (1,1)-(2,1)
            LAT.vertical_id(base_i + 1, base_j + 0),    # (1,0)-(1,1)
            LAT.vertical_id(base_i + 1, base_j + 1),    # (1,1)-(1,2)
            LAT.horizontal_id(base_i + 1, base_j + 2),  # (1,2)-(2,2)
        ]
        comps = connected_components(occupancy_from_ids(LAT, ids))
        assert len(comps) == 1
        assert comps[0].size == 6
        assert neighboring_vertices(comps[0], LAT) == 9

    @pytest.mark.parametrize("n_edges", [1, 2, 5, 9])
    def test_interior_line_attains_2n_plus_2(self, n_edges):
        ids = [LAT.horizontal_id(3 + i, 10) for i in range(n_edges)]
        comps = connected_components(occupancy_from_ids(LAT, ids))
        n = comps[0].size
        assert n == n_edges + 1
        assert neighboring_vertices(comps[0], LAT) == 2 * n + 2

    def test_interior_components_respect_bound(self):
        pts = sample_ppp(0.6, REG, seed=41)
        occ = occupy_edges(LAT, pts)
        for c in connected_components(occ):
            on_border = (
                (c.vertices[:, 0] == 0) | (c.vertices[:, 0] == LAT.cols)
                | (c.vertices[:, 1] == 0) | (c.vertices[:, 1] == LAT.rows)
            ).any()
            if not on_border:
                assert neighboring_vertices(c, LAT) <= 2 * c.size + 2


class TestComponentArea:
    def test_midpoint_inside(self):
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5)])
        comp = connected_components(occ)[0]
        assert point_in_component_area(np.array([5.5, 5.0]), comp)

    def test_far_point_outside(self):
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5)])
        comp = connected_components(occ)[0]
        assert not point_in_component_area(np.array([8.0, 8.0]), comp)

    def test_disk_boundary_inside(self):
        occ = occupancy_from_ids(LAT, [LAT.horizontal_id(5, 5)])
        comp = connected_components(occ)[0]
        assert point_in_component_area(np.array([5.5, 5.5]), comp)


class TestMapClusterToComponent:
    def make_coupled(self, positions, region=REG):
        pts = PointSet(np.asarray(positions, dtype=float), region, 1.0)
        lat = build_lattice(region, 1.0)
        occ = occupy_edges(lat, pts)
        comps = connected_components(occ)
        return pts, lat, occ, comps

    def test_singleton_cluster_maps(self):
        pts, lat, occ, comps = self.make_coupled([[5.5, 5.0]])
        idx = map_cluster_to_component(Cluster(frozenset({0}), 0), pts, occ, comps)
        assert comps[idx].size == 2

    def test_three_node_cluster_single_component(self):
        pts, lat, occ, comps = self.make_coupled([[5.3, 5.1], [5.9, 5.2], [5.6, 5.7]])
        idx = map_cluster_to_component(Cluster(frozenset({0, 1, 2}), 0), pts, occ, comps)
        assert 0 <= idx < len(comps)

    def test_straddle_raises_model_violation(self):
        # Two in-range nodes whose only occupied disks sit at midpoint
        # distance sqrt(2.5): a genuine coupling failure mode.
        pts, lat, occ, comps = self.make_coupled(
            [[2.50005, 2.49], [2.80, 3.41]], region=Region(6, 6)
        )
        assert len(comps) == 2
        with pytest.raises(ModelViolationError):
            map_cluster_to_component(Cluster(frozenset({0, 1}), 0), pts, occ, comps)

    def test_wrong_point_set_rejected(self):
        pts, lat, occ, comps = self.make_coupled([[5.5, 5.0]])
        other = PointSet(np.array([[5.5, 5.0]]), REG, 1.0)
        with pytest.raises(ParameterError):
            map_cluster_to_component(Cluster(frozenset({0}), 0), other, occ, comps)

    def test_mapping_usually_works_and_contains(self):
        # On a moderate-density instance, map every cluster; straddles are
        # rare and tallied rather than asserted away (see acceptance suite).
        pts = sample_ppp(1.0, REG, seed=43)
        act = activate(pts, 0.5, slot=1, seed=43)
        sub = PointSet(pts.positions[act], REG, 0.5)
        from mehwn.geometry import build_instantaneous_graph, clusters

        g = build_instantaneous_graph(sub, np.ones(len(sub), bool), 1.0, slot=1)
        occ = occupy_edges(LAT, sub)
        comps = connected_components(occ)
        e2c = component_index_of_edges(comps, LAT.n_edges)
        mapped = 0
        for c in clusters(g):
            try:
                idx = map_cluster_to_component(c, sub, occ, comps, e2c)
            except ModelViolationError:
                continue
            comp = comps[idx]
            for m in c.members:
                assert point_in_component_area(sub.positions[m], comp)
            mapped += 1
        assert mapped > 0


class TestRootedSizes:
    def test_sizes_per_edge(self):
        ids = [LAT.horizontal_id(2, 4), LAT.horizontal_id(3, 4)]
        occ = occupancy_from_ids(LAT, ids)
        comps = connected_components(occ)
        sizes = edge_rooted_component_sizes(occ, comps)
        assert sizes[ids[0]] == 3 and sizes[ids[1]] == 3
        assert sizes.sum() == 2 * 3
