"""Slotted flooding trials, hop-ratio calibration, and component statistics.

A flood starts at a source node.  In every slot, nodes wake independently
with probability q = sqrt(g); each cluster of the slot's graph that holds
an informed active node becomes fully informed.  The delay of a trial is
the index of the delivery slot minus one, so a destination reached in the
very first slot (it shares the source's cluster) counts as delay zero.
Slot cluster partitions depend only on (seed, slot), so all pairs of one
repeat share them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig
from .errors import EstimationError, ParameterError
from .geometry import (
    InstantaneousGraph,
    PointSet,
    activate,
    build_instantaneous_graph,
    cluster_labels,
    clusters,
    sample_ppp,
    shortest_path_hops,
)
from .lattice import (
    build_lattice,
    component_index_of_edges,
    connected_components,
    occupy_edges,
)
from .rng import STREAM_KAPPA, STREAM_PAIRS, STREAM_STATS, STREAM_TRIAL, derive_rng, derive_seed

PAIR_CATEGORIES = ("x-extremes", "y-extremes", "corners", "random")


@dataclass
class FloodState:
    """Evolving flood front: informed flags never shrink across slots."""

    informed: np.ndarray
    slot: int = 0
    delivered_at: int | None = None


@dataclass(frozen=True)
class DelayTrialResult:
    """Outcome of one source-to-destination flood."""

    source: int
    dest: int
    delay: int | None
    distance: float
    relative_delay: float | None
    pair_category: str = "random"
    timeout: bool = False


@dataclass(frozen=True)
class KappaEstimate:
    """Hop-count-to-distance calibration at the long-term critical density."""

    kappa_hat: float
    samples: int
    distances: tuple[float, ...]
    hops: tuple[int, ...]
    unreachable: int
    n_pairs: int
    repeats: int

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(h / d for h, d in zip(self.hops, self.distances))


class SlotClusterProvider:
    """Lazy per-slot cluster labels for one point set and seed.

    Labels are a pure function of (seed, slot), so every flood of a repeat
    sees the same activations regardless of evaluation order.
    """

    def __init__(self, points: PointSet, q: float, range_: float, seed: int):
        self.points = points
        self.q = q
        self.range = range_
        self.seed = seed
        self._cache: dict[int, np.ndarray] = {}

    def labels(self, slot: int) -> np.ndarray:
        got = self._cache.get(slot)
        if got is None:
            flags = activate(self.points, self.q, slot, self.seed)
            graph = build_instantaneous_graph(self.points, flags, self.range, slot)
            got = cluster_labels(graph)
            self._cache[slot] = got
        return got

    def graph(self, slot: int) -> InstantaneousGraph:
        flags = activate(self.points, self.q, slot, self.seed)
        return build_instantaneous_graph(self.points, flags, self.range, slot)


def run_flood_trial(
    config: NetworkConfig,
    points: PointSet,
    source: int,
    dest: int,
    seed: int,
    slots: SlotClusterProvider | None = None,
    category: str = "random",
) -> DelayTrialResult:
    """Flood from source until the destination is informed or slots run out.

    A timeout is a distinguished result (delay None), not an error.
    """
    n = len(points)
    if not (0 <= source < n and 0 <= dest < n):
        raise ParameterError(f"node indices ({source}, {dest}) out of range for {n} nodes")
    distance = points.distance(source, dest)
    if source == dest:
        return DelayTrialResult(source, dest, 0, distance, 0.0, category)
    if slots is None:
        slots = SlotClusterProvider(points, config.q, config.r0, seed)
    state = FloodState(informed=np.zeros(n, dtype=bool))
    state.informed[source] = True
    for t in range(1, config.effective_max_slots + 1):
        labels = slots.labels(t)
        informed_labels = labels[state.informed]
        informed_labels = np.unique(informed_labels[informed_labels >= 0])
        if len(informed_labels):
            state.informed |= np.isin(labels, informed_labels)
        state.slot = t
        if state.informed[dest]:
            state.delivered_at = t
            delay = t - 1
            rel = 0.0 if delay == 0 else (delay / distance if distance > 0 else 0.0)
            return DelayTrialResult(source, dest, delay, distance, rel, category)
    return DelayTrialResult(source, dest, None, distance, None, category, timeout=True)


def select_pairs(
    points: PointSet, n_random: int, seed: int, min_separation: float = 0.0
) -> list[tuple[int, int, str]]:
    """Three deterministic extreme pairs plus n_random random pairs.

    The deterministic pairs are the x-extremes, the y-extremes, and the
    nodes nearest the lower-left and upper-right region corners.  Random
    pairs are uniform over distinct nodes; with a minimum separation the
    draw retries and falls back to the farthest candidate seen.
    """
    n = len(points)
    if n < 2:
        raise ParameterError(f"pair selection needs at least 2 nodes, got {n}")
    region = points.region
    x, y = points.x, points.y
    pairs: list[tuple[int, int, str]] = [
        (int(np.argmin(x)), int(np.argmax(x)), "x-extremes"),
        (int(np.argmin(y)), int(np.argmax(y)), "y-extremes"),
    ]
    low = np.array([region.x_min, region.y_min])
    high = np.array([region.x_max, region.y_max])
    corner_lo = int(np.argmin(((points.positions - low) ** 2).sum(axis=1)))
    corner_hi = int(np.argmin(((points.positions - high) ** 2).sum(axis=1)))
    pairs.append((corner_lo, corner_hi, "corners"))
    rng = derive_rng(seed, STREAM_PAIRS)
    for _ in range(n_random):
        best: tuple[int, int] | None = None
        best_d = -1.0
        for _attempt in range(200):
            u, v = int(rng.integers(n)), int(rng.integers(n))
            if u == v:
                continue
            d = points.distance(u, v)
            if d > best_d:
                best, best_d = (u, v), d
            if d >= min_separation:
                best = (u, v)
                break
        if best is None:
            raise ParameterError("failed to draw a distinct random pair")
        pairs.append((best[0], best[1], "random"))
    return pairs


def _kappa_samples(
    graph: InstantaneousGraph, pairs: list[tuple[int, int, str]]
) -> tuple[list[float], list[int], int]:
    """Per-pair (distance, hops) on one graph; unreachable pairs counted."""
    distances: list[float] = []
    hops: list[int] = []
    unreachable = 0
    for u, v, _cat in pairs:
        d = graph.points.distance(u, v)
        h = shortest_path_hops(graph, u, v)
        if h is None or d <= 0:
            unreachable += 1
            continue
        distances.append(d)
        hops.append(h)
    return distances, hops, unreachable


def estimate_kappa(
    config: NetworkConfig,
    n_pairs: int | None = None,
    repeats: int | None = None,
    seed: int | None = None,
) -> KappaEstimate:
    """Mean hops-per-distance over sampled pairs at the configured density.

    The caller is expected to run this at the long-term critical density.
    Hops are measured on the full-connectivity graph over the point set
    (every node present), since the long-run graph eventually contains all
    in-range links; set ``kappa_on_slot`` to measure one activated slot
    instead.  Large separations are covered by the extreme/corner pairs;
    ``kappa_min_separation`` additionally floors the random-pair distance.
    """
    n_pairs = config.n_random_pairs if n_pairs is None else n_pairs
    repeats = config.repeats if repeats is None else repeats
    seed = config.seed if seed is None else seed
    if n_pairs < 1:
        raise ParameterError(f"kappa estimation needs at least one pair, got {n_pairs}")
    all_d: list[float] = []
    all_h: list[int] = []
    unreachable = 0
    for rep in range(repeats):
        rep_seed = derive_seed(seed, STREAM_KAPPA, rep)
        pts = sample_ppp(config.lam, config.region, rep_seed)
        if len(pts) < 2:
            continue
        if config.kappa_on_slot:
            flags = activate(pts, config.q, 1, rep_seed)
            graph = build_instantaneous_graph(pts, flags, config.r0, 1)
        else:
            graph = build_instantaneous_graph(pts, np.ones(len(pts), dtype=bool), config.r0)
        pairs = select_pairs(
            pts, max(n_pairs - 3, 0), rep_seed, min_separation=config.effective_kappa_min_separation
        )[:n_pairs]
        d, h, miss = _kappa_samples(graph, pairs)
        all_d.extend(d)
        all_h.extend(h)
        unreachable += miss
    if not all_d:
        raise EstimationError("no reachable pairs; cannot estimate the hop-to-distance ratio")
    ratios = [h / d for h, d in zip(all_h, all_d)]
    return KappaEstimate(
        kappa_hat=float(np.mean(ratios)),
        samples=len(ratios),
        distances=tuple(all_d),
        hops=tuple(all_h),
        unreachable=unreachable,
        n_pairs=n_pairs,
        repeats=repeats,
    )


def gamma_repeat(
    config: NetworkConfig, n_random_pairs: int, seed: int, rep: int
) -> list[DelayTrialResult]:
    """All pair trials of one repeat on one fresh point set.

    Kept standalone so repeats can run on worker processes; the outcome is
    a pure function of (config, n_random_pairs, seed, rep), so parallel
    and serial runs merge to identical results.
    """
    rep_seed = derive_seed(seed, STREAM_TRIAL, rep)
    pts = sample_ppp(config.lam, config.region, rep_seed)
    if len(pts) < 2:
        return []
    pairs = select_pairs(pts, n_random_pairs, rep_seed)
    slots = SlotClusterProvider(pts, config.q, config.r0, rep_seed)
    # Flood edges are a subset of the all-nodes graph, so a pair split
    # across its components can never deliver: report the timeout without
    # burning max_slots on it.
    union = build_instantaneous_graph(pts, np.ones(len(pts), dtype=bool), config.r0)
    union_labels = cluster_labels(union)
    out: list[DelayTrialResult] = []
    for u, v, cat in pairs:
        if union_labels[u] != union_labels[v]:
            out.append(DelayTrialResult(u, v, None, pts.distance(u, v), None, cat, timeout=True))
        else:
            out.append(run_flood_trial(config, pts, u, v, rep_seed, slots, cat))
    return out


@dataclass(frozen=True)
class GammaExperiment:
    """Aggregated flood trials at one density."""

    lam: float
    repeats: int
    trials: tuple[tuple[int, DelayTrialResult], ...]
    delivered: int
    timeouts: int
    mean_gamma: float | None
    category_means: dict[str, float] = field(default_factory=dict)


def gamma_experiment(
    config: NetworkConfig,
    n_random_pairs: int | None = None,
    repeats: int | None = None,
    seed: int | None = None,
) -> GammaExperiment:
    """Flood every selected pair, redrawing the network for each repeat.

    The mean relative delay is taken over delivered trials only; timeout
    counts are reported alongside.
    """
    n_random_pairs = config.n_random_pairs if n_random_pairs is None else n_random_pairs
    repeats = config.repeats if repeats is None else repeats
    seed = config.seed if seed is None else seed
    trials: list[tuple[int, DelayTrialResult]] = []
    for rep in range(repeats):
        trials.extend((rep, t) for t in gamma_repeat(config, n_random_pairs, seed, rep))
    delivered = [t for _, t in trials if not t.timeout]
    rels = [t.relative_delay for t in delivered]
    cat_means: dict[str, float] = {}
    for cat in PAIR_CATEGORIES:
        cat_rels = [t.relative_delay for t in delivered if t.pair_category == cat]
        if cat_rels:
            cat_means[cat] = float(np.mean(cat_rels))
    return GammaExperiment(
        lam=config.lam,
        repeats=repeats,
        trials=tuple(trials),
        delivered=len(delivered),
        timeouts=len(trials) - len(delivered),
        mean_gamma=float(np.mean(rels)) if rels else None,
        category_means=cat_means,
    )


@dataclass(frozen=True)
class InstanceStats:
    """Cluster and lattice-component statistics of one sampled instance."""

    index: int
    lam: float
    g: float
    n_clusters: int
    n_components: int
    cluster_nodes: tuple[int, ...]
    component_sizes: tuple[int, ...]
    component_diameters: tuple[int, ...]
    mapped_sizes: tuple[int, ...]
    mapped_diameters: tuple[int, ...]
    straddled_clusters: int
    occupied_fraction: float
    percolated: bool


def component_statistics(
    config: NetworkConfig, trials: int, seed: int | None = None
) -> list[InstanceStats]:
    """Per-instance cluster/component statistics for the configured density.

    Each instance samples a fresh point set, activates one slot, couples
    the active nodes to the lattice, and maps every cluster to its
    component.  Clusters whose occupied edges straddle two components are
    counted and skipped in the mapped columns (the coupling's containment
    argument has rare geometric failure modes; see the mapping docstring).
    """
    if trials < 1:
        raise ParameterError(f"need at least one instance, got {trials}")
    seed = config.seed if seed is None else seed
    lattice = build_lattice(config.region, config.r0)
    edge_interior = lattice.interior_edge_mask()
    out: list[InstanceStats] = []
    for i in range(trials):
        inst_seed = derive_seed(seed, STREAM_STATS, i)
        pts = sample_ppp(config.lam, config.region, inst_seed)
        flags = activate(pts, config.q, 1, inst_seed)
        if config.raw_occupancy:
            occ_points = pts
            graph = build_instantaneous_graph(pts, flags, config.r0, 1)
        else:
            occ_points = PointSet(pts.positions[flags], config.region, pts.density * config.q)
            graph = build_instantaneous_graph(
                occ_points, np.ones(len(occ_points), dtype=bool), config.r0, 1
            )
        cls = clusters(graph)
        occ = occupy_edges(lattice, occ_points)
        comps = connected_components(occ)
        e2c = component_index_of_edges(comps, lattice.n_edges)
        mapped_sizes: list[int] = []
        mapped_diams: list[int] = []
        straddled = 0
        for c in cls:
            owners = {int(e2c[e]) for m in c.members for e in occ.point_edges[m]}
            owners.discard(-1)
            if len(owners) != 1:
                straddled += 1
                continue
            comp = comps[owners.pop()]
            mapped_sizes.append(comp.size)
            mapped_diams.append(comp.diameter)
        interior = occ.occupied[edge_interior]
        out.append(
            InstanceStats(
                index=i,
                lam=config.lam,
                g=config.g,
                n_clusters=len(cls),
                n_components=len(comps),
                cluster_nodes=tuple(len(c) for c in cls),
                component_sizes=tuple(c.size for c in comps),
                component_diameters=tuple(c.diameter for c in comps),
                mapped_sizes=tuple(mapped_sizes),
                mapped_diameters=tuple(mapped_diams),
                straddled_clusters=straddled,
                occupied_fraction=float(interior.mean()) if len(interior) else 0.0,
                percolated=bool(len(occ_points) and _spanning(graph, config)),
            )
        )
    return out


def _spanning(graph: InstantaneousGraph, config: NetworkConfig) -> bool:
    from .geometry import detect_percolation

    return detect_percolation(graph, config.region)
