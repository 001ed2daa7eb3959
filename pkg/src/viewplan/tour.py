"""Cluster tours: cost matrices, GTSP-to-ATSP reduction, solvers, stitching.

The planning pipeline turns per-target configuration clusters into a
generalized TSP (visit exactly one configuration per cluster), reduces it
to an asymmetric TSP by the zero-cost intra-cluster cycle construction
(inter-cluster arcs are re-attached to the cycle predecessor and offset by
a penalty larger than the sum of all finite costs), solves the ATSP exactly
(dynamic programming over subsets, small instances) or heuristically
(nearest-neighbor starts plus zero-run-aware local search), and stitches
the selected configurations back into 3D paths.

The heuristic cost metric ``modified_euclidean`` is a lower bound on the
3D path length: it stretches the straight-line distance whenever the climb
or descent would exceed the pitch limits.  Tours planned with it get
heading and pitch angles assigned afterwards from the geometry of
consecutive waypoints (angle bisectors, with close pairs aligned to their
connecting segment to avoid expensive turn-turn-turn connections).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dubins import (Configuration, DubinsPath3, VehicleParams, plan_3d,
                     plan_3d_lengths, dubins2d_lengths)
from .errors import InfeasibleError
from .sampling import ClusterSamples

TWO_PI = 2.0 * math.pi

COST_MODES = ("exact-3D-dubins", "modified-euclidean", "2D-dubins-at-z*")


@dataclass
class ClusterGraph:
    """Flattened cluster vertices with an asymmetric cost matrix.

    Entries between vertices of the same cluster (and the diagonal) are
    +inf sentinels; all other entries are finite nonnegative lengths.
    """

    clusters: list[list[Configuration]]
    vertices: list[Configuration]
    cluster_of: np.ndarray
    cost: np.ndarray
    mode: str

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def cluster_indices(self, c: int) -> np.ndarray:
        return np.nonzero(self.cluster_of == c)[0]


@dataclass
class Tour:
    """A closed inspection tour: one configuration per cluster, stitched legs."""

    configurations: list[Configuration]
    cluster_order: list[int]
    legs: list[DubinsPath3]
    leg_lengths: list[float]
    total_length: float
    normalized_cost: float
    mode: str

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "cluster_order": list(self.cluster_order),
            "configurations": [[c.x, c.y, c.z, c.psi, c.gamma]
                               for c in self.configurations],
            "leg_lengths": list(self.leg_lengths),
            "total_length": self.total_length,
            "normalized_cost": self.normalized_cost,
        }


def modified_euclidean(q_i: Configuration, q_j: Configuration,
                       params: VehicleParams) -> float:
    """Pitch-limited lower bound on the 3D path length between positions.

    The altitude change cannot be achieved faster than flying at the
    limiting pitch, so the cost is the larger of the straight-line distance
    and |dz| / |sin(gamma_limit)| with the climbing or descending limit.
    """
    dz = q_j.z - q_i.z
    eu = math.dist((q_i.x, q_i.y, q_i.z), (q_j.x, q_j.y, q_j.z))
    if dz == 0.0:
        return eu
    limit = params.gamma_max if dz > 0 else params.gamma_min
    return max(abs(dz) / abs(math.sin(limit)), eu)


def _modified_euclidean_matrix(P: np.ndarray, params: VehicleParams) -> np.ndarray:
    dz = P[None, :, 2] - P[:, None, 2]
    eu = np.linalg.norm(P[None, :, :] - P[:, None, :], axis=2)
    s_up = abs(math.sin(params.gamma_max))
    s_dn = abs(math.sin(params.gamma_min))
    climb = np.abs(dz) / np.where(dz > 0, s_up, s_dn)
    return np.maximum(eu, climb)


def build_graph(samples: ClusterSamples, mode: str,
                params: VehicleParams) -> ClusterGraph:
    """Full asymmetric cost matrix over all cross-cluster vertex pairs."""
    if mode not in COST_MODES:
        raise ValueError(f"unknown cost mode {mode!r}")
    clusters = samples.clusters
    if len(clusters) < 2:
        raise ValueError("need at least two clusters")
    if any(len(c) == 0 for c in clusters):
        raise ValueError("empty cluster in samples")
    vertices = [q for cluster in clusters for q in cluster]
    cluster_of = np.concatenate([
        np.full(len(c), ci, dtype=np.int64) for ci, c in enumerate(clusters)
    ])
    n = len(vertices)
    Q = np.array([q.as_array() for q in vertices])
    cost = np.full((n, n), np.inf)
    cross = cluster_of[:, None] != cluster_of[None, :]
    iu, iv = np.nonzero(cross)
    if mode == "exact-3D-dubins":
        cost[iu, iv] = plan_3d_lengths(Q[iu], Q[iv], params)
    elif mode == "modified-euclidean":
        full = _modified_euclidean_matrix(Q[:, :3], params)
        cost[iu, iv] = full[iu, iv]
    else:  # 2D-dubins-at-z*
        lengths = dubins2d_lengths(Q[iu, 0], Q[iu, 1], Q[iu, 3],
                                   Q[iv, 0], Q[iv, 1], Q[iv, 3], params.rho_min)
        cost[iu, iv] = lengths
    return ClusterGraph(clusters, vertices, cluster_of, cost, mode)


def noon_bean(graph: ClusterGraph) -> tuple[np.ndarray, float]:
    """Reduce the cluster-visit problem to a plain ATSP.

    Each cluster becomes a zero-cost directed cycle over its vertices; an
    arc leaving vertex u is re-attached to u's cycle predecessor and offset
    by a penalty exceeding the sum of all finite costs.  The optimal ATSP
    tour then walks every cluster cycle in full, and its cost equals the
    optimal cluster-tour cost plus n_clusters * penalty.

    Returns the ATSP matrix and the penalty constant.
    """
    cost = graph.cost
    n = graph.n_vertices
    finite = cost[np.isfinite(cost)]
    penalty = float(finite.sum()) + 1.0
    atsp = np.full((n, n), np.inf)
    for ci in range(len(graph.clusters)):
        idx = graph.cluster_indices(ci)
        k = len(idx)
        succ = np.roll(idx, -1)
        if k > 1:
            atsp[idx, succ] = 0.0
        # arcs out of the successor are paid when leaving this vertex
        other = np.nonzero(graph.cluster_of != ci)[0]
        if len(other):
            atsp[np.repeat(idx, len(other)), np.tile(other, k)] = \
                cost[np.repeat(succ, len(other)), np.tile(other, k)] + penalty
    return atsp, penalty


def held_karp(cost: np.ndarray) -> list[int]:
    """Exact minimum ATSP cycle by subset dynamic programming (n <= 16)."""
    n = len(cost)
    if n > 16:
        raise ValueError("exact solver is limited to 16 vertices")
    if n < 2:
        return list(range(n))
    C = cost.tolist()
    INF = math.inf
    full = 1 << n
    dp = [[INF] * n for _ in range(full)]
    parent = [[-1] * n for _ in range(full)]
    dp[1][0] = 0.0
    for mask in range(1, full):
        if not mask & 1:
            continue
        row = dp[mask]
        for j in range(1, n):
            if not mask & (1 << j):
                continue
            pm = mask ^ (1 << j)
            prow = dp[pm]
            best = INF
            arg = -1
            for k in range(n):
                if not pm & (1 << k):
                    continue
                c = prow[k] + C[k][j]
                if c < best:
                    best = c
                    arg = k
            row[j] = best
            parent[mask][j] = arg
    final = full - 1
    best = INF
    arg = -1
    for j in range(1, n):
        c = dp[final][j] + C[j][0]
        if c < best:
            best = c
            arg = j
    if arg < 0:
        raise InfeasibleError("no finite tour exists")
    order = [arg]
    mask = final
    while order[-1] != 0:
        j = order[-1]
        order.append(parent[mask][j])
        mask ^= 1 << j
    order.reverse()
    return order


def tour_cost(cost: np.ndarray, order) -> float:
    order = list(order)
    return float(sum(cost[order[i], order[(i + 1) % len(order)]]
                     for i in range(len(order))))


def _nearest_neighbor(cost: np.ndarray, start: int) -> list[int]:
    n = len(cost)
    visited = np.zeros(n, dtype=bool)
    order = [start]
    visited[start] = True
    cur = start
    for _ in range(n - 1):
        row = np.where(visited, np.inf, cost[cur])
        nxt = int(np.argmin(row))
        order.append(nxt)
        visited[nxt] = True
        cur = nxt
    return order


def _zero_runs(cost: np.ndarray, order: list[int]) -> list[list[int]]:
    """Split a cyclic tour into maximal runs linked by zero-cost arcs."""
    n = len(order)
    start = 0
    for i in range(n):
        if cost[order[i - 1], order[i]] != 0.0:
            start = i
            break
    rot = order[start:] + order[:start]
    blocks: list[list[int]] = [[rot[0]]]
    for i in range(1, n):
        if cost[rot[i - 1], rot[i]] == 0.0:
            blocks[-1].append(rot[i])
        else:
            blocks.append([rot[i]])
    return blocks


def _block_tour_cost(cost: np.ndarray, blocks: list[list[int]]) -> float:
    total = 0.0
    for i, blk in enumerate(blocks):
        for a, b in zip(blk, blk[1:]):
            total += cost[a, b]
        nxt = blocks[(i + 1) % len(blocks)][0]
        total += cost[blk[-1], nxt]
    return total


def _local_search(cost: np.ndarray, order: list[int]) -> list[int]:
    """Zero-run-aware local search: block relocation (no reversal), reversal
    of the block sequence between two cut points, and rotation of closed
    zero-cost cycles to re-choose their exit vertex."""
    improved = True
    while improved:
        improved = False
        blocks = _zero_runs(cost, order)
        nb = len(blocks)
        if nb < 2:
            break
        base = _block_tour_cost(cost, blocks)

        # rotate blocks that form closed zero cycles
        for bi, blk in enumerate(blocks):
            k = len(blk)
            if k < 2 or cost[blk[-1], blk[0]] != 0.0:
                continue
            prev = blocks[bi - 1][-1]
            nxt = blocks[(bi + 1) % nb][0]
            cur = cost[prev, blk[0]] + cost[blk[-1], nxt]
            deltas = np.empty(k)
            for r in range(k):
                deltas[r] = cost[prev, blk[r]] + cost[blk[r - 1], nxt]
            r = int(np.argmin(deltas))
            if deltas[r] < cur - 1e-12:
                blocks[bi] = blk[r:] + blk[:r]
                order = [v for b in blocks for v in b]
                improved = True
                break
        if improved:
            continue

        # relocate a run of 1..3 blocks elsewhere, forward or reversed order
        done = False
        for span in (1, 2, 3):
            if span >= nb or done:
                continue
            for i in range(nb):
                seg = [blocks[(i + s) % nb] for s in range(span)]
                rest = [blocks[j] for j in range(nb)
                        if not any((i + s) % nb == j for s in range(span))]
                if len(rest) < 1:
                    continue
                for j in range(len(rest)):
                    for piece in (seg, seg[::-1]) if span > 1 else (seg,):
                        cand = rest[:j + 1] + piece + rest[j + 1:]
                        if _block_tour_cost(cost, cand) < base - 1e-12:
                            blocks = cand
                            order = [v for b in blocks for v in b]
                            improved = True
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
        if improved:
            continue

        # exchange two blocks
        for i in range(nb - 1):
            for j in range(i + 1, nb):
                cand = list(blocks)
                cand[i], cand[j] = cand[j], cand[i]
                if _block_tour_cost(cost, cand) < base - 1e-12:
                    blocks = cand
                    order = [v for b in blocks for v in b]
                    improved = True
                    break
            if improved:
                break
        if improved:
            continue

        # reverse the sequence of blocks between two cut points
        for i in range(nb - 1):
            for j in range(i + 1, nb):
                cand = blocks[:i] + blocks[i:j + 1][::-1] + blocks[j + 1:]
                if _block_tour_cost(cost, cand) < base - 1e-12:
                    blocks = cand
                    order = [v for b in blocks for v in b]
                    improved = True
                    break
            if improved:
                break
    return order


def _double_bridge(blocks: list[list[int]], rng) -> list[list[int]]:
    """Cut the block sequence in three places and reconnect as A C B D.

    Preserves every block's internal direction, so it is safe under
    asymmetric costs and zero-run structure."""
    nb = len(blocks)
    if nb < 4:
        return list(blocks)
    cuts = sorted(rng.choice(np.arange(1, nb), size=3, replace=False).tolist())
    a, b, c = cuts
    return blocks[:a] + blocks[b:c] + blocks[a:b] + blocks[c:]


def solve_atsp(cost: np.ndarray, mode: str = "heuristic", seed: int = 0,
               restarts: int = 8, kicks: int = 12) -> list[int]:
    """ATSP vertex order, exact (subset DP, n <= 16) or heuristic.

    The heuristic runs nearest-neighbor construction from seeded start
    vertices, local search to a local optimum, then ``kicks`` double-bridge
    perturbations with re-optimization, returning the best of ``restarts``.
    """
    cost = np.asarray(cost, dtype=float)
    n = len(cost)
    if cost.shape != (n, n):
        raise ValueError("cost matrix must be square")
    if n < 2:
        raise ValueError("need at least two vertices")
    if mode == "exact":
        return held_karp(cost)
    if mode != "heuristic":
        raise ValueError(f"unknown solver mode {mode!r}")
    rng = np.random.default_rng(seed)
    starts = rng.integers(0, n, size=restarts)
    best_order: list[int] | None = None
    best_cost = math.inf
    for s in starts:
        order = _local_search(cost, _nearest_neighbor(cost, int(s)))
        c = tour_cost(cost, order)
        for _ in range(kicks):
            kicked = [v for b in _double_bridge(_zero_runs(cost, order), rng) for v in b]
            kicked = _local_search(cost, kicked)
            ck = tour_cost(cost, kicked)
            if ck < c:
                order, c = kicked, ck
        if c < best_cost:
            best_cost = c
            best_order = order
    if best_order is None or not math.isfinite(best_cost):
        raise InfeasibleError("heuristic found no finite tour")
    return best_order


def _decode_entries(order: list[int], graph: ClusterGraph) -> list[int]:
    """Entry vertex of each cluster run, in visit order.

    Verifies the reduced-problem structure: every cluster's vertices must
    appear consecutively and follow the cluster cycle from the entry point.
    """
    n = len(order)
    cof = graph.cluster_of
    start = 0
    for i in range(n):
        if cof[order[i - 1]] != cof[order[i]]:
            start = i
            break
    rot = order[start:] + order[:start]
    runs: list[list[int]] = [[rot[0]]]
    for v in rot[1:]:
        if cof[v] == cof[runs[-1][-1]]:
            runs[-1].append(v)
        else:
            runs.append([v])
    if len(runs) != len(graph.clusters):
        raise InfeasibleError("solver order does not keep clusters contiguous")
    entries = []
    for run in runs:
        ci = int(cof[run[0]])
        idx = graph.cluster_indices(ci)
        if len(run) != len(idx):
            raise InfeasibleError("solver order splits a cluster")
        pos = {int(v): k for k, v in enumerate(idx)}
        e = pos[run[0]]
        expected = [int(idx[(e + s) % len(idx)]) for s in range(len(idx))]
        if run != expected:
            raise InfeasibleError("solver order breaks a cluster cycle")
        entries.append(run[0])
    return entries


def _stitch(configs: list[Configuration], params: VehicleParams):
    legs = []
    lengths = []
    m = len(configs)
    for i in range(m):
        leg = plan_3d(configs[i], configs[(i + 1) % m], params)
        legs.append(leg)
        lengths.append(leg.length)
    return legs, lengths, float(sum(lengths))


def extract_tour(order: list[int], graph: ClusterGraph,
                 params: VehicleParams) -> Tour:
    """Decode a reduced-problem solution into a closed tour.

    Picks each cluster's entry vertex (the configuration whose outgoing
    cost the reduction charged), re-plans every leg as a full 3D path, and
    reports total and turn-radius-normalized cost.
    """
    entries = _decode_entries(order, graph)
    configs = [graph.vertices[v] for v in entries]
    cluster_order = [int(graph.cluster_of[v]) for v in entries]
    legs, lengths, total = _stitch(configs, params)
    return Tour(configs, cluster_order, legs, lengths, total,
                total / params.rho_min, graph.mode)


def bisect_angle_approx(points: np.ndarray,
                        params: VehicleParams) -> list[Configuration]:
    """Assign headings and pitches to an ordered loop of 3D waypoints.

    Each waypoint's direction is the bisector of its incoming and outgoing
    segments (the vector to the next waypoint minus the vector from the
    previous one, with circular indexing); pitch is clipped to the vehicle
    bounds.  A second pass aligns consecutive waypoints closer than four
    turn radii with their connecting segment, skipping ahead after each
    adjustment, which suppresses turn-turn-turn connections.
    """
    V = np.asarray(points, dtype=float).reshape(-1, 3)
    m = len(V)
    if m < 2:
        raise ValueError("need at least two waypoints")
    psis = np.empty(m)
    gammas = np.empty(m)
    for i in range(m):
        b = V[(i + 1) % m] - V[i - 1]
        if np.linalg.norm(b) < 1e-12:
            b = V[(i + 1) % m] - V[i]
        psis[i] = math.atan2(b[1], b[0]) % TWO_PI
        gammas[i] = _clip_pitch(math.atan2(b[2], math.hypot(b[0], b[1])), params)
    i = 0
    while i < m:
        w = V[(i + 1) % m] - V[i]
        if np.linalg.norm(w[:2]) + abs(w[2]) > 1e-12 and \
                np.linalg.norm(w) < 4.0 * params.rho_min:
            psi = math.atan2(w[1], w[0]) % TWO_PI
            gamma = _clip_pitch(math.atan2(w[2], math.hypot(w[0], w[1])), params)
            psis[i] = psi
            gammas[i] = gamma
            psis[(i + 1) % m] = psi
            gammas[(i + 1) % m] = gamma
            i += 1
        i += 1
    return [Configuration(V[i, 0], V[i, 1], V[i, 2], psis[i], gammas[i])
            for i in range(m)]


def _clip_pitch(g: float, params: VehicleParams) -> float:
    return max(min(g, params.gamma_max), params.gamma_min)


def _unique_positions(cluster: list[Configuration]) -> list[Configuration]:
    seen = set()
    out = []
    for q in cluster:
        key = (q.x, q.y, q.z)
        if key not in seen:
            seen.add(key)
            out.append(Configuration(q.x, q.y, q.z, 0.0, 0.0))
    return out


def plan_metspn(samples: ClusterSamples, params: VehicleParams,
                solver: str = "heuristic", seed: int = 0) -> Tour:
    """Plan a tour with the lower-bound metric, then assign angles.

    The cost matrix uses positions only (duplicate positions that differ
    only in sampled angles are collapsed), so the reduced problem is much
    smaller than the full 3D-cost pipeline.  The resulting waypoint loop is
    given headings and pitches geometrically and stitched with full 3D
    paths, so the returned tour is flyable.
    """
    pos_clusters = [_unique_positions(c) for c in samples.clusters]
    graph = build_graph(ClusterSamples(pos_clusters), "modified-euclidean", params)
    atsp, _ = noon_bean(graph)
    order = solve_atsp(atsp, solver, seed)
    entries = _decode_entries(order, graph)
    V = np.array([graph.vertices[v].position for v in entries])
    cluster_order = [int(graph.cluster_of[v]) for v in entries]
    configs = bisect_angle_approx(V, params)
    legs, lengths, total = _stitch(configs, params)
    return Tour(configs, cluster_order, legs, lengths, total,
                total / params.rho_min, "modified-euclidean")


def solve_dtspn(samples: ClusterSamples, mode: str, params: VehicleParams,
                solver: str = "heuristic", seed: int = 0) -> Tour:
    """Full pipeline: cost matrix, reduction, ATSP solve, tour extraction."""
    graph = build_graph(samples, mode, params)
    atsp, _ = noon_bean(graph)
    order = solve_atsp(atsp, solver, seed)
    return extract_tour(order, graph, params)
