"""Visibility-graph assembly and shortest-path search.

Complete graphs keep visibility as a dense boolean matrix and compute edge
weights on the fly from node positions during the search; cone graphs store
explicit adjacency lists. Both are immutable once built and share one
Dijkstra implementation (binary heap, multi-target, lower-id tie breaks).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import Unreachable
from .geom import Point3, TolerancePolicy
from .scene import Scene
from .steiner import ConeSet, SteinerNode, cone_neighbors
from .visibility import VisibilityCounter, pairs_visible_bulk


class VisibilityGraph:
    """Nodes plus either a dense visibility matrix or sparse adjacency."""

    def __init__(self, nodes: list[SteinerNode], strategy: str,
                 vis_matrix: np.ndarray | None = None,
                 adjacency: list[list[tuple[int, float]]] | None = None):
        self.nodes = nodes
        self.strategy = strategy
        self.positions = np.stack([n.position for n in nodes]) if nodes else np.zeros((0, 3))
        self._vis = vis_matrix
        self._adj = adjacency

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        if self._vis is not None:
            return int(np.count_nonzero(self._vis)) // 2
        return sum(len(a) for a in self._adj) // 2

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor ids and Euclidean weights of node u."""
        if self._vis is not None:
            ids = np.nonzero(self._vis[u])[0]
            diff = self.positions[ids] - self.positions[u]
            return ids, np.sqrt(np.einsum("ij,ij->i", diff, diff))
        adj = self._adj[u]
        if not adj:
            return np.empty(0, dtype=int), np.empty(0)
        ids = np.array([a for a, _ in adj], dtype=int)
        w = np.array([w for _, w in adj])
        return ids, w

    def has_edge(self, i: int, j: int) -> bool:
        if self._vis is not None:
            return bool(self._vis[i, j])
        return any(a == j for a, _ in self._adj[i])

    def edge_set(self) -> set[tuple[int, int]]:
        out = set()
        for u in range(self.n_nodes):
            ids, _ = self.neighbors(u)
            for v in ids:
                out.add((min(u, int(v)), max(u, int(v))))
        return out


@dataclass
class PathResult:
    """A found path: waypoints from the source to the terminal on the face."""

    waypoints: list[Point3]
    length: float
    reached_node: int
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "waypoints": [[float(c) for c in p] for p in self.waypoints],
            "reached_node": self.reached_node,
            "stats": dict(self.stats),
        }


def build_complete_graph(nodes: list[SteinerNode], scene: Scene,
                         tol: TolerancePolicy | None = None,
                         counter: VisibilityCounter | None = None) -> VisibilityGraph:
    """Edge (i,j) iff the nodes see each other; weight is their distance."""
    if len(nodes) < 2:
        raise ValueError("need at least two nodes")
    tol = tol or scene.tol
    pos = np.stack([n.position for n in nodes])
    m = len(nodes)
    vis = np.zeros((m, m), dtype=bool)
    block = max(1, min(m, 8_000_000 // max(m, 1)))
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        rows, cols = np.meshgrid(np.arange(i0, i1), np.arange(m), indexing="ij")
        mask = cols > rows
        P = pos[rows[mask]]
        Q = pos[cols[mask]]
        res = pairs_visible_bulk(P, Q, scene, tol, counter)
        sub = np.zeros((i1 - i0, m), dtype=bool)
        sub[mask] = res
        vis[i0:i1] |= sub
    vis |= vis.T
    np.fill_diagonal(vis, False)
    return VisibilityGraph(nodes, "complete", vis_matrix=vis)


def build_cone_graph(nodes: list[SteinerNode], cones: ConeSet, scene: Scene,
                     tol: TolerancePolicy | None = None,
                     counter: VisibilityCounter | None = None,
                     cone_node_ids: set[int] | None = None,
                     extra_edges: list[tuple[int, int, float]] | None = None) -> VisibilityGraph:
    """Union of per-node cone selections, symmetrized.

    ``cone_node_ids`` limits which nodes carry the cone structure (face
    projections do not); candidates are always the cone-equipped nodes.
    ``extra_edges`` adds the face-projection and anchor links.
    """
    if len(nodes) < 2:
        raise ValueError("need at least two nodes")
    tol = tol or scene.tol
    if cone_node_ids is None:
        cone_node_ids = {n.id for n in nodes}
    cone_nodes = [n for n in nodes if n.id in cone_node_ids]
    adj: list[dict[int, float]] = [dict() for _ in nodes]
    for x in cone_nodes:
        candidates = [c for c in cone_nodes if c.id != x.id]
        for nid, w in cone_neighbors(x, cones, candidates, scene, tol, counter):
            adj[x.id][nid] = w
            adj[nid][x.id] = w
    if extra_edges:
        for i, j, w in extra_edges:
            adj[i][j] = w
            adj[j][i] = w
    lists = [sorted(d.items()) for d in adj]
    return VisibilityGraph(nodes, "cone", adjacency=lists)


def dijkstra(g: VisibilityGraph, source: int, targets) -> PathResult:
    """Shortest path from source to the nearest target node.

    Deterministic under weight ties: the heap orders by (distance, id) and
    relaxation updates use lexicographic (distance, predecessor id).
    """
    targets = set(int(t) for t in targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    m = g.n_nodes
    dist = np.full(m, np.inf)
    pred = np.full(m, -1, dtype=int)
    done = np.zeros(m, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, source)]
    reached = -1
    while heap:
        d_u, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u in targets:
            reached = u
            break
        ids, w = g.neighbors(u)
        if len(ids) == 0:
            continue
        nd = d_u + w
        better = nd < dist[ids]
        tie = (nd == dist[ids]) & (u < pred[ids])
        for v, d_v in zip(ids[better | tie], nd[better | tie]):
            if done[v]:
                continue
            dist[v] = d_v
            pred[v] = u
            heapq.heappush(heap, (float(d_v), int(v)))
    if reached < 0:
        raise Unreachable("no target reachable from source")
    order = [reached]
    while order[-1] != source:
        order.append(int(pred[order[-1]]))
    order.reverse()
    waypoints = [g.nodes[i].position for i in order]
    return PathResult(waypoints=waypoints, length=float(dist[reached]),
                      reached_node=reached)
