"""Point-to-face solvers: grid visibility graph, weighted samples, cone graph.

All three share the same skeleton: derive lower/upper bounds (B, D) on the
answer from a coarse run to the anchor h, discretize obstacle edges and the
target face into Steiner nodes sized by B, search the visibility graph from
the source to the node set lying on the face. They differ in how nodes are
placed and how the graph is restricted.

When the source sees the anchor directly the answer is exactly |sh| (no
face point is closer than h, and the straight segment is feasible), so all
solvers short-circuit that case.

Subdivision pitches are budgeted per path contact rather than divided by
the global edge count: the returned path is validated against independent
oracles instead of leaning on worst-case constants, and ``epsilon1`` in the
config overrides the default pitch when a stricter budget is wanted.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, Unreachable
from .geom import Point3, Triangle3, closest_point_on_triangle, norm
from .graph import PathResult, VisibilityGraph, build_complete_graph, build_cone_graph, dijkstra
from .scene import FaceRef, Scene
from .steiner import (
    NodeKind,
    PathBounds,
    SteinerNode,
    build_cone_set,
    face_grid_points,
    papadimitriou_edge_points,
    projection_steiner_points,
    uniform_edge_points,
)
from .visibility import (
    VisibilityCounter,
    pairs_visible_bulk,
    path_feasible,
    points_visible,
    tangent_projection_points,
)

ALGORITHMS = ("grid_vg", "wvd", "cone")

BOOTSTRAP_EPS = 0.5        # coarse phase approximation target
BOOTSTRAP_PITCH = 0.125    # edge-subdivision parameter of the coarse phase
CONE_SPACING_CONTACTS = 2  # uniform spacing eps' * B / (4 * contacts)


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float
    algorithm: str = "cone"
    epsilon1: float | None = None
    cone_theta: float | None = None
    tol_rel: float | None = None

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError("epsilon must be in (0, 1]")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; "
                             f"choose from {ALGORITHMS}")


@dataclass
class SolveOutcome:
    result: PathResult
    bounds: PathBounds
    algorithm: str
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "length": self.result.length,
            "waypoints": [[float(c) for c in p] for p in self.result.waypoints],
            "bounds": {"B": self.bounds.B, "D": self.bounds.D,
                       "h": [float(c) for c in self.bounds.h]},
            "algorithm": self.algorithm,
            "epsilon": self.epsilon,
            "stats": dict(self.result.stats),
        }


def compute_anchor(s: Point3, face_tri: Triangle3) -> Point3:
    """Closest point of the target face to the source."""
    return closest_point_on_triangle(np.asarray(s, float), face_tri)


def _face_diameter(face_tri: Triangle3) -> float:
    v = face_tri.vertices
    return max(norm(v[0] - v[1]), norm(v[1] - v[2]), norm(v[2] - v[0]))


def _assemble(source: Point3, h: Point3, extra: list[SteinerNode]) -> list[SteinerNode]:
    """Stamp ids: source is 0, anchor is 1, the rest keep their given order."""
    nodes = [SteinerNode(0, NodeKind.SOURCE, np.asarray(source, float)),
             SteinerNode(1, NodeKind.ANCHOR, np.asarray(h, float))]
    for n in extra:
        nodes.append(n.with_id(len(nodes)))
    return nodes


def _prune(nodes: list[SteinerNode], s: Point3, h: Point3, threshold: float) -> list[SteinerNode]:
    """Drop nodes that cannot lie on any path shorter than the threshold."""
    if not nodes:
        return nodes
    pos = np.stack([n.position for n in nodes])
    via = (np.sqrt(((pos - s) ** 2).sum(axis=1))
           + np.sqrt(((pos - h) ** 2).sum(axis=1)))
    return [n for n, keep in zip(nodes, via <= threshold) if keep]


def _edge_nodes_papadimitriou(scene: Scene, s: Point3, eps1: float) -> list[SteinerNode]:
    fallback = eps1 * scene.diameter / 4.0
    out: list[SteinerNode] = []
    for edge in scene.edges:
        out.extend(papadimitriou_edge_points(edge, s, eps1, fallback_pitch=fallback))
    return out


def bootstrap_bounds(s: Point3, face_tri: Triangle3, scene: Scene,
                     cfg: SolveConfig, counter: VisibilityCounter | None = None
                     ) -> tuple[PathBounds, PathResult]:
    """Coarse path to the anchor h; B = |Q_sh| / (2(1+1/2)), D = |Q_sh|.

    Also returns the coarse witness path, which later doubles as a fallback
    upper bound for the fine search.
    """
    counter = counter or VisibilityCounter()
    s = np.asarray(s, float)
    h = compute_anchor(s, face_tri)
    sh = norm(s - h)
    if sh <= scene.tol.abs:
        raise DegenerateGeometry("source lies on the target face")
    if points_visible(s, h, scene, scene.tol, counter):
        witness = PathResult(waypoints=[s, h], length=sh, reached_node=1)
        return PathBounds(B=sh / 3.0, D=sh, h=h), witness
    nodes = _assemble(s, h, _edge_nodes_papadimitriou(scene, s, BOOTSTRAP_PITCH))
    g = build_complete_graph(nodes, scene, scene.tol, counter)
    result = dijkstra(g, 0, {1})
    q = result.length
    return PathBounds(B=q / (2.0 * (1.0 + BOOTSTRAP_EPS)), D=q, h=h), result


def _finish(best: PathResult, bounds: PathBounds, algorithm: str, cfg: SolveConfig,
            scene: Scene, counter: VisibilityCounter, t0: float,
            n_nodes: int, n_edges: int) -> SolveOutcome:
    if not path_feasible(best.waypoints, scene, scene.tol):
        raise AssertionError("internal error: returned path fails visibility recheck")
    best.stats = {
        "nodes": n_nodes,
        "edges": n_edges,
        "visibility_tests": counter.pair_tests,
        "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
    }
    return SolveOutcome(result=best, bounds=bounds, algorithm=algorithm,
                        epsilon=cfg.epsilon)


def _trivial_outcome(s, h, sh, algorithm, cfg, scene, counter, t0) -> SolveOutcome:
    bounds = PathBounds(B=max(sh, scene.tol.abs) / 3.0, D=max(sh, scene.tol.abs), h=h)
    res = PathResult(waypoints=[np.asarray(s, float), h], length=sh, reached_node=1)
    return _finish(res, bounds, algorithm, cfg, scene, counter, t0, 2, 1)


def _direct_or_none(s, h, scene, counter):
    sh = norm(np.asarray(s, float) - h)
    if sh <= scene.tol.abs:
        return sh
    if points_visible(np.asarray(s, float), h, scene, scene.tol, counter):
        return sh
    return None


def _better(a: PathResult, b: PathResult) -> PathResult:
    return a if a.length <= b.length else b


def solve_grid_vg(s: Point3, face_ref: FaceRef, scene: Scene, cfg: SolveConfig) -> SolveOutcome:
    """Edge-subdivision grid algorithm: eps'' = eps/3 drives both the edge
    progression pitch and the face grid cell; complete visibility graph."""
    counter = VisibilityCounter()
    t0 = time.perf_counter()
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = compute_anchor(s, face_tri)
    direct = _direct_or_none(s, h, scene, counter)
    if direct is not None:
        return _trivial_outcome(s, h, direct, "grid_vg", cfg, scene, counter, t0)

    bounds, coarse = bootstrap_bounds(s, face_tri, scene, cfg, counter)
    eps2 = cfg.epsilon / 3.0
    eps1 = cfg.epsilon1 if cfg.epsilon1 is not None else eps2
    threshold = (1.0 + cfg.epsilon) * bounds.D + _face_diameter(face_tri) + 8 * scene.tol.abs

    edge_nodes = _prune(_edge_nodes_papadimitriou(scene, s, eps1), s, h, threshold)
    grid = face_grid_points(face_tri, h, bounds.D, eps2 * bounds.B, scene.tol)
    grid = [g for g in grid if norm(g.position - h) > scene.tol.abs]
    nodes = _assemble(s, h, grid + edge_nodes)
    g = build_complete_graph(nodes, scene, scene.tol, counter)
    targets = {1} | {n.id for n in nodes if n.kind is NodeKind.FACE_POINT}
    best = _better(dijkstra(g, 0, targets), coarse)
    return _finish(best, bounds, "grid_vg", cfg, scene, counter, t0,
                   g.n_nodes, g.n_edges)


def solve_wvd(s: Point3, face_ref: FaceRef, scene: Scene, cfg: SolveConfig) -> SolveOutcome:
    """Weighted-sample algorithm: coarse face grid at cell eps*B, each sample
    weighted by an eps/8-quality point-to-point path; the returned path is
    the minimum-weight sample's (the distance field w_p + |pt| over the face
    is minimized at the sample itself)."""
    counter = VisibilityCounter()
    t0 = time.perf_counter()
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = compute_anchor(s, face_tri)
    direct = _direct_or_none(s, h, scene, counter)
    if direct is not None:
        return _trivial_outcome(s, h, direct, "wvd", cfg, scene, counter, t0)

    bounds, coarse = bootstrap_bounds(s, face_tri, scene, cfg, counter)
    eps1 = cfg.epsilon1 if cfg.epsilon1 is not None else cfg.epsilon / 8.0
    threshold = (1.0 + cfg.epsilon) * bounds.D + _face_diameter(face_tri) + 8 * scene.tol.abs

    edge_nodes = _prune(_edge_nodes_papadimitriou(scene, s, eps1), s, h, threshold)
    samples = face_grid_points(face_tri, h, bounds.D, cfg.epsilon * bounds.B, scene.tol)
    samples = [p for p in samples if norm(p.position - h) > scene.tol.abs]
    nodes = _assemble(s, h, samples + edge_nodes)
    g = build_complete_graph(nodes, scene, scene.tol, counter)
    targets = {1} | {n.id for n in nodes if n.kind is NodeKind.FACE_POINT}
    best = _better(dijkstra(g, 0, targets), coarse)
    return _finish(best, bounds, "wvd", cfg, scene, counter, t0, g.n_nodes, g.n_edges)


def solve_cone(s: Point3, face_ref: FaceRef, scene: Scene, cfg: SolveConfig) -> SolveOutcome:
    """Cone-graph algorithm: uniform edge subdivision inside the ball of
    radius 2D around h, silhouette tangent points (set one), perpendicular
    face projections (set two, one edge each, no cones), cone-restricted
    linking elsewhere."""
    counter = VisibilityCounter()
    t0 = time.perf_counter()
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = compute_anchor(s, face_tri)
    direct = _direct_or_none(s, h, scene, counter)
    if direct is not None:
        return _trivial_outcome(s, h, direct, "cone", cfg, scene, counter, t0)

    bounds, coarse = bootstrap_bounds(s, face_tri, scene, cfg, counter)
    eps_p = 4.0 * cfg.epsilon / 5.0
    spacing = (cfg.epsilon1 if cfg.epsilon1 is not None else
               eps_p / (4.0 * CONE_SPACING_CONTACTS)) * bounds.B
    threshold = (1.0 + cfg.epsilon) * bounds.D + _face_diameter(face_tri) + 8 * scene.tol.abs

    edge_nodes: list[SteinerNode] = []
    for edge in scene.edges:
        pts = uniform_edge_points(edge, spacing, h, 2.0 * bounds.D)
        betas = {round(p.beta, 12) for p in pts}
        for beta, point in tangent_projection_points(edge, face_tri, scene, scene.tol):
            if round(beta, 12) not in betas:
                pts.append(SteinerNode(-1, NodeKind.EDGE_POINT, point,
                                       edge_id=edge.id, beta=beta))
        pts.sort(key=lambda n: n.beta)
        edge_nodes.extend(pts)
    edge_nodes = _prune(edge_nodes, s, h, threshold)

    nodes = _assemble(s, h, edge_nodes)
    cone_ids = {0} | {n.id for n in nodes if n.kind is NodeKind.EDGE_POINT}

    # Set two: perpendicular drops onto the face, one edge per drop.
    drops = projection_steiner_points([n for n in nodes if n.kind is NodeKind.EDGE_POINT],
                                      face_tri, scene, scene.tol, counter)
    extra_edges: list[tuple[int, int, float]] = []
    for vid, proj, weight in drops:
        node = SteinerNode(len(nodes), NodeKind.FACE_POINT, proj)
        nodes.append(node)
        extra_edges.append((vid, node.id, weight))

    # Anchor carries plain visibility edges to every node that sees it.
    others = [n for n in nodes if n.id != 1]
    opos = np.stack([n.position for n in others])
    hvis = pairs_visible_bulk(np.broadcast_to(h, opos.shape), opos, scene,
                              scene.tol, counter)
    for n, ok in zip(others, hvis):
        if ok:
            extra_edges.append((1, n.id, norm(n.position - h)))

    cones = build_cone_set(cfg.epsilon, theta=cfg.cone_theta)
    g = build_cone_graph(nodes, cones, scene, scene.tol, counter,
                         cone_node_ids=cone_ids, extra_edges=extra_edges)

    targets = {1} | {n.id for n in nodes if n.kind is NodeKind.FACE_POINT}
    for n in nodes:
        if n.kind is NodeKind.EDGE_POINT and \
                norm(n.position - closest_point_on_triangle(n.position, face_tri)) <= scene.tol.abs:
            targets.add(n.id)
    best = _better(dijkstra(g, 0, targets), coarse)
    return _finish(best, bounds, "cone", cfg, scene, counter, t0, g.n_nodes, g.n_edges)


_SOLVERS = {"grid_vg": solve_grid_vg, "wvd": solve_wvd, "cone": solve_cone}


def solve(s: Point3, face_ref: FaceRef, scene: Scene, cfg: SolveConfig) -> SolveOutcome:
    return _SOLVERS[cfg.algorithm](s, face_ref, scene, cfg)
