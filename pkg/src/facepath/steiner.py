"""Steiner-point placement schemes and the cone structure.

Placement functions return nodes without final ids; the solver stamps ids
when it assembles the graph node list (ties everywhere break on the lower
id, so assembly order is the determinism anchor).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateGeometry
from .geom import (
    Point3,
    PointClass,
    TolerancePolicy,
    Triangle3,
    norm,
    point_in_triangle_2d,
)
from .scene import Edge, Scene
from .visibility import VisibilityCounter, pairs_visible_bulk


class NodeKind(enum.Enum):
    SOURCE = "source"
    EDGE_POINT = "edge_point"
    FACE_POINT = "face_point"
    ANCHOR = "anchor"


@dataclass(frozen=True)
class SteinerNode:
    id: int
    kind: NodeKind
    position: Point3
    edge_id: int | None = None
    beta: float | None = None

    def with_id(self, new_id: int) -> "SteinerNode":
        return replace(self, id=new_id)


@dataclass(frozen=True)
class PathBounds:
    """Lower/upper bounds on the point-to-face shortest path length."""

    B: float
    D: float
    h: Point3

    def __post_init__(self):
        if not (0.0 < self.B <= self.D) or not math.isfinite(self.D):
            raise ValueError(f"invalid bounds B={self.B}, D={self.D}")


# -- edge subdivision --------------------------------------------------------

def papadimitriou_edge_points(edge: Edge, s: Point3, eps1: float,
                              fallback_pitch: float | None = None) -> list[SteinerNode]:
    """Geometric-progression subdivision of an edge, seen from s.

    Points sit at signed distances +-x_i from the foot of the perpendicular,
    where x_i = eps1 * a * (1 + eps1)**(i-1) and a is the distance from s to
    the edge; the foot and both edge endpoints are always included. The gap
    between consecutive points never exceeds eps1 times their distance
    from s. If s lies on the edge the progression degenerates and a uniform
    pitch (``fallback_pitch``) is used instead.
    """
    if eps1 <= 0:
        raise ValueError("eps1 must be positive")
    ab = edge.b - edge.a
    length = norm(ab)
    if length == 0.0:
        raise DegenerateGeometry("zero-length edge")
    foot_t = float((s - edge.a) @ ab) / (length * length)
    foot_t = min(1.0, max(0.0, foot_t))
    foot = edge.a + foot_t * ab
    a_dist = norm(s - foot)

    betas = {0.0, 1.0, foot_t}
    if a_dist <= 1e-12 * max(length, 1.0):
        if fallback_pitch is None or fallback_pitch <= 0:
            raise ValueError("source on edge: fallback_pitch required")
        step = fallback_pitch / length
        k = 1
        while k * step < 1.0:
            betas.add(k * step)
            k += 1
    else:
        for direction in (1.0, -1.0):
            extent = (1.0 - foot_t) * length if direction > 0 else foot_t * length
            if extent <= 0:
                continue
            x = eps1 * a_dist
            while x < extent:
                betas.add(foot_t + direction * x / length)
                x *= (1.0 + eps1)

    out = []
    for beta in sorted(betas):
        out.append(SteinerNode(id=-1, kind=NodeKind.EDGE_POINT,
                               position=edge.point_at(beta),
                               edge_id=edge.id, beta=beta))
    return out


def clip_edge_to_ball(edge: Edge, center: Point3, radius: float) -> tuple[float, float] | None:
    """Parameter range of the edge inside the closed ball, or None."""
    ab = edge.b - edge.a
    ac = edge.a - center
    qa = float(ab @ ab)
    qb = 2.0 * float(ac @ ab)
    qc = float(ac @ ac) - radius * radius
    if qa == 0.0:
        return (0.0, 1.0) if qc <= 0 else None
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    t0 = (-qb - sq) / (2.0 * qa)
    t1 = (-qb + sq) / (2.0 * qa)
    lo, hi = max(0.0, t0), min(1.0, t1)
    if lo > hi:
        return None
    return (lo, hi)


def uniform_edge_points(edge: Edge, spacing: float, center: Point3,
                        radius: float) -> list[SteinerNode]:
    """Uniform subdivision of the edge portion inside ball(center, radius).

    Steps of ``spacing`` from the clip start; the clip end is always kept,
    so every gap is at most ``spacing``.
    """
    if spacing <= 0 or radius <= 0:
        raise ValueError("spacing and radius must be positive")
    clip = clip_edge_to_ball(edge, center, radius)
    if clip is None:
        return []
    lo, hi = clip
    length = edge.length()
    step = spacing / length
    betas = [lo]
    k = 1
    while lo + k * step < hi - 1e-12:
        betas.append(lo + k * step)
        k += 1
    if hi - betas[-1] > 1e-12:
        betas.append(hi)
    return [SteinerNode(id=-1, kind=NodeKind.EDGE_POINT, position=edge.point_at(b),
                        edge_id=edge.id, beta=b) for b in betas]


# -- face grid ---------------------------------------------------------------

def face_frame(face_tri: Triangle3) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic 2D frame in the face plane: u along the first edge."""
    u = face_tri.v1 - face_tri.v0
    u = u / norm(u)
    v = np.cross(face_tri.normal, u)
    return u, v


def face_grid_points(face_tri: Triangle3, h: Point3, D: float, cell: float,
                     tol: TolerancePolicy) -> list[SteinerNode]:
    """Axis-aligned grid in the face plane, anchored at h.

    Lattice points within distance D of h that lie in the closed triangle
    are kept; h itself is always the first point.
    """
    if cell <= 0 or D <= 0:
        raise ValueError("cell and D must be positive")
    u, v = face_frame(face_tri)
    K = int(math.floor(D / cell + 1e-12))
    positions = [np.asarray(h, float)]
    seen = {tuple(np.round(h, 12))}
    for k in range(-K, K + 1):
        for l in range(-K, K + 1):
            if k == 0 and l == 0:
                continue
            if (k * k + l * l) * cell * cell > D * D + 1e-12:
                continue
            q = h + (k * cell) * u + (l * cell) * v
            cls = point_in_triangle_2d(q, face_tri, tol)
            if cls is PointClass.OUTSIDE:
                continue
            key = tuple(np.round(q, 12))
            if key in seen:
                continue
            seen.add(key)
            positions.append(q)
    return [SteinerNode(id=-1, kind=NodeKind.FACE_POINT, position=p)
            for p in positions]


# -- cone structure ----------------------------------------------------------

@dataclass(frozen=True)
class ConeSet:
    """Covering of direction space by cones of half-angle theta."""

    axes: np.ndarray = field(repr=False)  # (A, 3) unit vectors
    theta: float = 0.0

    @property
    def count(self) -> int:
        return len(self.axes)


def build_cone_set(eps: float, theta: float | None = None) -> ConeSet:
    """Latitude-band covering with half-angle theta = sqrt(eps)/2.

    Band and azimuth pitches are theta*sqrt(2) scaled by a safety factor so
    the covering survives the curvature terms dropped by the small-angle
    argument; the covering itself is what the tests verify.
    """
    if theta is None:
        if not (0.0 < eps <= 1.0):
            raise ValueError("eps must be in (0, 1]")
        theta = math.sqrt(eps) / 2.0
    if not (0.0 < theta < math.pi / 2):
        raise ValueError("theta must be in (0, pi/2)")
    pitch = theta * math.sqrt(2.0) * 0.92
    n_bands = max(1, int(math.ceil(math.pi / pitch)))
    axes = []
    for j in range(n_bands):
        psi = (j + 0.5) * math.pi / n_bands
        ring = math.sin(psi)
        n_az = max(1, int(math.ceil(2.0 * math.pi * ring / pitch)))
        for k in range(n_az):
            lam = 2.0 * math.pi * k / n_az
            axes.append((ring * math.cos(lam), ring * math.sin(lam), math.cos(psi)))
    return ConeSet(axes=np.array(axes, dtype=float), theta=theta)


def cone_neighbors(x: SteinerNode, cones: ConeSet, candidates: list[SteinerNode],
                   scene: Scene, tol: TolerancePolicy | None = None,
                   counter: VisibilityCounter | None = None) -> list[tuple[int, float]]:
    """Per cone, the closest visible candidate; ties break on lower node id.

    Visibility is evaluated lazily in distance order, one head per cone per
    round, so occluder-free scenes cost about one test per cone instead of
    one per candidate.
    """
    tol = tol or scene.tol
    if not candidates:
        return []
    pos = np.stack([c.position for c in candidates])
    ids = np.array([c.id for c in candidates])
    d = pos - np.asarray(x.position, float)
    dist = np.sqrt(np.einsum("ij,ij->i", d, d))
    valid = dist > tol.abs
    if not valid.any():
        return []
    unit = np.zeros_like(d)
    unit[valid] = d[valid] / dist[valid, None]
    cos_theta = math.cos(cones.theta)
    in_cone = (unit @ cones.axes.T) >= cos_theta - 1e-12   # (m, A)
    in_cone &= valid[:, None]

    order = np.lexsort((ids, dist))
    cone_lists = [order[in_cone[order, a]] for a in range(cones.count)]
    heads = [0] * cones.count
    chosen: dict[int, tuple[int, float]] = {}
    vis: np.ndarray = np.full(len(candidates), -1, dtype=np.int8)  # -1 unknown

    unresolved = [a for a in range(cones.count) if len(cone_lists[a])]
    while unresolved:
        batch = []
        for a in unresolved:
            lst = cone_lists[a]
            while heads[a] < len(lst) and vis[lst[heads[a]]] == 0:
                heads[a] += 1
            if heads[a] < len(lst) and vis[lst[heads[a]]] == -1:
                batch.append(lst[heads[a]])
        if batch:
            batch = np.unique(np.array(batch))
            src = np.broadcast_to(x.position, (len(batch), 3))
            res = pairs_visible_bulk(src, pos[batch], scene, tol, counter)
            vis[batch] = res.astype(np.int8)
        still = []
        for a in unresolved:
            lst = cone_lists[a]
            while heads[a] < len(lst) and vis[lst[heads[a]]] == 0:
                heads[a] += 1
            if heads[a] >= len(lst):
                continue
            ci = lst[heads[a]]
            if vis[ci] == 1:
                chosen[a] = (int(ids[ci]), float(dist[ci]))
            else:
                still.append(a)
        unresolved = still

    # Deduplicate: several cones may select the same neighbor.
    uniq: dict[int, float] = {}
    for nid, w in chosen.values():
        uniq.setdefault(nid, w)
    return sorted(uniq.items())


def projection_steiner_points(edge_nodes: list[SteinerNode], face_tri: Triangle3,
                              scene: Scene, tol: TolerancePolicy | None = None,
                              counter: VisibilityCounter | None = None
                              ) -> list[tuple[int, Point3, float]]:
    """Perpendicular drops from edge nodes onto the face.

    For each node v whose projection v' is strictly inside f and visible
    from v, emits (v.id, v', |vv'|); v' enters the graph with exactly that
    one edge and no cone structure.
    """
    tol = tol or scene.tol
    if not edge_nodes:
        return []
    n = face_tri.normal
    pos = np.stack([v.position for v in edge_nodes])
    eta = pos @ n - face_tri.d
    proj = pos - eta[:, None] * n

    inward = np.einsum("ij,kj->ki", face_tri.edge_normals, proj) - face_tri.edge_offsets
    interior = np.all(inward > tol.abs, axis=1)
    heights = np.abs(eta)
    interior &= heights > tol.abs
    idx = np.nonzero(interior)[0]
    if len(idx) == 0:
        return []
    visible = pairs_visible_bulk(pos[idx], proj[idx], scene, tol, counter)
    out = []
    for i, ok in zip(idx, visible):
        if ok:
            out.append((edge_nodes[i].id, proj[i], float(heights[i])))
    return out
