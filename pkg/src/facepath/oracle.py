"""Independent reference solvers for testing and acceptance.

Nothing here touches the solver's Steiner/cone/graph machinery: subdivision,
face sampling, visibility batching (a barycentric formulation rather than
the edge-function one) and the search loop are all local to this module, so
oracle results and solver results only share the geometric primitives.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import Blocked, Infeasible, NoFeasibleSequence, Unreachable
from .geom import (
    Point3,
    Segment3,
    Triangle3,
    closest_point_on_triangle,
    norm,
    segment_triangle_blocked,
)
from .scene import Edge, FaceRef, Scene


@dataclass
class OracleEstimate:
    length: float
    kind: str                  # "exact" or "upper_bound"
    waypoints: list
    eps_oracle: float | None = None

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "kind": self.kind,
            "eps_oracle": self.eps_oracle,
            "waypoints": [[float(c) for c in p] for p in self.waypoints],
        }


def link_visible(p: Point3, q: Point3, scene: Scene) -> bool:
    seg = Segment3(np.asarray(p, float), np.asarray(q, float))
    return not any(segment_triangle_blocked(seg, tri, scene.tol)
                   for tri in scene.triangles)


def witness_feasible(waypoints, scene: Scene) -> bool:
    return all(link_visible(a, b, scene)
               for a, b in zip(waypoints[:-1], waypoints[1:]))


# -- closed-form oracle -------------------------------------------------------

def oracle_unobstructed(s: Point3, face_ref: FaceRef, scene: Scene) -> OracleEstimate:
    """Exact answer when the straight segment to the anchor is free."""
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = closest_point_on_triangle(s, face_tri)
    if norm(s - h) > scene.tol.abs and not link_visible(s, h, scene):
        raise Blocked("segment from source to anchor is blocked")
    return OracleEstimate(length=norm(s - h), kind="exact", waypoints=[s, h])


# -- unfolding oracle ---------------------------------------------------------

def _line_frame(edge: Edge):
    u = edge.b - edge.a
    return edge.a, u / norm(u), norm(u)


def _axial_radial(p, origin, u):
    rel = p - origin
    ax = float(rel @ u)
    rad = rel - ax * u
    return ax, norm(rad)


def _line_optimum(p: Point3, q: Point3, edge: Edge) -> tuple[float, float]:
    """Min of |p-x| + |x-q| over x on the edge's supporting line.

    Rotating p about the line into the plane through the line and q (on the
    opposite side) straightens the path; returns (length, beta), beta in
    edge parameter units and unclamped.
    """
    origin, u, length = _line_frame(edge)
    ap, rp = _axial_radial(p, origin, u)
    aq, rq = _axial_radial(q, origin, u)
    rsum = rp + rq
    dax = aq - ap
    best_len = math.hypot(dax, rsum)
    if rsum < 1e-15:
        contact_ax = 0.5 * (ap + aq)
    else:
        contact_ax = ap + dax * (rp / rsum)
    return best_len, contact_ax / length


def oracle_unfold(s: Point3, t: Point3, edge_sequence: list[Edge],
                  scene: Scene) -> OracleEstimate:
    """Locally optimal path through a given sequence of at most 3 edges.

    The total length is jointly convex in the contact points along the
    supporting lines, so alternating the single-line rotation step
    converges to the global line optimum; the result is Exact only if every
    contact falls within its edge's extent and every link is unblocked.
    """
    if not 1 <= len(edge_sequence) <= 3:
        raise ValueError("edge sequence must contain 1 to 3 edges")
    s = np.asarray(s, float)
    t = np.asarray(t, float)
    k = len(edge_sequence)
    betas = [0.5] * k
    points = [edge_sequence[i].point_at(betas[i]) for i in range(k)]
    prev_len = math.inf
    for _ in range(500):
        for i in range(k):
            left = s if i == 0 else points[i - 1]
            right = t if i == k - 1 else points[i + 1]
            _, beta = _line_optimum(left, right, edge_sequence[i])
            betas[i] = beta
            points[i] = edge_sequence[i].point_at(beta)
        chain = [s] + points + [t]
        cur = sum(norm(b - a) for a, b in zip(chain[:-1], chain[1:]))
        if prev_len - cur < 1e-14 * max(1.0, cur):
            break
        prev_len = cur

    slack = 1e-9
    for beta in betas:
        if not (-slack <= beta <= 1.0 + slack):
            raise Infeasible(f"contact parameter {beta:.6f} outside edge extent")
    chain = [s] + points + [t]
    if not witness_feasible(chain, scene):
        raise Infeasible("unfolded path crosses an obstacle")
    length = sum(norm(b - a) for a, b in zip(chain[:-1], chain[1:]))
    return OracleEstimate(length=length, kind="exact", waypoints=chain)


# -- independent bulk visibility (barycentric form) ---------------------------

def _blocked_matrix(pos: np.ndarray, scene: Scene, tol_abs: float) -> np.ndarray:
    """All-pairs blocking among nodes, one triangle at a time.

    Interior margins are expressed through barycentric coordinates scaled by
    the opposite-vertex heights, which equals the distance-to-edge-line
    margin used elsewhere but arrives at it along a different route.
    """
    m = len(pos)
    iu, ju = np.triu_indices(m, k=1)
    P = pos[iu]
    Q = pos[ju]
    blocked = np.zeros(len(iu), dtype=bool)
    for tri in scene.triangles:
        v0, v1, v2 = tri.vertices
        e1 = v1 - v0
        e2 = v2 - v0
        n = tri.normal
        area2 = 2.0 * tri.area
        h_v2 = area2 / norm(e1)                      # height of v2 over edge v0v1
        h_v1 = area2 / norm(v2 - v0)                 # height of v1 over edge v0v2
        h_v0 = area2 / norm(v2 - v1)                 # height of v0 over edge v1v2
        sa = (P - v0) @ n
        sb = (Q - v0) @ n
        cross_mask = (np.abs(sa) > tol_abs) & (np.abs(sb) > tol_abs) & (sa * sb < 0.0)
        if not cross_mask.any():
            continue
        idx = np.nonzero(cross_mask)[0]
        tt = sa[idx] / (sa[idx] - sb[idx])
        x = P[idx] + tt[:, None] * (Q[idx] - P[idx])
        rel = x - v0
        b2 = np.cross(e1, rel) @ n / area2           # barycentric of v2
        b1 = np.cross(rel, e2) @ n / area2           # barycentric of v1
        b0 = 1.0 - b1 - b2
        inside = ((b2 * h_v2 > tol_abs) & (b1 * h_v1 > tol_abs)
                  & (b0 * h_v0 > tol_abs))
        blocked[idx] |= inside
    out = np.zeros((m, m), dtype=bool)
    out[iu, ju] = blocked
    out |= out.T
    return out


def _dijkstra_dense(pos: np.ndarray, visible: np.ndarray, source: int,
                    targets: set[int]):
    m = len(pos)
    dist = np.full(m, np.inf)
    pred = np.full(m, -1, dtype=int)
    done = np.zeros(m, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d_u, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u in targets:
            chain = [u]
            while chain[-1] != source:
                chain.append(int(pred[chain[-1]]))
            chain.reverse()
            return float(d_u), chain
        nbrs = np.nonzero(visible[u])[0]
        if len(nbrs) == 0:
            continue
        diff = pos[nbrs] - pos[u]
        nd = d_u + np.sqrt(np.einsum("ij,ij->i", diff, diff))
        improved = nd < dist[nbrs]
        for v, d_v in zip(nbrs[improved], nd[improved]):
            if not done[v]:
                dist[v] = d_v
                pred[v] = u
                heapq.heappush(heap, (float(d_v), int(v)))
    raise Unreachable("oracle: no target reachable")


def _subdivide_uniform(edge: Edge, pitch: float, center=None, radius=None):
    lo, hi = 0.0, 1.0
    if center is not None:
        ab = edge.b - edge.a
        ac = edge.a - center
        qa = float(ab @ ab)
        qb = 2.0 * float(ac @ ab)
        qc = float(ac @ ac) - radius * radius
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        lo = max(0.0, (-qb - sq) / (2 * qa))
        hi = min(1.0, (-qb + sq) / (2 * qa))
        if lo > hi:
            return []
    length = edge.length() * (hi - lo)
    k = max(1, int(math.ceil(length / pitch)))
    return [edge.point_at(lo + (hi - lo) * i / k) for i in range(k + 1)]


def _face_samples(face_tri: Triangle3, pitch: float) -> list:
    """Lattice over the face's own frame plus its vertices."""
    v0, v1, v2 = face_tri.vertices
    u = (v1 - v0) / norm(v1 - v0)
    w = np.cross(face_tri.normal, u)
    pts = [v0.copy(), v1.copy(), v2.copy()]
    coords = np.stack([(v - v0) for v in (v0, v1, v2)])
    us = coords @ u
    ws = coords @ w
    for ku in range(int(math.floor(us.min() / pitch)), int(math.ceil(us.max() / pitch)) + 1):
        for kw in range(int(math.floor(ws.min() / pitch)), int(math.ceil(ws.max() / pitch)) + 1):
            p = v0 + ku * pitch * u + kw * pitch * w
            rel = p - v0
            b2 = float(np.cross(v1 - v0, rel) @ face_tri.normal) / (2 * face_tri.area)
            b1 = float(np.cross(rel, v2 - v0) @ face_tri.normal) / (2 * face_tri.area)
            b0 = 1.0 - b1 - b2
            if min(b0, b1, b2) >= 0.0:
                pts.append(p)
    return pts


def oracle_fine(s: Point3, face_ref: FaceRef, scene: Scene, eps_o: float) -> OracleEstimate:
    """Brute-force upper bound: uniform subdivision at pitch eps_o * B on
    edges inside the working ball, a uniform face lattice at the same pitch,
    complete visibility, Dijkstra. Yields L* <= L <= (1 + c*eps_o) L* with
    c bounded by the contact count of the optimum."""
    if eps_o <= 0:
        raise ValueError("eps_o must be positive")
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = closest_point_on_triangle(s, face_tri)
    sh = norm(s - h)
    if sh <= scene.tol.abs or link_visible(s, h, scene):
        return OracleEstimate(length=sh, kind="upper_bound", waypoints=[s, h],
                              eps_oracle=eps_o)

    # Coarse bound to h with a scene-scaled pitch.
    coarse_pts = [s, h]
    for edge in scene.edges:
        coarse_pts.extend(_subdivide_uniform(edge, scene.diameter / 12.0))
    pos = np.stack(coarse_pts)
    visible = ~_blocked_matrix(pos, scene, scene.tol.abs)
    d0, chain0 = _dijkstra_dense(pos, visible, 0, {1})
    coarse_waypoints = [pos[i] for i in chain0]

    B = max(sh, d0 / 3.0)
    pitch = eps_o * B
    face_diam = max(norm(a - b) for a in face_tri.vertices for b in face_tri.vertices)
    threshold = (1.0 + 5.0 * eps_o) * d0 + face_diam + 8 * scene.tol.abs

    pts = [s, h]
    n_fixed = 2
    samples = [p for p in _face_samples(face_tri, pitch)
               if norm(p - h) > scene.tol.abs]
    pts.extend(samples)
    target_count = len(pts)
    for edge in scene.edges:
        for p in _subdivide_uniform(edge, pitch, center=h, radius=2.0 * d0):
            if norm(p - s) + norm(p - h) <= threshold:
                pts.append(p)
    pos = np.stack(pts)
    visible = ~_blocked_matrix(pos, scene, scene.tol.abs)
    targets = set(range(1, target_count))
    # Edge points landing on the face are terminals too.
    for i in range(target_count, len(pts)):
        if norm(pos[i] - closest_point_on_triangle(pos[i], face_tri)) <= scene.tol.abs:
            targets.add(i)
    try:
        d, chain = _dijkstra_dense(pos, visible, 0, targets)

    except Unreachable:
        d, chain = math.inf, None
    if chain is None or d0 < d:
        waypoints = coarse_waypoints
        d = d0
    else:
        waypoints = [pos[i] for i in chain]
    assert witness_feasible(waypoints, scene)
    return OracleEstimate(length=float(d), kind="upper_bound",
                          waypoints=waypoints, eps_oracle=eps_o)


# -- exhaustive short-sequence oracle -----------------------------------------

def _closest_on_tri_batch(points: np.ndarray, tri: Triangle3) -> np.ndarray:
    """Vectorized closest point on a fixed triangle (Ericson regions)."""
    a, b, c = tri.v0, tri.v1, tri.v2
    ab = b - a
    ac = c - a
    out = np.empty_like(points)
    ap = points - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = points - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = points - c
    d5 = cp @ ab
    d6 = cp @ ac
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    done = np.zeros(len(points), dtype=bool)

    def assign(mask, value):
        m = mask & ~done
        out[m] = value[m] if value.ndim == 2 else value
        done[m] = True

    assign((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, points.shape))
    assign((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, points.shape))
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v_ab[:, None] * ab)
    assign((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, points.shape))
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w_ac[:, None] * ac)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = np.where((d4 - d3) + (d5 - d6) != 0,
                        (d4 - d3) / ((d4 - d3) + (d5 - d6)), 0.0)
    assign((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + w_bc[:, None] * (c - b))
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)
    assign(~done, a + v[:, None] * ab + w[:, None] * ac)
    return out


def _golden(f, lo, hi, xatol):
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol})
    return float(res.x), float(res.fun)


def oracle_exhaustive_sequences(s: Point3, face_ref: FaceRef, scene: Scene,
                                max_seq_len: int = 2) -> OracleEstimate:
    """Exact minimum over paths with at most max_seq_len edge contacts.

    Enumerates the direct candidate, every single-edge contact (terminal
    chosen as the closest face point) and every ordered edge pair (64x64
    grid seed, then alternating refinement). Only meaningful on small
    scenes whose optimum uses few contacts.
    """
    if max_seq_len not in (1, 2):
        raise ValueError("max_seq_len must be 1 or 2")
    if scene.n_edges > 40:
        raise ValueError("exhaustive oracle is limited to scenes with <= 40 edges")
    s = np.asarray(s, float)
    face_tri, _ = scene.resolve_face(face_ref)
    h = closest_point_on_triangle(s, face_tri)

    best: tuple[float, list] | None = None

    def consider(length, waypoints):
        nonlocal best
        if witness_feasible(waypoints, scene):
            if best is None or length < best[0]:
                best = (length, waypoints)

    consider(norm(s - h), [s, h])

    xatol = 1e-10
    for edge in scene.edges:
        def g(beta, e=edge):
            x = e.point_at(float(np.clip(beta, 0.0, 1.0)))
            return norm(s - x) + norm(x - closest_point_on_triangle(x, face_tri))

        grid = np.linspace(0.0, 1.0, 65)
        vals = [g(b) for b in grid]
        for i in np.argsort(vals)[:3]:
            lo = grid[max(0, i - 1)]
            hi = grid[min(64, i + 1)]
            beta, val = _golden(g, lo, hi, xatol)
            x = edge.point_at(beta)
            t = closest_point_on_triangle(x, face_tri)
            consider(val, [s, x, t])

    if max_seq_len >= 2:
        grid = np.linspace(0.0, 1.0, 64)
        for e1 in scene.edges:
            x1g = np.stack([e1.point_at(b) for b in grid])
            d_s1 = np.sqrt(((x1g - s) ** 2).sum(axis=1))
            for e2 in scene.edges:
                if e2.id == e1.id:
                    continue
                x2g = np.stack([e2.point_at(b) for b in grid])
                t2 = _closest_on_tri_batch(x2g, face_tri)
                d_2f = np.sqrt(((x2g - t2) ** 2).sum(axis=1))
                d_12 = np.sqrt(((x1g[:, None, :] - x2g[None, :, :]) ** 2).sum(axis=2))
                total = d_s1[:, None] + d_12 + d_2f[None, :]
                i, j = np.unravel_index(np.argmin(total), total.shape)
                b1, b2 = float(grid[i]), float(grid[j])
                for _ in range(40):
                    x2 = e2.point_at(b2)
                    _, b1_new = _line_optimum(s, x2, e1)
                    b1 = float(np.clip(b1_new, 0.0, 1.0))
                    x1 = e1.point_at(b1)

                    def g2(beta, e=e2, x1=x1):
                        x = e.point_at(float(beta))
                        return norm(x1 - x) + norm(
                            x - closest_point_on_triangle(x, face_tri))

                    b2_new, _ = _golden(g2, 0.0, 1.0, xatol)
                    if abs(b2_new - b2) < 1e-12 and abs(b1_new - b1) < 1e-12:
                        b2 = b2_new
                        break
                    b2 = b2_new
                x1 = e1.point_at(b1)
                x2 = e2.point_at(b2)
                t = closest_point_on_triangle(x2, face_tri)
                length = norm(s - x1) + norm(x1 - x2) + norm(x2 - t)
                consider(length, [s, x1, x2, t])

    if best is None:
        raise NoFeasibleSequence("no feasible candidate with the allowed contacts")
    return OracleEstimate(length=best[0], kind="exact", waypoints=best[1])
