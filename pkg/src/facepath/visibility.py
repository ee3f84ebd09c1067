"""Visibility queries against a scene.

Three layers:

* scalar point-pair visibility (`points_visible`): one segment against all
  scene triangles,
* a chunked, vectorized kernel (`pairs_visible_bulk`) used by the graph
  builders, with semantics identical to the scalar predicate,
* the perpendicular-projection partition of an obstacle edge relative to a
  target face, which classifies where the straight drop from the edge to
  the face's plane is occluded. Its interval boundaries are exactly the
  points where the drop grazes an occluder silhouette, which is how
  tangent points are discovered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import (
    Point3,
    PointClass,
    Segment3,
    TolerancePolicy,
    Triangle3,
    point_in_triangle_2d,
    segment_triangle_blocked,
)
from .scene import Edge, Scene


class VisibilityCounter:
    """Mutable counter threaded through graph builds for reporting."""

    __slots__ = ("pair_tests",)

    def __init__(self):
        self.pair_tests = 0


def segment_blocked_any(a: Point3, b: Point3, scene: Scene, tol: TolerancePolicy) -> bool:
    """One segment against every scene triangle, vectorized over triangles."""
    n = scene.tri_normals
    sa = n @ a - scene.tri_d
    sb = n @ b - scene.tri_d
    crossing = (np.abs(sa) > tol.abs) & (np.abs(sb) > tol.abs) & (sa * sb < 0.0)
    if not crossing.any():
        return False
    idx = np.nonzero(crossing)[0]
    t = sa[idx] / (sa[idx] - sb[idx])
    x = a[None, :] + t[:, None] * (b - a)[None, :]
    en = scene.tri_edge_normals[idx]          # (k,3,3)
    eo = scene.tri_edge_offsets[idx]          # (k,3)
    inward = np.einsum("kij,kj->ki", en, x) - eo
    return bool(np.any(np.all(inward > tol.abs, axis=1)))


def points_visible(p: Point3, q: Point3, scene: Scene, tol: TolerancePolicy | None = None,
                   counter: VisibilityCounter | None = None) -> bool:
    """True iff the open segment pq is not blocked by any scene triangle."""
    tol = tol or scene.tol
    if counter is not None:
        counter.pair_tests += 1
    return not segment_blocked_any(np.asarray(p, float), np.asarray(q, float), scene, tol)


def pairs_visible_bulk(P: np.ndarray, Q: np.ndarray, scene: Scene,
                       tol: TolerancePolicy | None = None,
                       counter: VisibilityCounter | None = None) -> np.ndarray:
    """Visibility of M segments P[i]-Q[i] at once. Returns bool (M,).

    Chunked so peak memory stays bounded; all per-triangle quantities are
    evaluated with matrix products to keep the inner loop in BLAS.
    """
    tol = tol or scene.tol
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    m_total = P.shape[0]
    if counter is not None:
        counter.pair_tests += m_total
    T = scene.n_triangles
    out = np.empty(m_total, dtype=bool)
    chunk = max(1, 2_000_000 // max(T, 1))
    N = scene.tri_normals.T                         # (3,T)
    d = scene.tri_d
    EN = [scene.tri_edge_normals[:, i, :].T for i in range(3)]   # each (3,T)
    EO = [scene.tri_edge_offsets[:, i] for i in range(3)]
    for lo in range(0, m_total, chunk):
        hi = min(lo + chunk, m_total)
        A = P[lo:hi]
        B = Q[lo:hi]
        sa = A @ N - d                               # (m,T)
        sb = B @ N - d
        crossing = (np.abs(sa) > tol.abs) & (np.abs(sb) > tol.abs) & (sa * sb < 0.0)
        denom = sa - sb
        t = np.divide(sa, denom, out=np.zeros_like(sa), where=crossing)
        blocked = crossing
        D = B - A
        for i in range(3):
            val = (A @ EN[i] - EO[i]) + t * (D @ EN[i])
            blocked = blocked & (val > tol.abs)
            if not blocked.any():
                break
        out[lo:hi] = ~blocked.any(axis=1)
    return out


# -- perpendicular-projection partition -------------------------------------

@dataclass(frozen=True)
class EdgeInterval:
    """One piece of an edge's parameter range with uniform drop visibility.

    ``visible`` refers to the perpendicular segment from the edge point to
    its projection on the face's plane; ``in_face`` records whether that
    projection lands inside the closed target triangle. Blocker obstacle
    indices at the interval's two ends are kept for the tangency rule.
    """

    edge_id: int
    beta_lo: float
    beta_hi: float
    visible: bool
    in_face: bool
    blocker_at_lo: int | None = None
    blocker_at_hi: int | None = None


def _affine_ge(a: float, b: float, lo: float, hi: float) -> tuple[float, float]:
    """Solve a + b*beta >= 0 intersected with [lo, hi]; empty -> lo > hi."""
    if abs(b) < 1e-300:
        return (lo, hi) if a >= 0.0 else (1.0, 0.0)
    root = -a / b
    if b > 0:
        return (max(lo, root), hi)
    return (lo, min(hi, root))


def _blocked_intervals_for_triangle(edge: Edge, face_n: np.ndarray, face_d: float,
                                    tri: Triangle3, tol_abs: float):
    """Beta ranges of `edge` whose perpendicular drop is blocked by `tri`.

    All predicate quantities are affine in beta, so each sign branch of the
    crossing test reduces to intersecting a handful of half-lines.
    """
    a = edge.a
    ab = edge.b - edge.a
    c = float(tri.normal @ face_n)
    if abs(c) < 1e-15:
        return []  # triangle plane parallel to the drop direction: never crosses

    # sa(beta): edge point vs tri plane; sb(beta): its projection vs tri plane.
    sa0 = float(tri.normal @ a - tri.d)
    dsa = float(tri.normal @ ab)
    eta0 = float(face_n @ a - face_d)
    deta = float(face_n @ ab)
    sb0 = sa0 - eta0 * c
    dsb = dsa - deta * c

    # Crossing point y(beta) = x(beta) - (sa(beta)/c) * face_n, affine in beta.
    y0 = a - (sa0 / c) * face_n
    dy = ab - (dsa / c) * face_n

    out = []
    for sign in (1.0, -1.0):
        # branch: sign*sa > tol and sign*sb < -tol
        lo, hi = _affine_ge(sign * sa0 - tol_abs, sign * dsa, 0.0, 1.0)
        if lo > hi:
            continue
        lo2, hi2 = _affine_ge(-sign * sb0 - tol_abs, -sign * dsb, lo, hi)
        if lo2 > hi2:
            continue
        lo, hi = lo2, hi2
        ok = True
        for i in range(3):
            m = tri.edge_normals[i]
            g0 = float(m @ y0 - tri.edge_offsets[i]) - tol_abs
            dg = float(m @ dy)
            lo, hi = _affine_ge(g0, dg, lo, hi)
            if lo > hi:
                ok = False
                break
        if ok and hi - lo > 1e-15:
            out.append((lo, hi))
    return out


def _face_membership_interval(edge: Edge, face_tri: Triangle3) -> tuple[float, float]:
    """Beta range whose projection lies inside the closed face triangle."""
    n = face_tri.normal
    a_proj = edge.a - float(n @ edge.a - face_tri.d) * n
    ab = edge.b - edge.a
    ab_proj = ab - float(n @ ab) * n
    lo, hi = 0.0, 1.0
    for i in range(3):
        m = face_tri.edge_normals[i]
        g0 = float(m @ a_proj - face_tri.edge_offsets[i])
        dg = float(m @ ab_proj)
        lo, hi = _affine_ge(g0, dg, lo, hi)
        if lo > hi:
            return (1.0, 0.0)
    return (lo, hi)


def perpendicular_visibility_partition(edge: Edge, face_tri: Triangle3, scene: Scene,
                                       tol: TolerancePolicy | None = None) -> list[EdgeInterval]:
    """Partition [0,1] by visibility of the drop from the edge to the face plane."""
    tol = tol or scene.tol
    face_n = face_tri.normal
    face_d = face_tri.d

    blocked: list[tuple[float, float, int]] = []  # (lo, hi, obstacle_index)
    for ti, tri in enumerate(scene.triangles):
        oi = scene.triangle_owner[ti][0]
        for lo, hi in _blocked_intervals_for_triangle(edge, face_n, face_d, tri, tol.abs):
            blocked.append((lo, hi, oi))
    blocked.sort(key=lambda iv: (iv[0], iv[1]))

    # Merge into disjoint blocked regions, remembering which obstacle's
    # silhouette forms each region end.
    regions: list[tuple[float, float, int, int]] = []
    for lo, hi, oi in blocked:
        if regions and lo <= regions[-1][1] + 1e-12:
            plo, phi, o_lo, o_hi = regions[-1]
            if hi > phi:
                regions[-1] = (plo, max(phi, hi), o_lo, oi)
        else:
            regions.append((lo, hi, oi, oi))

    fm_lo, fm_hi = _face_membership_interval(edge, face_tri)

    # Collect breakpoints, build alternating intervals.
    cuts = {0.0, 1.0}
    for lo, hi, _, _ in regions:
        cuts.add(lo)
        cuts.add(hi)
    if fm_lo <= fm_hi:
        cuts.add(max(0.0, fm_lo))
        cuts.add(min(1.0, fm_hi))
    bounds = sorted(b for b in cuts if 0.0 <= b <= 1.0)

    def region_at(beta: float):
        for lo, hi, o_lo, o_hi in regions:
            if lo <= beta <= hi:
                return (lo, hi, o_lo, o_hi)
        return None

    intervals: list[EdgeInterval] = []
    for blo, bhi in zip(bounds[:-1], bounds[1:]):
        if bhi - blo <= 1e-15:
            continue
        mid = 0.5 * (blo + bhi)
        reg = region_at(mid)
        in_face = fm_lo - 1e-12 <= mid <= fm_hi + 1e-12 if fm_lo <= fm_hi else False
        if reg is None:
            intervals.append(EdgeInterval(edge.id, blo, bhi, True, in_face))
        else:
            intervals.append(EdgeInterval(edge.id, blo, bhi, False, in_face,
                                          blocker_at_lo=reg[2], blocker_at_hi=reg[3]))
    if not intervals:
        intervals.append(EdgeInterval(edge.id, 0.0, 1.0, True,
                                      fm_lo <= 0.5 <= fm_hi))
    return intervals


def tangent_projection_points(edge: Edge, face_tri: Triangle3, scene: Scene,
                              tol: TolerancePolicy | None = None) -> list[tuple[float, Point3]]:
    """Visibility switch points on the edge whose projections are interior to f.

    These are the points where the perpendicular drop grazes an occluder
    silhouette; the occluder must belong to a different obstacle than the
    edge itself. Returns (beta, position) pairs.
    """
    tol = tol or scene.tol
    intervals = perpendicular_visibility_partition(edge, face_tri, scene, tol)
    out: list[tuple[float, Point3]] = []
    seen: set[float] = set()
    for prev, cur in zip(intervals[:-1], intervals[1:]):
        if prev.visible == cur.visible:
            continue
        beta = prev.beta_hi
        if beta <= 1e-12 or beta >= 1.0 - 1e-12:
            continue
        blocker = cur.blocker_at_lo if not cur.visible else prev.blocker_at_hi
        if blocker is None or blocker == edge.obstacle_index:
            continue
        # The visible side must project into the face interior.
        vis_side = prev if prev.visible else cur
        if not vis_side.in_face:
            continue
        u = edge.point_at(beta)
        n = face_tri.normal
        u_proj = u - float(n @ u - face_tri.d) * n
        try:
            if point_in_triangle_2d(u_proj, face_tri, tol) is not PointClass.INTERIOR:
                continue
        except Exception:
            continue
        if not points_visible(u, u_proj, scene, tol):
            continue
        key = round(beta, 12)
        if key in seen:
            continue
        seen.add(key)
        out.append((beta, u))
    return out


def path_feasible(waypoints: list[Point3], scene: Scene,
                  tol: TolerancePolicy | None = None) -> bool:
    """Re-verify every consecutive waypoint pair against the full scene."""
    tol = tol or scene.tol
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        if not points_visible(a, b, scene, tol):
            return False
    return True


def segment_triangle_blocked_ref(seg: Segment3, tri: Triangle3,
                                 tol: TolerancePolicy) -> bool:
    """Scalar reference predicate re-exported for cross-validation in tests."""
    return segment_triangle_blocked(seg, tri, tol)
