"""3D primitives and tolerance-aware predicates.

Everything downstream (visibility, Steiner placement, the solvers and the
oracles) is built on the handful of operations in this module, so the
tolerance semantics are frozen here:

* coordinates are float64; a hybrid tolerance ``abs = rel * scene_diameter``
  replaces exact arithmetic,
* grazing contact with a triangle (touching its boundary, or lying within
  tolerance of its plane without crossing) never blocks,
* segment endpoints within tolerance of a triangle's plane are excluded
  from blocking tests, so points sitting on obstacle surfaces see outward.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, OffPlane

Point3 = np.ndarray  # shape (3,), float64
Vec3 = np.ndarray


def point(x, y, z) -> Point3:
    p = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite coordinates: {p}")
    return p


def norm(v: Vec3) -> float:
    return float(np.sqrt(v @ v))


def normalized(v: Vec3) -> Vec3:
    n = norm(v)
    if n == 0.0:
        raise DegenerateGeometry("cannot normalize zero vector")
    return v / n


@dataclass(frozen=True)
class TolerancePolicy:
    """Hybrid tolerance: ``abs`` is derived from the scene diameter."""

    rel: float = 1e-9
    abs: float = 1e-9

    def __post_init__(self):
        if self.rel <= 0 or self.abs <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def for_diameter(cls, diameter: float, rel: float = 1e-9) -> "TolerancePolicy":
        return cls(rel=rel, abs=rel * max(diameter, 1.0))

    @property
    def area(self) -> float:
        # Degeneracy threshold for triangles.
        return self.abs * self.abs


@dataclass(frozen=True)
class Segment3:
    a: Point3
    b: Point3

    def length(self) -> float:
        return norm(self.b - self.a)

    def direction(self) -> Vec3:
        d = self.b - self.a
        if norm(d) == 0.0:
            raise DegenerateGeometry("zero-length segment has no direction")
        return d / norm(d)


@dataclass(frozen=True)
class Plane3:
    """Plane {p : normal . p = d} with unit normal."""

    normal: Vec3
    d: float

    @classmethod
    def from_point_normal(cls, p: Point3, n: Vec3) -> "Plane3":
        n = normalized(n)
        return cls(normal=n, d=float(n @ p))

    def signed_distance(self, p: Point3) -> float:
        return float(self.normal @ p - self.d)


class Triangle3:
    """Non-degenerate triangle with cached derived quantities.

    Besides the supporting plane, we keep per-edge inward normals lying in
    the plane; ``inward_distances(x)`` then gives the signed distance of a
    coplanar point to each edge line (positive inside), which is the
    workhorse of the interior tests below.
    """

    __slots__ = ("v0", "v1", "v2", "normal", "d", "area",
                 "edge_normals", "edge_offsets", "aabb_min", "aabb_max")

    def __init__(self, v0: Point3, v1: Point3, v2: Point3, tol_area: float = 1e-18):
        self.v0 = np.asarray(v0, dtype=float)
        self.v1 = np.asarray(v1, dtype=float)
        self.v2 = np.asarray(v2, dtype=float)
        cross = np.cross(self.v1 - self.v0, self.v2 - self.v0)
        area2 = norm(cross)
        if area2 * 0.5 <= tol_area:
            raise DegenerateGeometry(
                f"degenerate triangle (area {area2 * 0.5:g} <= {tol_area:g})")
        self.area = 0.5 * area2
        self.normal = cross / area2
        self.d = float(self.normal @ self.v0)
        verts = (self.v0, self.v1, self.v2)
        normals = np.empty((3, 3))
        offsets = np.empty(3)
        for i in range(3):
            a, b = verts[i], verts[(i + 1) % 3]
            m = np.cross(self.normal, b - a)
            m /= norm(m)
            normals[i] = m
            offsets[i] = m @ a
        self.edge_normals = normals
        self.edge_offsets = offsets
        stacked = np.stack(verts)
        self.aabb_min = stacked.min(axis=0)
        self.aabb_max = stacked.max(axis=0)

    @property
    def vertices(self):
        return (self.v0, self.v1, self.v2)

    def plane(self) -> Plane3:
        return Plane3(normal=self.normal, d=self.d)

    def inward_distances(self, p: Point3) -> np.ndarray:
        return self.edge_normals @ p - self.edge_offsets


class PointClass(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def project_onto_plane(p: Point3, pl: Plane3) -> Point3:
    """Orthogonal projection of p onto the plane."""
    return p - pl.signed_distance(p) * pl.normal


def closest_point_on_segment(p: Point3, a: Point3, b: Point3) -> Point3:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return a.copy()
    t = float((p - a) @ ab) / denom
    return a + min(1.0, max(0.0, t)) * ab


def closest_point_on_triangle(p: Point3, tri: Triangle3) -> Point3:
    """Closest point of the closed triangle to p (Ericson's region test)."""
    a, b, c = tri.v0, tri.v1, tri.v2
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(ab @ ap)
    d2 = float(ac @ ap)
    if d1 <= 0.0 and d2 <= 0.0:
        return a.copy()

    bp = p - b
    d3 = float(ab @ bp)
    d4 = float(ac @ bp)
    if d3 >= 0.0 and d4 <= d3:
        return b.copy()

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return a + v * ab

    cp = p - c
    d5 = float(ab @ cp)
    d6 = float(ac @ cp)
    if d6 >= 0.0 and d5 <= d6:
        return c.copy()

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return a + w * ac

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return b + w * (c - b)

    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return a + ab * v + ac * w


def distance_to_triangle(p: Point3, tri: Triangle3) -> float:
    return norm(p - closest_point_on_triangle(p, tri))


def point_in_triangle_2d(p: Point3, tri: Triangle3, tol: TolerancePolicy) -> PointClass:
    """Classify a coplanar point against the triangle.

    A band of width tol.abs around the boundary maps to BOUNDARY; the point
    must lie on the triangle's plane within tol.abs or OffPlane is raised.
    """
    if abs(tri.normal @ p - tri.d) > tol.abs:
        raise OffPlane(f"point off plane by {abs(tri.normal @ p - tri.d):g}")
    verts = tri.vertices
    boundary_dist = min(
        norm(p - closest_point_on_segment(p, verts[i], verts[(i + 1) % 3]))
        for i in range(3))
    if boundary_dist <= tol.abs:
        return PointClass.BOUNDARY
    if np.all(tri.inward_distances(p) > 0.0):
        return PointClass.INTERIOR
    return PointClass.OUTSIDE


def segment_triangle_blocked(seg: Segment3, tri: Triangle3, tol: TolerancePolicy) -> bool:
    """True iff the open segment crosses the triangle strictly inside it.

    Grazing is not blocking: touching the triangle's boundary, running
    within tol.abs of its plane without crossing, and crossings within
    tol.abs of either segment endpoint all return False.
    """
    # Cheap reject: segment AABB vs triangle AABB, inflated by tol.
    lo = np.minimum(seg.a, seg.b) - tol.abs
    hi = np.maximum(seg.a, seg.b) + tol.abs
    if np.any(hi < tri.aabb_min) or np.any(lo > tri.aabb_max):
        return False

    sa = float(tri.normal @ seg.a - tri.d)
    sb = float(tri.normal @ seg.b - tri.d)
    if abs(sa) <= tol.abs or abs(sb) <= tol.abs:
        return False  # endpoint in the plane band: grazing or excluded endpoint
    if sa * sb > 0.0:
        return False  # both endpoints on the same side
    t = sa / (sa - sb)
    x = seg.a + t * (seg.b - seg.a)
    return bool(np.all(tri.inward_distances(x) > tol.abs))
