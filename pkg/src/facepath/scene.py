"""Obstacle-set data model, scene-file parsing and derived indices.

Scene files are UTF-8 JSON::

    { "obstacles": [ { "vertices": [[x,y,z], ...],
                       "triangles": [[i,j,k], ...] }, ... ] }

Obstacles are triangle soups for visibility purposes; point-in-solid
validation of the query source is only attempted for obstacles whose mesh
is closed (every edge shared by exactly two triangles).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .errors import BadFaceRef, ParseError, SourceInsideObstacle, ValidationError
from .geom import (
    DegenerateGeometry,
    Plane3,
    Point3,
    Triangle3,
    TolerancePolicy,
    distance_to_triangle,
    norm,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FaceRef:
    obstacle_index: int
    triangle_index: int

    @classmethod
    def parse(cls, text: str) -> "FaceRef":
        """Parse the CLI form ``OBSTACLE:TRIANGLE`` (zero-based)."""
        parts = text.split(":")
        if len(parts) != 2:
            raise BadFaceRef(f"face reference must look like 'O:T', got {text!r}")
        try:
            o, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise BadFaceRef(f"face reference must be two integers, got {text!r}") from None
        return cls(o, t)

    def __str__(self):
        return f"{self.obstacle_index}:{self.triangle_index}"


@dataclass(frozen=True)
class Obstacle:
    vertices: np.ndarray   # (V, 3)
    triangles: np.ndarray  # (T, 3) int indices


@dataclass(frozen=True)
class Edge:
    """Unique undirected obstacle edge; x(beta) = a + beta * (b - a)."""

    id: int
    obstacle_index: int
    a: Point3
    b: Point3

    def point_at(self, beta: float) -> Point3:
        return self.a + beta * (self.b - self.a)

    def length(self) -> float:
        return norm(self.b - self.a)


class Scene:
    """Immutable obstacle set with deduplicated edge list and flat triangle arrays.

    The flat arrays (``tri_vertices``, ``tri_normals``, ...) back the
    vectorized visibility kernel; ``triangles`` holds the Triangle3 views
    used by scalar predicates.
    """

    def __init__(self, obstacles: list[Obstacle], tol_rel: float = 1e-9):
        if not obstacles:
            raise ValidationError("scene must contain at least one obstacle")
        self.obstacles = obstacles

        all_vertices = np.concatenate([o.vertices for o in obstacles])
        self.bbox_min = all_vertices.min(axis=0)
        self.bbox_max = all_vertices.max(axis=0)
        self.diameter = float(norm(self.bbox_max - self.bbox_min))
        self.tol = TolerancePolicy.for_diameter(self.diameter, rel=tol_rel)

        triangles: list[Triangle3] = []
        owners: list[tuple[int, int]] = []
        edges: list[Edge] = []
        edge_tri_count: list[dict] = []
        for oi, obs in enumerate(obstacles):
            nv = len(obs.vertices)
            seen: dict[tuple[int, int], int] = {}
            counts: dict[tuple[int, int], int] = {}
            for ti, (i, j, k) in enumerate(obs.triangles):
                if not (0 <= i < nv and 0 <= j < nv and 0 <= k < nv):
                    raise ValidationError(
                        f"obstacle {oi} triangle {ti}: vertex index out of range")
                if len({int(i), int(j), int(k)}) != 3:
                    raise ValidationError(
                        f"obstacle {oi} triangle {ti}: repeated vertex index")
                try:
                    tri = Triangle3(obs.vertices[i], obs.vertices[j], obs.vertices[k],
                                    tol_area=self.tol.area)
                except DegenerateGeometry as exc:
                    raise ValidationError(f"obstacle {oi} triangle {ti}: {exc}") from None
                triangles.append(tri)
                owners.append((oi, ti))
                for u, v in ((i, j), (j, k), (k, i)):
                    key = (min(int(u), int(v)), max(int(u), int(v)))
                    counts[key] = counts.get(key, 0) + 1
                    if key not in seen:
                        seen[key] = len(edges)
                        edges.append(Edge(id=len(edges), obstacle_index=oi,
                                          a=obs.vertices[key[0]].astype(float),
                                          b=obs.vertices[key[1]].astype(float)))
            edge_tri_count.append(counts)

        self.triangles = triangles
        self.triangle_owner = owners
        self.edges = edges
        self.n_vertices = int(sum(len(o.vertices) for o in obstacles))
        self.n_edges = len(edges)
        self.n_triangles = len(triangles)
        # Closed iff every edge bounds exactly two triangles.
        self.obstacle_closed = [
            all(c == 2 for c in counts.values()) and len(counts) > 0
            for counts in edge_tri_count
        ]

        self.tri_vertices = np.stack([np.stack(t.vertices) for t in triangles])  # (T,3,3)
        self.tri_normals = np.stack([t.normal for t in triangles])               # (T,3)
        self.tri_d = np.array([t.d for t in triangles])                          # (T,)
        self.tri_edge_normals = np.stack([t.edge_normals for t in triangles])    # (T,3,3)
        self.tri_edge_offsets = np.stack([t.edge_offsets for t in triangles])    # (T,3)

    # -- queries ----------------------------------------------------------

    def resolve_face(self, ref: FaceRef) -> tuple[Triangle3, Plane3]:
        if not (0 <= ref.obstacle_index < len(self.obstacles)):
            raise BadFaceRef(f"obstacle index {ref.obstacle_index} out of range")
        obs = self.obstacles[ref.obstacle_index]
        if not (0 <= ref.triangle_index < len(obs.triangles)):
            raise BadFaceRef(
                f"triangle index {ref.triangle_index} out of range for obstacle "
                f"{ref.obstacle_index}")
        flat = self.flat_triangle_index(ref)
        tri = self.triangles[flat]
        return tri, tri.plane()

    def flat_triangle_index(self, ref: FaceRef) -> int:
        return self.triangle_owner.index((ref.obstacle_index, ref.triangle_index))

    def validate_source(self, s: Point3) -> None:
        """Reject sources strictly inside a closed obstacle; surfaces are fine."""
        for tri in self.triangles:
            if distance_to_triangle(s, tri) <= self.tol.abs:
                return  # on an obstacle surface: allowed
        for oi, obs in enumerate(self.obstacles):
            if not self.obstacle_closed[oi]:
                log.warning("obstacle %d is not a closed mesh; "
                            "point-in-solid check skipped", oi)
                continue
            first = self.triangle_owner.index((oi, 0))
            tris = self.triangles[first:first + len(obs.triangles)]
            if _inside_by_ray_parity(s, tris, self.tol.abs):
                raise SourceInsideObstacle(
                    f"source {s.tolist()} lies inside obstacle {oi}")

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "obstacles": [
                {
                    "vertices": [[float(c) for c in v] for v in o.vertices],
                    "triangles": [[int(i) for i in t] for t in o.triangles],
                }
                for o in self.obstacles
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def scene_from_dict(data, tol_rel: float = 1e-9) -> Scene:
    if not isinstance(data, dict) or "obstacles" not in data:
        raise ParseError("scene object must have an 'obstacles' key")
    if not isinstance(data["obstacles"], list):
        raise ParseError("'obstacles' must be a list")
    obstacles = []
    for oi, entry in enumerate(data["obstacles"]):
        if not isinstance(entry, dict) or "vertices" not in entry or "triangles" not in entry:
            raise ParseError(f"obstacle {oi} must have 'vertices' and 'triangles'")
        try:
            vertices = np.array(entry["vertices"], dtype=float)
            triangles = np.array(entry["triangles"], dtype=int)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"obstacle {oi}: {exc}") from None
        if vertices.ndim != 2 or vertices.shape[1] != 3 or vertices.shape[0] == 0:
            raise ValidationError(f"obstacle {oi}: vertices must be a non-empty Nx3 array")
        if not np.all(np.isfinite(vertices)):
            raise ValidationError(f"obstacle {oi}: non-finite vertex coordinates")
        if triangles.size == 0:
            raise ValidationError(f"obstacle {oi}: no triangles")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValidationError(f"obstacle {oi}: triangles must be an Mx3 index array")
        obstacles.append(Obstacle(vertices=vertices, triangles=triangles))
    return Scene(obstacles, tol_rel=tol_rel)


def load_scene(text, tol_rel: float = 1e-9) -> Scene:
    """Parse and validate a scene file (bytes or str)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scene file: {exc}") from None
    return scene_from_dict(data)


def load_scene_path(path) -> Scene:
    with open(path, "rb") as fh:
        return load_scene(fh.read())


# -- point-in-solid via ray-crossing parity ---------------------------------
# Orientation-independent: a generic ray from the query point crosses the
# closed surface an odd number of times iff the point is inside. Rays that
# graze an edge, vertex or coplanar triangle are discarded and the next
# fixed fallback direction is tried.

_RAY_DIRECTIONS = np.array([
    [0.577350269189626, 0.577350269189626, 0.577350269189626],
    [0.862856209461017, 0.357406744336935, -0.357406744336935],
    [-0.267261241912424, 0.534522483824849, 0.801783725737273],
    [0.456435464587638, -0.684653196881457, 0.566946709513841],
    [-0.683130051063973, -0.439154702778352, 0.583205660119725],
    [0.120385853085769, 0.963086824686155, -0.240771706171538],
])


def _ray_parity(s: Point3, tris: list[Triangle3], direction: np.ndarray,
                tol_abs: float) -> int | None:
    """Crossing count of the ray, or None if any hit is degenerate."""
    crossings = 0
    for tri in tris:
        nd = float(tri.normal @ direction)
        sa = float(tri.normal @ s - tri.d)
        if abs(nd) < 1e-12:
            if abs(sa) <= tol_abs:
                return None  # ray runs inside the triangle's plane
            continue
        t = -sa / nd
        if t <= tol_abs:
            continue
        x = s + t * direction
        inward = tri.inward_distances(x)
        m = float(inward.min())
        if abs(m) <= tol_abs:
            return None  # hits an edge or vertex: retry another direction
        if m > 0.0:
            crossings += 1
    return crossings


def _inside_by_ray_parity(s: Point3, tris: list[Triangle3], tol_abs: float) -> bool:
    for direction in _RAY_DIRECTIONS:
        crossings = _ray_parity(s, tris, direction, tol_abs)
        if crossings is not None:
            return crossings % 2 == 1
    raise ValidationError("all point-in-solid ray directions were degenerate")
