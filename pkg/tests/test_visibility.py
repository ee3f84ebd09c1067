import numpy as np
import pytest

from conftest import cube_obstacle
from facepath.geom import Segment3, point, segment_triangle_blocked
from facepath.scene import Edge, scene_from_dict
from facepath.visibility import (
    pairs_visible_bulk,
    perpendicular_visibility_partition,
    points_visible,
    tangent_projection_points,
)


@pytest.fixture
def wall_scene():
    """Small face at z=0 plus a wall triangle in the plane x=0."""
    face = {"vertices": [[-1, -1, 0], [1, -1, 0], [0, 1, 0]],
            "triangles": [[0, 1, 2]]}
    wall = {"vertices": [[0, -1, -1], [0, 1, -1], [0, 0, 1]],
            "triangles": [[0, 1, 2]]}
    return scene_from_dict({"obstacles": [face, wall]})


class TestPointsVisible:
    def test_same_face_grazing_visible(self):
        scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0), 1.0)]})
        # two points on the top face, segment inside the face plane
        p = np.array([-0.5, -0.5, 1.0])
        q = np.array([0.5, 0.5, 1.0])
        assert points_visible(p, q, scene)

    def test_wall_blocks(self, wall_scene):
        p = np.array([-2.0, 0.0, 0.0])
        q = np.array([2.0, 0.0, 0.0])
        assert not points_visible(p, q, wall_scene)

    def test_passing_outside_wall_extent(self, wall_scene):
        p = np.array([-2.0, 0.0, 0.0])
        q = np.array([2.0, 5.0, 0.0])
        # brute-force oracle: per-triangle scalar predicate
        seg = Segment3(p, q)
        brute = any(segment_triangle_blocked(seg, tri, wall_scene.tol)
                    for tri in wall_scene.triangles)
        assert points_visible(p, q, wall_scene) == (not brute)
        assert points_visible(p, q, wall_scene)

    def test_symmetry(self, wall_scene):
        rng = np.random.default_rng(4)
        for _ in range(100):
            p = rng.normal(scale=3.0, size=3)
            q = rng.normal(scale=3.0, size=3)
            assert points_visible(p, q, wall_scene) == points_visible(q, p, wall_scene)


def test_bulk_matches_scalar_predicate():
    scene = scene_from_dict({"obstacles": [
        cube_obstacle((0, 0, 0), 0.6),
        {"vertices": [[2, -1, -1], [2, 1, -1], [2, 0, 1.5]], "triangles": [[0, 1, 2]]},
    ]})
    rng = np.random.default_rng(5)
    P = rng.normal(scale=2.5, size=(500, 3))
    Q = rng.normal(scale=2.5, size=(500, 3))
    bulk = pairs_visible_bulk(P, Q, scene)
    for i in range(500):
        seg = Segment3(P[i], Q[i])
        brute = not any(segment_triangle_blocked(seg, tri, scene.tol)
                        for tri in scene.triangles)
        assert bulk[i] == brute, f"mismatch at segment {i}"


def drop_scene(blocker=None):
    """Target face in z=0; an edge above it; optional blocker in between."""
    face = {"vertices": [[-3, -3, 0], [3, -3, 0], [0, 3, 0]], "triangles": [[0, 1, 2]]}
    girder = {"vertices": [[-1, 0, 2], [1, 0, 2], [0, 0.5, 3]], "triangles": [[0, 1, 2]]}
    obstacles = [face, girder]
    if blocker is not None:
        obstacles.append(blocker)
    return scene_from_dict({"obstacles": obstacles})


def girder_bottom_edge(scene):
    for e in scene.edges:
        if e.obstacle_index == 1 and abs(e.a[2] - 2) < 1e-9 and abs(e.b[2] - 2) < 1e-9:
            return e
    raise AssertionError("bottom edge not found")


class TestPerpendicularPartition:
    def test_unblocked_single_interval(self):
        scene = drop_scene()
        face_tri = scene.triangles[0]
        edge = girder_bottom_edge(scene)
        parts = perpendicular_visibility_partition(edge, face_tri, scene)
        assert all(p.visible for p in parts)
        assert parts[0].beta_lo == 0.0 and parts[-1].beta_hi == 1.0

    def test_middle_blocker_three_intervals(self):
        blocker = {"vertices": [[-0.4, -0.3, 1.0], [0.4, -0.3, 1.0], [0.0, 0.6, 1.0]],
                   "triangles": [[0, 1, 2]]}
        scene = drop_scene(blocker)
        face_tri = scene.triangles[0]
        edge = girder_bottom_edge(scene)
        parts = perpendicular_visibility_partition(edge, face_tri, scene)
        flags = [p.visible for p in parts]
        assert flags.count(False) == 1
        assert len(parts) == 3
        # derived check: 100 sampled betas agree with the brute predicate
        self._sampled_consistency(edge, face_tri, scene, parts, n=100)

    def test_projection_outside_face(self):
        scene = drop_scene()
        face_tri = scene.triangles[0]
        # an edge whose projection is far outside the face triangle
        far = Edge(id=999, obstacle_index=1,
                   a=np.array([10.0, 10.0, 2.0]), b=np.array([11.0, 10.0, 2.0]))
        parts = perpendicular_visibility_partition(far, face_tri, scene)
        assert all(not p.in_face for p in parts)
        assert all(p.visible for p in parts)

    @staticmethod
    def _sampled_consistency(edge, face_tri, scene, parts, n=32):
        shrink = 1e-6
        for part in parts:
            width = part.beta_hi - part.beta_lo
            if width <= 4 * shrink:
                continue
            betas = np.linspace(part.beta_lo + shrink * width,
                                part.beta_hi - shrink * width, n)
            for beta in betas:
                x = edge.point_at(beta)
                xp = x - (face_tri.normal @ x - face_tri.d) * face_tri.normal
                seen = points_visible(x, xp, scene)
                assert seen == part.visible, (
                    f"beta={beta} expected visible={part.visible}")

    def test_sampled_consistency_random_scenes(self):
        rng = np.random.default_rng(6)
        face = {"vertices": [[-3, -3, 0], [3, -3, 0], [0, 3, 0]], "triangles": [[0, 1, 2]]}
        for trial in range(8):
            obstacles = [face]
            for _ in range(rng.integers(1, 4)):
                c = np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                              rng.uniform(0.4, 2.5)])
                v = c + rng.normal(scale=0.5, size=(3, 3))
                obstacles.append({"vertices": v.tolist(), "triangles": [[0, 1, 2]]})
            try:
                scene = scene_from_dict({"obstacles": obstacles})
            except Exception:
                continue
            face_tri = scene.triangles[0]
            a = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(2.2, 3.5)])
            b = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(2.2, 3.5)])
            edge = Edge(id=1000 + trial, obstacle_index=99, a=a, b=b)
            parts = perpendicular_visibility_partition(edge, face_tri, scene)
            assert parts[0].beta_lo == 0.0 and parts[-1].beta_hi == 1.0
            for p, q in zip(parts[:-1], parts[1:]):
                assert abs(p.beta_hi - q.beta_lo) < 1e-12
            assert len(parts) <= 2 * scene.n_triangles + 3
            self._sampled_consistency(edge, face_tri, scene, parts)


class TestTangentPoints:
    def test_clear_drop_no_tangents(self):
        scene = drop_scene()
        edge = girder_bottom_edge(scene)
        assert tangent_projection_points(edge, scene.triangles[0], scene) == []

    def test_middle_blocker_two_switch_points(self):
        blocker = {"vertices": [[-0.4, -0.3, 1.0], [0.4, -0.3, 1.0], [0.0, 0.6, 1.0]],
                   "triangles": [[0, 1, 2]]}
        scene = drop_scene(blocker)
        face_tri = scene.triangles[0]
        edge = girder_bottom_edge(scene)
        pts = tangent_projection_points(edge, face_tri, scene)
        assert len(pts) == 2
        # derived check: binary-search each visibility switch along the edge
        for beta, pos in pts:
            lo, hi = beta - 0.02, beta + 0.02

            def vis(b):
                x = edge.point_at(b)
                xp = x - (face_tri.normal @ x - face_tri.d) * face_tri.normal
                return points_visible(x, xp, scene)

            a, b_ = lo, hi
            assert vis(a) != vis(b_)
            for _ in range(60):
                mid = 0.5 * (a + b_)
                if vis(mid) == vis(a):
                    a = mid
                else:
                    b_ = mid
            assert abs(0.5 * (a + b_) - beta) < 1e-9

    def test_fully_shadowed_edge_no_tangents(self):
        # blocker wider than the girder: the whole drop corridor is occluded
        blocker = {"vertices": [[-2.5, -1.0, 1.0], [2.5, -1.0, 1.0], [0.0, 1.5, 1.0]],
                   "triangles": [[0, 1, 2]]}
        scene = drop_scene(blocker)
        edge = girder_bottom_edge(scene)
        assert tangent_projection_points(edge, scene.triangles[0], scene) == []

    def test_subset_of_interval_endpoints(self):
        blocker = {"vertices": [[-0.4, -0.3, 1.0], [0.4, -0.3, 1.0], [0.0, 0.6, 1.0]],
                   "triangles": [[0, 1, 2]]}
        scene = drop_scene(blocker)
        face_tri = scene.triangles[0]
        edge = girder_bottom_edge(scene)
        parts = perpendicular_visibility_partition(edge, face_tri, scene)
        ends = {round(p.beta_lo, 9) for p in parts} | {round(p.beta_hi, 9) for p in parts}
        for beta, _ in tangent_projection_points(edge, face_tri, scene):
            assert round(beta, 9) in ends

    def test_same_obstacle_silhouette_excluded(self):
        # blocker and edge belong to one obstacle: no tangent points emitted
        face = {"vertices": [[-3, -3, 0], [3, -3, 0], [0, 3, 0]], "triangles": [[0, 1, 2]]}
        combo = {"vertices": [[-1, 0, 2], [1, 0, 2], [0, 0.5, 3],
                              [-0.4, -0.3, 1.0], [0.4, -0.3, 1.0], [0.0, 0.6, 1.0]],
                 "triangles": [[0, 1, 2], [3, 4, 5]]}
        scene = scene_from_dict({"obstacles": [face, combo]})
        edge = girder_bottom_edge(scene)
        assert tangent_projection_points(edge, scene.triangles[0], scene) == []


