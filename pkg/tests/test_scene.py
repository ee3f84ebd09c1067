import json

import numpy as np
import pytest

from conftest import cube_obstacle
from facepath.errors import BadFaceRef, ParseError, SourceInsideObstacle, ValidationError
from facepath.scene import FaceRef, load_scene, scene_from_dict

TETRA = {
    "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
    "triangles": [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
}


def test_load_tetrahedron_counts():
    scene = load_scene(json.dumps({"obstacles": [TETRA]}))
    assert scene.n_vertices == 4
    assert scene.n_triangles == 4
    assert scene.n_edges == 6


def test_collinear_triangle_rejected():
    bad = {"obstacles": [{"vertices": [[0, 0, 0], [1, 0, 0], [2, 0, 0]],
                          "triangles": [[0, 1, 2]]}]}
    with pytest.raises(ValidationError):
        scene_from_dict(bad)


def brute_unique_edges(obstacle):
    pairs = set()
    for i, j, k in obstacle["triangles"]:
        for u, v in ((i, j), (j, k), (k, i)):
            pairs.add((min(u, v), max(u, v)))
    return pairs


def test_two_cubes_edge_count():
    c1 = cube_obstacle((0, 0, 0), 0.5)
    c2 = cube_obstacle((5, 0, 0), 0.5)
    expected = len(brute_unique_edges(c1)) + len(brute_unique_edges(c2))
    assert expected == 36  # 18 unique edges per triangulated cube
    scene = scene_from_dict({"obstacles": [c1, c2]})
    assert scene.n_edges == expected


def test_empty_obstacle_list_invalid():
    with pytest.raises((ValidationError, ParseError)):
        scene_from_dict({"obstacles": []})


def test_malformed_json_is_parse_error():
    with pytest.raises(ParseError):
        load_scene(b"{not json")


def test_bad_index_rejected():
    bad = {"obstacles": [{"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                          "triangles": [[0, 1, 7]]}]}
    with pytest.raises(ValidationError):
        scene_from_dict(bad)


def test_round_trip_bit_for_bit():
    scene = scene_from_dict({"obstacles": [TETRA, cube_obstacle((3, 0.25, -1), 0.7)]})
    again = load_scene(scene.to_json())
    assert again.n_vertices == scene.n_vertices
    assert again.n_edges == scene.n_edges
    for a, b in zip(scene.obstacles, again.obstacles):
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.triangles, b.triangles)


def test_edge_dedup_property():
    scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0), 1.0)]})
    seen = set()
    for e in scene.edges:
        key = (e.obstacle_index, tuple(np.round(e.a, 9)), tuple(np.round(e.b, 9)))
        rkey = (e.obstacle_index, key[2], key[1])
        assert key not in seen and rkey not in seen
        seen.add(key)


def test_diameter_dominates_sampled_pairs():
    rng = np.random.default_rng(0)
    verts = rng.normal(scale=3.0, size=(20, 3))
    obstacle = {"vertices": verts.tolist(),
                "triangles": [[i, (i + 1) % 20, (i + 7) % 20] for i in range(0, 18, 3)]}
    scene = scene_from_dict({"obstacles": [obstacle]})
    idx = rng.integers(0, 20, size=(100, 2))
    for i, j in idx:
        assert scene.diameter >= np.linalg.norm(verts[i] - verts[j]) - 1e-12


class TestResolveFace:
    def test_tetra_face(self):
        scene = scene_from_dict({"obstacles": [TETRA]})
        tri, plane = scene.resolve_face(FaceRef(0, 0))
        assert np.allclose(np.abs(plane.normal), [0, 0, 1])

    def test_out_of_range(self):
        scene = scene_from_dict({"obstacles": [TETRA]})
        with pytest.raises(BadFaceRef):
            scene.resolve_face(FaceRef(0, 99))
        with pytest.raises(BadFaceRef):
            scene.resolve_face(FaceRef(3, 0))

    def test_cube_bottom_plane(self):
        scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0.5), 0.5)]})
        # find a triangle in the z=0 plane
        for ti, tri in enumerate(scene.triangles):
            if np.allclose([v[2] for v in tri.vertices], 0.0):
                _, plane = scene.resolve_face(FaceRef(0, ti))
                assert np.allclose(np.abs(plane.normal), [0, 0, 1])
                assert abs(plane.d) < 1e-12
                return
        pytest.fail("no bottom face found")


class TestFaceRefParse:
    def test_ok(self):
        assert FaceRef.parse("2:7") == FaceRef(2, 7)

    @pytest.mark.parametrize("text", ["2", "a:b", "1:2:3", ":"])
    def test_bad(self, text):
        with pytest.raises(BadFaceRef):
            FaceRef.parse(text)


class TestValidateSource:
    def test_outside_ok(self):
        scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0), 0.5)]})
        scene.validate_source(np.array([3.0, 0.0, 0.0]))

    def test_center_of_cube_rejected(self):
        scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0), 0.5)]})
        with pytest.raises(SourceInsideObstacle):
            scene.validate_source(np.array([0.0, 0.0, 0.0]))

    def test_on_surface_ok(self):
        scene = scene_from_dict({"obstacles": [cube_obstacle((0, 0, 0), 0.5)]})
        scene.validate_source(np.array([0.5, 0.0, 0.0]))

    def test_open_mesh_skipped_with_warning(self, caplog):
        wall = {"vertices": [[0, -1, -1], [0, 1, -1], [0, 0, 1]],
                "triangles": [[0, 1, 2]]}
        scene = scene_from_dict({"obstacles": [wall]})
        with caplog.at_level("WARNING"):
            scene.validate_source(np.array([5.0, 0.0, 0.0]))
        assert any("not a closed mesh" in r.message for r in caplog.records)
