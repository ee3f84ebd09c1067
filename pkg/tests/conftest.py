import numpy as np
import pytest

from facepath.bench import ridge_scene
from facepath.geom import TolerancePolicy
from facepath.scene import scene_from_dict

UNIT_TOL = TolerancePolicy.for_diameter(1.0)


def cube_obstacle(center, half):
    """Closed axis-aligned cube as 12 triangles (standard split per face)."""
    cx, cy, cz = center
    corners = []
    for dz in (-half, half):
        for dy in (-half, half):
            for dx in (-half, half):
                corners.append([cx + dx, cy + dy, cz + dz])
    # Faces as corner-index quads (consistent winding not required).
    quads = [
        (0, 1, 3, 2), (4, 5, 7, 6),  # z- / z+
        (0, 1, 5, 4), (2, 3, 7, 6),  # y- / y+
        (0, 2, 6, 4), (1, 3, 7, 5),  # x- / x+
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append([a, b, c])
        tris.append([a, c, d])
    return {"vertices": corners, "triangles": tris}


def single_wall_scene():
    """One large wall triangle in the plane x=0 plus a small far face."""
    wall = {"vertices": [[0.0, -4.0, 4.0], [0.0, 4.0, 4.0], [0.0, 0.0, -8.0]],
            "triangles": [[0, 1, 2]]}
    face = {"vertices": [[5.0, -1.0, -1.0], [5.0, 1.0, -1.0], [5.0, 0.0, 1.0]],
            "triangles": [[0, 1, 2]]}
    return scene_from_dict({"obstacles": [face, wall]})


@pytest.fixture(scope="session")
def ridge_case():
    return ridge_scene()


@pytest.fixture(scope="session")
def wall_scene():
    return single_wall_scene()


def rand_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
