import numpy as np
import pytest

from facepath.errors import DegenerateGeometry, OffPlane
from facepath.geom import (
    Plane3,
    PointClass,
    Segment3,
    TolerancePolicy,
    Triangle3,
    closest_point_on_triangle,
    point,
    point_in_triangle_2d,
    project_onto_plane,
    segment_triangle_blocked,
)

TOL = TolerancePolicy.for_diameter(1.0)

RIGHT_TRI = Triangle3(point(0, 0, 0), point(1, 0, 0), point(0, 1, 0))


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        point(0.0, float("nan"), 1.0)
    with pytest.raises(ValueError):
        point(float("inf"), 0.0, 0.0)


def test_degenerate_triangle_rejected():
    with pytest.raises(DegenerateGeometry):
        Triangle3(point(0, 0, 0), point(1, 0, 0), point(2, 0, 0))


class TestClosestPointOnTriangle:
    def test_projection_on_vertex_region(self):
        got = closest_point_on_triangle(point(0, 0, 1), RIGHT_TRI)
        assert np.allclose(got, [0, 0, 0])

    def test_clamps_to_hypotenuse_midpoint(self):
        got = closest_point_on_triangle(point(2, 2, 1), RIGHT_TRI)
        assert np.allclose(got, [0.5, 0.5, 0])

    def test_interior_projection(self):
        got = closest_point_on_triangle(point(0.25, 0.25, 5), RIGHT_TRI)
        assert np.allclose(got, [0.25, 0.25, 0])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = rng.normal(scale=2.0, size=3)
            cp = closest_point_on_triangle(p, RIGHT_TRI)
            cp2 = closest_point_on_triangle(cp, RIGHT_TRI)
            assert np.linalg.norm(cp - cp2) <= 1e-12

    def test_minimizes_against_dense_sample(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p = rng.normal(scale=2.0, size=3)
            cp = closest_point_on_triangle(p, RIGHT_TRI)
            best = np.linalg.norm(p - cp)
            w = rng.dirichlet(np.ones(3), size=400)
            samples = w @ np.stack(RIGHT_TRI.vertices)
            dists = np.linalg.norm(samples - p, axis=1)
            assert best <= dists.min() + TOL.abs


class TestProjectOntoPlane:
    def test_onto_z0(self):
        pl = Plane3(normal=np.array([0.0, 0.0, 1.0]), d=0.0)
        assert np.allclose(project_onto_plane(point(1, 2, 3), pl), [1, 2, 0])

    def test_identity_on_plane(self):
        pl = Plane3(normal=np.array([0.0, 0.0, 1.0]), d=0.0)
        p = point(3, -1, 0)
        assert np.allclose(project_onto_plane(p, pl), p)

    def test_onto_z1(self):
        pl = Plane3(normal=np.array([0.0, 0.0, 1.0]), d=1.0)
        assert np.allclose(project_onto_plane(point(0, 0, -4), pl), [0, 0, 1])

    def test_idempotent_and_minimizing(self):
        rng = np.random.default_rng(2)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        pl = Plane3.from_point_normal(rng.normal(size=3), n)
        for _ in range(20):
            p = rng.normal(scale=3.0, size=3)
            q = project_onto_plane(p, pl)
            assert np.allclose(project_onto_plane(q, pl), q, atol=1e-12)
            # closer than any sampled plane point
            for _ in range(50):
                r = project_onto_plane(rng.normal(scale=3.0, size=3), pl)
                assert np.linalg.norm(p - q) <= np.linalg.norm(p - r) + 1e-9


class TestPointInTriangle2d:
    def test_interior(self):
        assert point_in_triangle_2d(point(0.1, 0.1, 0), RIGHT_TRI, TOL) is PointClass.INTERIOR

    def test_boundary(self):
        assert point_in_triangle_2d(point(0.5, 0, 0), RIGHT_TRI, TOL) is PointClass.BOUNDARY

    def test_outside(self):
        assert point_in_triangle_2d(point(2, 2, 0), RIGHT_TRI, TOL) is PointClass.OUTSIDE

    def test_off_plane_raises(self):
        with pytest.raises(OffPlane):
            point_in_triangle_2d(point(0.1, 0.1, 0.5), RIGHT_TRI, TOL)


class TestSegmentTriangleBlocked:
    TRI = Triangle3(point(-1, -1, 0), point(1, -1, 0), point(0, 1, 0))

    def test_transversal_interior_crossing(self):
        seg = Segment3(point(0, 0, -1), point(0, 0, 1))
        assert segment_triangle_blocked(seg, self.TRI, TOL) is True

    def test_disjoint(self):
        seg = Segment3(point(5, 5, -1), point(5, 5, 1))
        assert segment_triangle_blocked(seg, self.TRI, TOL) is False

    def test_grazing_along_edge(self):
        seg = Segment3(point(-1, -1, 0), point(1, -1, 0))
        assert segment_triangle_blocked(seg, self.TRI, TOL) is False

    def test_coplanar_through_interior_is_grazing(self):
        seg = Segment3(point(-2, 0, 0), point(2, 0, 0))
        assert segment_triangle_blocked(seg, self.TRI, TOL) is False

    def test_endpoint_on_plane_excluded(self):
        seg = Segment3(point(0, 0, 0), point(0, 0, 1))
        assert segment_triangle_blocked(seg, self.TRI, TOL) is False

    def test_orientation_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            a = rng.normal(scale=1.5, size=3)
            b = rng.normal(scale=1.5, size=3)
            fwd = segment_triangle_blocked(Segment3(a, b), self.TRI, TOL)
            rev = segment_triangle_blocked(Segment3(b, a), self.TRI, TOL)
            assert fwd == rev
