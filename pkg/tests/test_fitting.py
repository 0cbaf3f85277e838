import math

import numpy as np
import pytest

from virtmet import (
    Cylinder,
    DegenerateCloud,
    Line3,
    Plane,
    PointCloud,
    RigidTransform,
    fit_circle_lsq,
    fit_cylinder,
    fit_plane_lsq,
    fit_plane_lsq_constrained,
    fit_plane_tangent,
    fit_plane_tangent_constrained,
    flatness,
    signed_distance,
    vec,
)
from oracles import (
    constrained_tangent_maxdev_oracle,
    lsq_plane_coeffs_oracle,
    random_patch_points,
    random_rigid_transform,
    tangent_maxdev_oracle,
)

Z_PLANE = Plane(vec(0, 0, 1), 0.0)


def grid_cloud(z_fn, nx=5, ny=5, extent=20.0, label="patch"):
    xs = np.linspace(0.0, extent, nx)
    ys = np.linspace(0.0, extent, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    x, y = gx.ravel(), gy.ravel()
    return PointCloud(np.column_stack([x, y, z_fn(x, y)]), label)


class TestLsqPlane:
    def test_exact_plane(self):
        sol = fit_plane_lsq(grid_cloud(lambda x, y: np.zeros_like(x)))
        assert sol.alpha == sol.beta == sol.omega == 0.0
        assert np.max(np.abs(sol.residuals)) == 0.0

    def test_symmetric_corners(self):
        e = 0.01
        pts = np.array(
            [[0, 0, e], [1, 0, -e], [0, 1, -e], [1, 1, e]], dtype=float
        )
        sol = fit_plane_lsq(PointCloud(pts))
        assert abs(sol.alpha) < 1e-12 and abs(sol.beta) < 1e-12 and abs(sol.omega) < 1e-12
        assert np.allclose(np.abs(sol.residuals), e)

    def test_matches_normal_equation_oracle(self):
        pts = random_patch_points(17, nx=5, ny=5)
        sol = fit_plane_lsq(PointCloud(pts))
        alpha, beta, omega = lsq_plane_coeffs_oracle(pts)
        assert sol.alpha == pytest.approx(alpha, abs=1e-9)
        assert sol.beta == pytest.approx(beta, abs=1e-9)
        assert sol.omega == pytest.approx(omega, abs=1e-9)

    def test_residuals_sum_to_zero(self):
        pts = random_patch_points(23)
        sol = fit_plane_lsq(PointCloud(pts))
        assert abs(float(np.sum(sol.residuals))) < 1e-9 * len(pts)

    def test_collinear_raises(self):
        pts = np.array([[t, 2.0 * t, 0.1 * t] for t in range(6)])
        with pytest.raises(DegenerateCloud):
            fit_plane_lsq(PointCloud(pts))

    def test_beats_random_perturbed_planes(self):
        pts = random_patch_points(29, nx=5, ny=5)
        sol = fit_plane_lsq(PointCloud(pts))
        rss_fit = float(np.sum(sol.residuals**2))
        rng = np.random.default_rng(99)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        coeffs = np.array([sol.alpha, sol.beta, sol.omega])
        perturbed = coeffs + rng.uniform(-1e-3, 1e-3, size=(1000, 3))
        residuals = z[None, :] - (
            perturbed[:, 0:1] * y[None, :]
            + perturbed[:, 1:2] * x[None, :]
            + perturbed[:, 2:3]
        )
        assert np.all(np.sum(residuals**2, axis=1) >= rss_fit - 1e-15)


class TestTangentPlane:
    def test_coplanar_cloud_is_its_own_plane(self):
        sol = fit_plane_tangent(grid_cloud(lambda x, y: np.zeros_like(x)))
        assert sol.max_deviation == pytest.approx(0.0, abs=1e-12)
        assert len(sol.contact_indices) == 25
        assert np.allclose(sol.plane.normal, [0, 0, 1], atol=1e-12)

    def test_single_bump_over_corner(self):
        # Flat grid plus one point raised 0.03 above a corner: the
        # contacting plane rests on the bump and the far edge, never
        # cutting material, and no point sits deeper than the bump height.
        pts = grid_cloud(lambda x, y: np.zeros_like(x)).points.copy()
        pts = np.vstack([pts, [0.0, 0.0, 0.03]])
        sol = fit_plane_tangent(PointCloud(pts))
        dists = pts @ sol.plane.normal - sol.plane.offset
        assert dists.max() <= 1e-9
        assert sol.max_deviation <= 0.03 + 1e-12
        assert 25 in sol.contact_indices  # the bump itself
        assert len(sol.contact_indices) >= 3
        # Far-side contacts: every other contact sits across the patch.
        assert all(pts[i][0] == 20.0 or pts[i][1] == 20.0 or i == 25
                   for i in sol.contact_indices)

    def test_sits_outside_lsq_plane(self):
        for seed in range(100):
            cloud = PointCloud(random_patch_points(seed))
            tangent = fit_plane_tangent(cloud).plane
            lsq = fit_plane_lsq(cloud).plane
            # Contacting plane sits outside the material relative to the
            # Gaussian plane: its offset along the shared normal is larger.
            centroid = cloud.points.mean(axis=0)
            assert signed_distance(tangent, centroid) <= signed_distance(lsq, centroid) + 1e-12

    def test_matches_brute_force_oracle(self):
        for seed in range(20):
            cloud = PointCloud(random_patch_points(seed))
            sol = fit_plane_tangent(cloud)
            assert sol.max_deviation == pytest.approx(
                tangent_maxdev_oracle(cloud.points, cloud.material_normal), abs=1e-9
            )

    def test_one_sided_and_contacts(self):
        for seed in range(30):
            cloud = PointCloud(random_patch_points(seed))
            sol = fit_plane_tangent(cloud)
            dists = cloud.points @ sol.plane.normal - sol.plane.offset
            assert dists.max() <= 1e-9
            assert len(sol.contact_indices) >= 3
            assert sol.max_deviation == pytest.approx(-dists.min(), abs=1e-15)


class TestConstrainedFits:
    def test_lsq_constrained_already_perpendicular(self):
        cloud = grid_cloud(lambda x, y: np.zeros_like(x))
        # Stand the flat patch up vertically: plane y = 2, normal -Y.
        pose = RigidTransform(
            np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
            vec(0.0, 2.0, 0.0),
        )
        side = cloud.transformed(pose)
        fitted = fit_plane_lsq_constrained(side, Z_PLANE)
        assert abs(np.dot(fitted.normal, Z_PLANE.normal)) < 1e-10
        assert np.allclose(np.abs(fitted.normal), [0, 1, 0], atol=1e-12)
        assert abs(abs(fitted.offset) - 2.0) < 1e-12

    def test_lsq_constrained_tilted_grid_through_centroid(self):
        # A perfect grid tilted 1 degree from vertical: the constrained
        # plane is vertical and passes through the projected centroid.
        delta = math.radians(1.0)
        cloud = grid_cloud(lambda x, y: np.zeros_like(x), extent=15.0)
        rot = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, math.sin(delta), -math.cos(delta)],
                [0.0, math.cos(delta), math.sin(delta)],
            ]
        )
        side = cloud.transformed(RigidTransform(rot, vec(0.0, 0.0, 0.0)))
        fitted = fit_plane_lsq_constrained(side, Z_PLANE)
        assert abs(np.dot(fitted.normal, Z_PLANE.normal)) < 1e-10
        centroid = side.points.mean(axis=0)
        assert abs(signed_distance(fitted, centroid)) < 1e-9

    def test_constrained_rss_never_beats_unconstrained(self):
        for seed in range(100):
            cloud = PointCloud(random_patch_points(seed))
            # Residuals along the material normal (+Z here) for both fits.
            lsq = fit_plane_lsq(cloud)
            rss_free = float(np.sum(lsq.residuals**2))
            perp = Plane(vec(1.0, 0.0, 0.0), 0.0)
            constrained = fit_plane_lsq_constrained(cloud, perp)
            d = cloud.points @ constrained.normal - constrained.offset
            along = d / float(np.dot(constrained.normal, cloud.material_normal))
            rss_constrained = float(np.sum(along**2))
            assert rss_constrained >= rss_free - 1e-12

    def test_tangent_constrained_perpendicular_cloud(self):
        cloud = grid_cloud(lambda x, y: np.zeros_like(x))
        pose = RigidTransform(
            np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
            vec(0.0, 0.0, 0.0),
        )
        side = cloud.transformed(pose)
        sol = fit_plane_tangent_constrained(side, Z_PLANE)
        assert sol.max_deviation == pytest.approx(0.0, abs=1e-12)
        assert abs(np.dot(sol.plane.normal, Z_PLANE.normal)) < 1e-10

    def test_tangent_constrained_tilted_side_touches_bottom_edge(self):
        # Perfect side face leaning top-inward by 1 degree over 15 mm of
        # height: the contacting vertical plane touches the bottom edge and
        # sits height*tan(1 deg) away from where the leaning plane crosses
        # the top.
        delta = math.radians(1.0)
        height = 15.0
        xs = np.linspace(0.0, 30.0, 5)
        zs = np.linspace(0.0, height, 5)
        pts = np.array([[x, z * math.tan(delta), z] for x in xs for z in zs])
        side = PointCloud(pts, material_normal=vec(0.0, -math.cos(delta), math.sin(delta)))
        sol = fit_plane_tangent_constrained(side, Plane(vec(0, 0, 1), height))
        assert abs(np.dot(sol.plane.normal, vec(0, 0, 1))) < 1e-10
        # Contacts are bottom-edge points (z = 0).
        assert all(pts[i][2] == 0.0 for i in sol.contact_indices)
        assert len(sol.contact_indices) >= 2
        # Plane is y = 0; the leaning plane crosses z = height at y = h*tan.
        gap = height * math.tan(delta) - abs(sol.plane.offset)
        assert gap == pytest.approx(height * math.tan(delta), abs=1e-9)

    def test_tangent_constrained_properties_and_oracle(self):
        perp = Plane(vec(0.0, 0.0, 1.0), 0.0)
        for seed in range(20):
            pts = random_patch_points(seed)
            # Stand the patch up so the constraint is meaningful.
            rot = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
            side = PointCloud(pts, material_normal=vec(0, 0, 1)).transformed(
                RigidTransform(rot, vec(0, 0, 0))
            )
            sol = fit_plane_tangent_constrained(side, perp)
            dists = side.points @ sol.plane.normal - sol.plane.offset
            assert dists.max() <= 1e-9
            assert len(sol.contact_indices) >= 2
            assert sol.max_deviation == pytest.approx(
                constrained_tangent_maxdev_oracle(
                    side.points, side.material_normal, perp.normal
                ),
                abs=1e-9,
            )


class TestFlatness:
    def test_coplanar_is_zero(self):
        assert flatness(grid_cloud(lambda x, y: np.zeros_like(x))) == 0.0

    def test_symmetric_band(self):
        e = 0.015
        pts = np.array([[0, 0, e], [1, 0, -e], [0, 1, -e], [1, 1, e]], dtype=float)
        assert flatness(PointCloud(pts)) == pytest.approx(0.03, abs=1e-12)

    def test_nonnegative(self):
        for seed in range(10):
            assert flatness(PointCloud(random_patch_points(seed))) >= 0.0


class TestCircleFit:
    def circle(self, cx, cy, r, n, jitter=0.0):
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([cx + r * np.cos(a), cy + r * np.sin(a)])

    def test_unit_circle(self):
        (cx, cy), r = fit_circle_lsq(self.circle(0, 0, 1, 8))
        assert (cx, cy) == pytest.approx((0, 0), abs=1e-12)
        assert r == pytest.approx(1.0, abs=1e-12)

    def test_translated_circle(self):
        (cx, cy), r = fit_circle_lsq(self.circle(15, 15, 1, 8))
        assert (cx, cy) == pytest.approx((15, 15), abs=1e-9)
        assert r == pytest.approx(1.0, abs=1e-9)

    def test_bore_sized_circle(self):
        (cx, cy), r = fit_circle_lsq(self.circle(15, 15, 5, 12))
        assert (cx, cy) == pytest.approx((15, 15), abs=1e-10)
        assert r == pytest.approx(5.0, abs=1e-10)

    def test_collinear_raises(self):
        with pytest.raises(DegenerateCloud):
            fit_circle_lsq([(0, 0), (1, 1), (2, 2), (3, 3)])


def bore_points(center=(15.0, 15.0), radius=5.0, stations=(13.0, 10.0, 7.0), per_ring=8):
    pts = []
    for z in stations:
        for a in np.linspace(0.0, 2.0 * np.pi, per_ring, endpoint=False):
            pts.append(
                [center[0] + radius * np.cos(a), center[1] + radius * np.sin(a), z]
            )
    return PointCloud(np.array(pts), "bore", vec(0, 0, -1))


class TestCylinderFit:
    def test_exact_from_true_axis(self):
        cyl = fit_cylinder(bore_points(), Line3(vec(15, 15, 10), vec(0, 0, -1)))
        assert np.allclose(np.abs(cyl.axis.direction), [0, 0, 1], atol=1e-12)
        assert cyl.radius == pytest.approx(5.0, abs=1e-9)
        # Axis passes through the true center.
        off = cyl.axis.point[:2] - np.array([15.0, 15.0])
        assert np.linalg.norm(off) < 1e-9

    def test_recovers_from_perturbed_axis(self):
        tilt = math.radians(0.5)
        skew = vec(math.sin(tilt), 0.0, -math.cos(tilt))
        cyl = fit_cylinder(bore_points(), Line3(vec(15.2, 14.9, 10.0), skew))
        angle = math.acos(abs(float(np.dot(cyl.axis.direction, vec(0, 0, 1)))))
        assert angle < 1e-9
        assert cyl.radius == pytest.approx(5.0, abs=1e-9)

    def test_radius_matches_station_circles(self):
        cloud = bore_points()
        cyl = fit_cylinder(cloud, Line3(vec(15, 15, 10), vec(0, 0, -1)))
        ring = cloud.points[:8, :2]
        (_, _), r = fit_circle_lsq(ring)
        assert cyl.radius == pytest.approx(r, abs=1e-12)

    def test_too_few_points_raises(self):
        with pytest.raises(DegenerateCloud):
            fit_cylinder(
                PointCloud(np.zeros((5, 3)) + [[15, 15, 10]] * 5),
                Line3(vec(15, 15, 10), vec(0, 0, -1)),
            )

    def test_single_station_raises(self):
        pts = bore_points(stations=(10.0,)).points
        with pytest.raises(DegenerateCloud):
            fit_cylinder(PointCloud(pts), Line3(vec(15, 15, 10), vec(0, 0, -1)))


class TestRigidMotionEquivariance:
    def planes_agree(self, a: Plane, b: Plane, tol=1e-9) -> bool:
        ca, cb = a.canonical(), b.canonical()
        return (
            np.linalg.norm(ca.normal - cb.normal) < tol and abs(ca.offset - cb.offset) < tol
        )

    @pytest.mark.parametrize("seed", range(8))
    def test_plane_fits_equivariant(self, seed):
        cloud = PointCloud(random_patch_points(seed))
        rot, shift = random_rigid_transform(100 + seed)
        t = RigidTransform(rot, shift)
        moved = cloud.transformed(t)

        for fit in (lambda c: fit_plane_lsq(c).plane, lambda c: fit_plane_tangent(c).plane):
            plane = fit(cloud)
            expected = Plane.from_point_normal(
                t.apply(plane.normal * plane.offset), t.apply_vector(plane.normal)
            )
            assert self.planes_agree(fit(moved), expected)

    @pytest.mark.parametrize("seed", range(4))
    def test_cylinder_fit_equivariant(self, seed):
        cloud = bore_points()
        axis = Line3(vec(15, 15, 10), vec(0, 0, -1))
        cyl = fit_cylinder(cloud, axis)
        rot, shift = random_rigid_transform(200 + seed)
        t = RigidTransform(rot, shift)
        moved_cyl = fit_cylinder(
            cloud.transformed(t), Line3(t.apply(axis.point), t.apply_vector(axis.direction))
        )
        assert moved_cyl.radius == pytest.approx(cyl.radius, abs=1e-9)
        expect_dir = t.apply_vector(cyl.axis.direction)
        assert np.linalg.norm(np.cross(moved_cyl.axis.direction, expect_dir)) < 1e-9
        # Moved axis passes through the transformed axis point.
        off = moved_cyl.axis.point - t.apply(cyl.axis.point)
        assert np.linalg.norm(np.cross(off, expect_dir)) < 1e-9
