"""Associate ideal geometry to measured point clouds.

Two association families are provided for planes:

* Gaussian (least-squares): the functional fit z = alpha*y + beta*x + omega
  evaluated in the face's nominal frame (the frame whose +Z is the cloud's
  outward material normal), solved through the linear normal equations.
* Tangent (contacting): the one-sided minimax plane that lies entirely
  outside the material, rests on at least three surface points (two for the
  perpendicularity-constrained variant) and minimizes the maximum
  point-to-plane distance. Found by exhaustive search over candidate
  support sets, which is exact and cheap at probing densities of a few
  dozen points per face.

Both come in perpendicularity-constrained variants that project the cloud
onto the constraint plane and solve the analogous 2D line problem. Circle
and cylinder fits cover the bore.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateCloud, NoConvergence
from .geom import Cylinder, Line3, Plane, RigidTransform, rotation_between, unit, vec

# A point is "in contact" with a fitted tangent plane when its distance is
# below this; one-sidedness allows this much penetration past the plane.
CONTACT_TOL = 1e-6
ONE_SIDED_TOL = 1e-9
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PointCloud:
    """Ordered 3D sample of one face (the measured skin of the part).

    material_normal is the nominal outward direction of the face, pointing
    away from the material; it orients every fit performed on the cloud.
    """

    points: np.ndarray
    label: str = ""
    material_normal: np.ndarray = field(default_factory=lambda: vec(0.0, 0.0, 1.0))

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        n = unit(self.material_normal)
        n.setflags(write=False)
        object.__setattr__(self, "material_normal", n)

    def __len__(self) -> int:
        return self.points.shape[0]

    def transformed(self, pose: RigidTransform) -> "PointCloud":
        """Rigidly move the cloud; the material normal rotates along."""
        return PointCloud(
            pose.apply(self.points), self.label, pose.apply_vector(self.material_normal)
        )


@dataclass(frozen=True)
class LsqPlaneSolution:
    """Gaussian plane fit z = alpha*y + beta*x + omega in the nominal frame.

    residuals are the per-point fit residuals e_i = z_i - (alpha*y_i +
    beta*x_i + omega), equal to the point-to-plane distance measured along
    the nominal normal. plane is the same solution as world geometry.
    """

    alpha: float
    beta: float
    omega: float
    residuals: np.ndarray
    plane: Plane


@dataclass(frozen=True)
class TangentPlaneSolution:
    """One-sided contacting plane with its support points.

    contact_indices are the cloud points lying on the plane (distance below
    CONTACT_TOL); max_deviation is the largest distance from the material
    surface down to the plane.
    """

    plane: Plane
    contact_indices: tuple
    max_deviation: float


@lru_cache(maxsize=64)
def _index_triples(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)


@lru_cache(maxsize=64)
def _index_pairs(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 2)), dtype=np.intp)


def _require_plane_cloud(cloud: PointCloud) -> None:
    if len(cloud) < 3:
        raise DegenerateCloud("plane fit needs at least 3 points")


def fit_plane_lsq(cloud: PointCloud) -> LsqPlaneSolution:
    """Least-squares plane through a cloud, functional form in its nominal frame.

    The cloud is rotated so its material normal becomes +Z, the linear model
    z = alpha*y + beta*x + omega is solved, and the resulting plane is
    rotated back to world coordinates, oriented along the material normal.
    The cloud must be a graph over its nominal plane (tilts well below 45
    degrees), which holds for any measured face expressed with its own
    outward normal.

    Raises DegenerateCloud when the points are collinear.
    """
    _require_plane_cloud(cloud)
    rot = rotation_between(cloud.material_normal, vec(0.0, 0.0, 1.0))
    q = cloud.points @ rot.T
    g = np.column_stack([q[:, 1], q[:, 0], np.ones(len(cloud))])
    sol, _, rank, _ = np.linalg.lstsq(g, q[:, 2], rcond=None)
    if rank < 3:
        raise DegenerateCloud("collinear points: normal equations are singular")
    alpha, beta, omega = (float(c) for c in sol)
    residuals = q[:, 2] - g @ sol
    normal_nom = unit(vec(-beta, -alpha, 1.0))
    offset = omega * normal_nom[2]
    plane = Plane(rot.T @ normal_nom, offset)
    return LsqPlaneSolution(alpha, beta, omega, residuals, plane)


def fit_plane_tangent(cloud: PointCloud) -> TangentPlaneSolution:
    """One-sided contacting plane resting on the cloud from outside.

    Considers every plane through three cloud points, keeps those with the
    whole cloud on the material side, and returns the one minimizing the
    maximum point-to-plane distance. Ties are broken toward the
    lexicographically smallest support triple so results are reproducible.
    """
    _require_plane_cloud(cloud)
    pts = cloud.points
    m = cloud.material_normal
    idx = _index_triples(len(cloud))
    v1 = pts[idx[:, 1]] - pts[idx[:, 0]]
    v2 = pts[idx[:, 2]] - pts[idx[:, 0]]
    normals = np.cross(v1, v2)
    lens = np.linalg.norm(normals, axis=1)
    area_scale = np.linalg.norm(v1, axis=1) * np.linalg.norm(v2, axis=1)
    ok = lens > 1e-9 * np.maximum(area_scale, 1e-30)
    side = normals @ m
    flip = side < 0
    normals[flip] *= -1.0
    side = np.abs(side)
    ok &= side > 1e-12 * lens
    u = np.zeros_like(normals)
    u[ok] = normals[ok] / lens[ok, None]
    offsets = np.einsum("ij,ij->i", u, pts[idx[:, 0]])
    dist = pts @ u.T - offsets
    valid = ok & (dist.max(axis=0) <= ONE_SIDED_TOL)
    if not valid.any():
        raise DegenerateCloud("no supporting plane found (degenerate cloud)")
    max_dev = -dist.min(axis=0)
    best_val = max_dev[valid].min()
    winner = int(np.nonzero(valid & (max_dev <= best_val + _TIE_TOL))[0][0])
    plane = Plane(u[winner], float(offsets[winner]))
    d = dist[:, winner]
    contacts = tuple(int(i) for i in np.nonzero(np.abs(d) <= CONTACT_TOL)[0])
    return TangentPlaneSolution(plane, contacts, float(-d.min()))


def _constraint_basis(cloud: PointCloud, perp_to: Plane):
    """2D frame inside the constraint plane.

    Returns (a_hat, b_hat): b_hat is the projected material normal (the
    outward direction of the 2D problem), a_hat the in-plane abscissa.
    """
    n = perp_to.normal
    m_proj = cloud.material_normal - np.dot(cloud.material_normal, n) * n
    if np.linalg.norm(m_proj) < 1e-9:
        raise DegenerateCloud("material normal is parallel to the constraint normal")
    b_hat = unit(m_proj)
    a_hat = np.cross(n, b_hat)
    return a_hat, b_hat


def fit_plane_lsq_constrained(cloud: PointCloud, perp_to: Plane) -> Plane:
    """Least-squares plane constrained perpendicular to another plane.

    Equivalent to projecting the cloud onto the constraint plane and
    fitting a least-squares line (residuals along the projected material
    normal), then extruding that line along the constraint normal.
    """
    _require_plane_cloud(cloud)
    a_hat, b_hat = _constraint_basis(cloud, perp_to)
    a = cloud.points @ a_hat
    b = cloud.points @ b_hat
    g = np.column_stack([a, np.ones(len(cloud))])
    sol, _, rank, _ = np.linalg.lstsq(g, b, rcond=None)
    if rank < 2:
        raise DegenerateCloud("projected points are coincident")
    slope, intercept = (float(c) for c in sol)
    direction = b_hat - slope * a_hat
    scale = float(np.linalg.norm(direction))
    normal = direction / scale
    if np.dot(normal, cloud.material_normal) < 0:
        normal, intercept = -normal, -intercept
    return Plane(normal, intercept / scale)


def fit_plane_tangent_constrained(cloud: PointCloud, perp_to: Plane) -> TangentPlaneSolution:
    """One-sided contacting plane constrained perpendicular to another plane.

    Projects the cloud onto the constraint plane and searches every line
    through two projected points for the one-sided line of least maximum
    distance, then extrudes it back to 3D. At least two contact points by
    construction.
    """
    _require_plane_cloud(cloud)
    a_hat, b_hat = _constraint_basis(cloud, perp_to)
    q = np.column_stack([cloud.points @ a_hat, cloud.points @ b_hat])
    if np.max(np.linalg.norm(q - q[0], axis=1)) < 1e-12:
        raise DegenerateCloud("projected points are coincident")
    idx = _index_pairs(len(cloud))
    edges = q[idx[:, 1]] - q[idx[:, 0]]
    # 2D normal of the line through each pair, oriented outward (+b).
    normals = np.column_stack([-edges[:, 1], edges[:, 0]])
    lens = np.linalg.norm(normals, axis=1)
    ok = lens > 1e-12
    flip = normals[:, 1] < 0
    normals[flip] *= -1.0
    ok &= np.abs(normals[:, 1]) > 1e-12 * lens
    u = np.zeros_like(normals)
    u[ok] = normals[ok] / lens[ok, None]
    offsets = np.einsum("ij,ij->i", u, q[idx[:, 0]])
    dist = q @ u.T - offsets
    valid = ok & (dist.max(axis=0) <= ONE_SIDED_TOL)
    if not valid.any():
        raise DegenerateCloud("no supporting line found for the constrained fit")
    max_dev = -dist.min(axis=0)
    best_val = max_dev[valid].min()
    winner = int(np.nonzero(valid & (max_dev <= best_val + _TIE_TOL))[0][0])
    normal3 = u[winner, 0] * a_hat + u[winner, 1] * b_hat
    plane = Plane(normal3, float(offsets[winner]))
    d = dist[:, winner]
    contacts = tuple(int(i) for i in np.nonzero(np.abs(d) <= CONTACT_TOL)[0])
    return TangentPlaneSolution(plane, contacts, float(-d.min()))


def flatness(cloud: PointCloud) -> float:
    """Peak-to-valley spread of the cloud about its Gaussian plane (mm)."""
    sol = fit_plane_lsq(cloud)
    d = cloud.points @ sol.plane.normal - sol.plane.offset
    return float(d.max() - d.min())


def fit_circle_lsq(points2d):
    """Algebraic least-squares circle through 2D points.

    Solves the linearized circle equation about the centroid; exact on
    noise-free circles. Returns ((cx, cy), radius).

    Raises DegenerateCloud when the points are collinear.
    """
    q = np.asarray(points2d, dtype=float)
    if q.ndim != 2 or q.shape[1] != 2 or q.shape[0] < 3:
        raise DegenerateCloud("circle fit needs at least 3 points of shape (n, 2)")
    c = q.mean(axis=0)
    uv = q - c
    suu = float(np.dot(uv[:, 0], uv[:, 0]))
    svv = float(np.dot(uv[:, 1], uv[:, 1]))
    suv = float(np.dot(uv[:, 0], uv[:, 1]))
    suuu = float(np.sum(uv[:, 0] ** 3))
    svvv = float(np.sum(uv[:, 1] ** 3))
    suuv = float(np.sum(uv[:, 0] ** 2 * uv[:, 1]))
    suvv = float(np.sum(uv[:, 0] * uv[:, 1] ** 2))
    a = np.array([[suu, suv], [suv, svv]])
    rhs = 0.5 * np.array([suuu + suvv, svvv + suuv])
    if abs(np.linalg.det(a)) < 1e-12 * max(suu + svv, 1e-30) ** 2:
        raise DegenerateCloud("collinear points: circle is undetermined")
    uc, vc = np.linalg.solve(a, rhs)
    radius = float(np.sqrt(uc * uc + vc * vc + (suu + svv) / len(q)))
    return (float(c[0] + uc), float(c[1] + vc)), radius


def _axial_stations(t: np.ndarray):
    """Split sorted axial coordinates into contiguous station groups."""
    order = np.argsort(t, kind="stable")
    ts = t[order]
    span = float(ts[-1] - ts[0])
    if span <= 1e-9:
        raise DegenerateCloud("cylinder fit needs points at 2+ axial stations")
    cuts = np.nonzero(np.diff(ts) > 0.2 * span)[0]
    groups = np.split(order, cuts + 1)
    if len(groups) < 2:
        raise DegenerateCloud("cylinder fit needs points at 2+ axial stations")
    for g in groups:
        if len(g) < 3:
            raise DegenerateCloud("each axial station needs at least 3 points")
    return groups


def _station_circles(pts: np.ndarray, point: np.ndarray, direction: np.ndarray):
    """Per-station circle centers (3D) and radii for the current axis."""
    t = (pts - point) @ direction
    helper = vec(1.0, 0.0, 0.0) if abs(direction[0]) < 0.9 else vec(0.0, 1.0, 0.0)
    e1 = unit(np.cross(direction, helper))
    e2 = np.cross(direction, e1)
    centers = []
    radii = []
    for g in _axial_stations(t):
        origin = point + float(t[g].mean()) * direction
        rel = pts[g] - origin
        (cu, cv), r = fit_circle_lsq(np.column_stack([rel @ e1, rel @ e2]))
        centers.append(origin + cu * e1 + cv * e2)
        radii.append(r)
    return np.array(centers), np.array(radii)


def fit_cylinder(cloud: PointCloud, initial_axis: Line3, max_iter: int = 100) -> Cylinder:
    """Cylinder fit by alternating station circles and axis refits.

    Points are grouped into axial stations along the current axis, each
    station is fitted with a least-squares circle in its cross-section
    plane, and the axis is refitted through the circle centers; this
    repeats until the axis direction settles below 1e-10 rad. Exact on a
    defect-free bore, which is the regime this workbench generates.

    Raises NoConvergence after max_iter sweeps, DegenerateCloud when the
    sampling cannot support the fit.
    """
    pts = cloud.points
    if len(cloud) < 6:
        raise DegenerateCloud("cylinder fit needs at least 6 points")
    point = np.asarray(initial_axis.point, dtype=float)
    direction = np.asarray(initial_axis.direction, dtype=float)
    for _ in range(max_iter):
        centers, radii = _station_circles(pts, point, direction)
        if len(centers) == 2:
            new_dir = unit(centers[1] - centers[0])
        else:
            centered = centers - centers.mean(axis=0)
            _, _, vt = np.linalg.svd(centered, full_matrices=False)
            new_dir = unit(vt[0])
        if np.dot(new_dir, direction) < 0:
            new_dir = -new_dir
        new_point = centers.mean(axis=0)
        step = float(np.arccos(np.clip(np.dot(new_dir, direction), -1.0, 1.0)))
        point, direction = new_point, new_dir
        if step < 1e-10:
            centers, radii = _station_circles(pts, point, direction)
            return Cylinder(Line3(centers.mean(axis=0), direction), float(radii.mean()))
    raise NoConvergence(f"cylinder axis did not settle in {max_iter} iterations")
