"""Small-scale exact 3D geometry: planes, lines, frames, rigid transforms.

Coordinates are millimetres. Points and vectors are plain float64 numpy
arrays of shape (3,); direction vectors are unit length and the dataclass
constructors enforce that, so downstream distance math stays a single dot
product. All types are immutable values and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearParallel

UNIT_TOL = 1e-12
FRAME_ORTHO_TOL = 1e-10


def vec(x: float, y: float, z: float) -> np.ndarray:
    """Build a float64 3-vector."""
    return np.array([x, y, z], dtype=float)


def unit(v) -> np.ndarray:
    """Normalize to unit length; raises ValueError on a near-zero vector."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-15:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def _frozen_array(obj, name, value):
    value = np.array(value, dtype=float)
    value.setflags(write=False)
    object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class Plane:
    """Plane in Hessian normal form: { p : normal . p = offset }.

    The signed distance of a point is positive on the side the normal
    points to.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            n = unit(n)
        _frozen_array(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_point_normal(cls, point, normal) -> "Plane":
        n = unit(normal)
        return cls(n, float(np.dot(n, np.asarray(point, dtype=float))))

    def canonical(self) -> "Plane":
        """Flip so the first nonzero normal component is positive.

        Gives a unique representative for comparing planes regardless of
        normal orientation.
        """
        for c in self.normal:
            if abs(c) > UNIT_TOL:
                if c < 0:
                    return Plane(-self.normal, -self.offset)
                return self
        return self


@dataclass(frozen=True)
class Line3:
    """Point + unit direction line."""

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        _frozen_array(self, "point", self.point)
        d = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
            d = unit(d)
        _frozen_array(self, "direction", d)

    def at(self, t: float) -> np.ndarray:
        return self.point + t * self.direction


@dataclass(frozen=True)
class Cylinder:
    axis: Line3
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("cylinder radius must be > 0")


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion p -> rotation @ p + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-10 or np.linalg.det(r) < 0:
            raise ValueError("rotation must be orthonormal with det +1")
        _frozen_array(self, "rotation", r)
        _frozen_array(self, "translation", self.translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point (3,) or a stack of points (n, 3)."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def apply_vector(self, v: np.ndarray) -> np.ndarray:
        """Rotate a direction vector (no translation)."""
        return self.rotation @ np.asarray(v, dtype=float)

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """Transform equal to applying ``inner`` first, then this one."""
        return RigidTransform(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))


@dataclass(frozen=True)
class DatumFrame:
    """Right-handed origin + orthonormal basis coordinate system."""

    origin: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray
    z_axis: np.ndarray

    def __post_init__(self):
        _frozen_array(self, "origin", self.origin)
        for name in ("x_axis", "y_axis", "z_axis"):
            a = np.asarray(getattr(self, name), dtype=float)
            if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
                a = unit(a)
            _frozen_array(self, name, a)
        x, y, z = self.x_axis, self.y_axis, self.z_axis
        if (
            abs(np.dot(x, y)) > FRAME_ORTHO_TOL
            or abs(np.dot(y, z)) > FRAME_ORTHO_TOL
            or abs(np.dot(z, x)) > FRAME_ORTHO_TOL
        ):
            raise ValueError("frame axes must be mutually orthogonal")
        if np.linalg.norm(np.cross(x, y) - z) > FRAME_ORTHO_TOL:
            raise ValueError("frame must be right-handed (x cross y = z)")


def signed_distance(plane: Plane, p) -> float:
    """normal . p - offset; positive on the side the normal points to."""
    return float(np.dot(plane.normal, np.asarray(p, dtype=float)) - plane.offset)


def intersect_planes(a: Plane, b: Plane) -> Line3:
    """Intersection line of two planes.

    Direction is the normalized cross product a.normal x b.normal; the
    returned point is the point of the line closest to the origin.
    Raises NearParallel when the planes are parallel within 1e-9.
    """
    d = np.cross(a.normal, b.normal)
    nd = float(np.linalg.norm(d))
    if nd <= 1e-9:
        raise NearParallel("planes are parallel within 1e-9")
    # Least-norm point: solve the 2x2 Gram system for p = s*na + t*nb.
    dot_ab = float(np.dot(a.normal, b.normal))
    gram = np.array([[1.0, dot_ab], [dot_ab, 1.0]])
    s, t = np.linalg.solve(gram, np.array([a.offset, b.offset]))
    point = s * a.normal + t * b.normal
    return Line3(point, d / nd)


def intersect_line_plane(line: Line3, plane: Plane) -> np.ndarray:
    """Point where a line pierces a plane; NearParallel if it runs along it."""
    denom = float(np.dot(plane.normal, line.direction))
    if abs(denom) <= 1e-9:
        raise NearParallel("line is parallel to the plane within 1e-9")
    t = (plane.offset - float(np.dot(plane.normal, line.point))) / denom
    return line.at(t)


def to_frame(frame: DatumFrame, p) -> np.ndarray:
    """Express a world point in frame coordinates."""
    rel = np.asarray(p, dtype=float) - frame.origin
    return np.array(
        [np.dot(rel, frame.x_axis), np.dot(rel, frame.y_axis), np.dot(rel, frame.z_axis)]
    )


def from_frame(frame: DatumFrame, q) -> np.ndarray:
    """Inverse of to_frame: frame coordinates back to world."""
    q = np.asarray(q, dtype=float)
    return frame.origin + q[0] * frame.x_axis + q[1] * frame.y_axis + q[2] * frame.z_axis


def rotation_about_axis(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation matrix about a (normalized) axis."""
    k = unit(axis)
    kx, ky, kz = k
    km = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    return np.eye(3) + np.sin(angle_rad) * km + (1.0 - np.cos(angle_rad)) * (km @ km)


def rotation_between(a, b) -> np.ndarray:
    """Minimal rotation matrix taking direction a onto direction b."""
    a = unit(a)
    b = unit(b)
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    c = float(np.dot(a, b))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # Antiparallel: rotate 180 degrees about any direction orthogonal to a.
        helper = vec(1.0, 0.0, 0.0) if abs(a[0]) < 0.9 else vec(0.0, 1.0, 0.0)
        return rotation_about_axis(np.cross(a, helper), np.pi)
    return rotation_about_axis(axis, float(np.arctan2(s, c)))
