"""Build virtual parts with exactly prescribed defects.

A part is a box with a bored hole in the top face. Each defective face
starts as a seeded synthetic texture patch, is normalized so its Gaussian
plane is exactly Z=0, scaled to the requested flatness, and rigidly placed
onto the part. The side face is additionally rotated about the part's
bottom edge to open the top/side angle from 90 degrees by the requested
amount (the face top leans into the material). The bore is a defect-free
cylinder.

Point clouds travel between tools as plain text files, one "X Y Z" point
per line at 6 decimals, with '#' comment headers carrying the face label
and material normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ZeroFlatnessInput
from .fitting import PointCloud, fit_plane_lsq, flatness
from .geom import RigidTransform, rotation_about_axis, rotation_between, unit, vec

# Raw texture height scale in mm; downstream flatness scaling makes the
# actual value irrelevant, it only has to be nonzero and well conditioned.
DEFAULT_TEXTURE_AMPLITUDE = 0.01

# Fixed low spatial frequencies (cycles across the patch) and relative
# weights of the three texture waves; phases come from the seed.
_TEXTURE_FREQS = ((0.9, 0.4), (0.3, 1.1), (0.7, 0.8))
_TEXTURE_WEIGHTS = (1.0, 0.65, 0.4)
_NOISE_FRACTION = 0.1

_NORMALIZE_TOL = 5e-14
_COORD_FORMAT = "{:.6f} {:.6f} {:.6f}"


@dataclass(frozen=True)
class PartGeometry:
    """Nominal box-with-hole geometry, mm.

    length runs along X, depth along Y, height along Z. The hole is bored
    into the top face along -Z.
    """

    length: float = 30.0
    depth: float = 30.0
    height: float = 15.0
    hole_center: tuple = (15.0, 15.0)
    hole_radius: float = 5.0
    hole_depth: float = 10.0
    grid_counts: tuple = (5, 5)
    bore_stations: int = 3
    bore_points_per_ring: int = 8

    def __post_init__(self):
        for name in ("length", "depth", "height", "hole_radius", "hole_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        cx, cy = self.hole_center
        r = self.hole_radius
        if not (r < cx < self.length - r and r < cy < self.depth - r):
            raise ValueError("hole must lie strictly inside the top face")
        if self.hole_depth >= self.height:
            raise ValueError("hole_depth must be smaller than height")
        if min(self.grid_counts) < 3:
            raise ValueError("grid_counts must be at least 3x3")
        if self.bore_stations < 2 or self.bore_points_per_ring < 3:
            raise ValueError("bore sampling needs 2+ stations of 3+ points")


@dataclass(frozen=True)
class DefectSpec:
    """Controlled defects of one virtual part.

    angle_deviation_deg is the amount the top/side angle exceeds 90
    degrees; texture_seed drives the surface textures.
    """

    flatness_top: float
    flatness_side: float
    angle_deviation_deg: float
    texture_seed: int = 0

    def __post_init__(self):
        if self.flatness_top < 0 or self.flatness_side < 0:
            raise ValueError("flatness values must be >= 0")
        if not 0.0 <= self.angle_deviation_deg <= 5.0:
            raise ValueError("angle_deviation_deg must be within [0, 5] degrees")


@dataclass(frozen=True)
class PartModel:
    """Assembled virtual part: three faces, bore points, and their recipe."""

    top_face: PointCloud
    side_face: PointCloud
    aux_face: PointCloud
    bore_points: PointCloud
    geometry: PartGeometry
    defects: DefectSpec

    def transformed(self, pose: RigidTransform) -> "PartModel":
        """Rigidly move every cloud of the part (geometry/defects unchanged)."""
        return PartModel(
            self.top_face.transformed(pose),
            self.side_face.transformed(pose),
            self.aux_face.transformed(pose),
            self.bore_points.transformed(pose),
            self.geometry,
            self.defects,
        )


def generate_texture(
    grid_counts=(5, 5),
    seed: int = 0,
    extent=(30.0, 30.0),
    amplitude: float = DEFAULT_TEXTURE_AMPLITUDE,
    label: str = "patch",
) -> PointCloud:
    """Seeded synthetic surface texture on a regular grid.

    The patch is centred on the origin with +Z material normal; heights are
    three low-frequency cosine waves with seeded phases plus seeded uniform
    noise at 10% of the wave amplitude. Identical inputs give bit-identical
    clouds.
    """
    nx, ny = grid_counts
    if nx < 3 or ny < 3:
        raise ValueError("grid_counts must be at least 3x3")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(_TEXTURE_FREQS))
    lx, ly = extent
    xs = np.linspace(-lx / 2.0, lx / 2.0, nx)
    ys = np.linspace(-ly / 2.0, ly / 2.0, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    x = gx.ravel()
    y = gy.ravel()
    z = np.zeros_like(x)
    for (fx, fy), w, phase in zip(_TEXTURE_FREQS, _TEXTURE_WEIGHTS, phases):
        z += w * np.cos(2.0 * np.pi * (fx * x / lx + fy * y / ly) + phase)
    z *= amplitude
    z += _NOISE_FRACTION * amplitude * rng.uniform(-1.0, 1.0, size=x.shape)
    return PointCloud(np.column_stack([x, y, z]), label)


def normalize_patch(cloud: PointCloud, max_iter: int = 100) -> PointCloud:
    """Rigidly move a patch so its Gaussian plane is exactly Z=0, normal +Z.

    The cloud is first brought upright (material normal to +Z), then
    fit-and-realign steps repeat until the fitted coefficients vanish; on a
    patch that is already normalized this is the identity. Distances
    between points are preserved exactly (every move is rigid), so the
    z-coordinates of the result are the Gaussian fit residuals up to
    second-order terms in the original tilt.
    """
    z_hat = vec(0.0, 0.0, 1.0)
    pre = rotation_between(cloud.material_normal, z_hat)
    out = PointCloud(cloud.points @ pre.T, cloud.label, z_hat)
    for _ in range(max_iter):
        sol = fit_plane_lsq(out)
        if max(abs(sol.alpha), abs(sol.beta), abs(sol.omega)) < _NORMALIZE_TOL:
            return out
        rot = rotation_between(sol.plane.normal, z_hat)
        # Rotate the fitted plane level, then drop it onto Z=0.
        pts = out.points @ rot.T
        pts[:, 2] -= sol.plane.offset
        out = PointCloud(pts, out.label, z_hat)
    raise RuntimeError("normalization did not converge")  # pragma: no cover


def scale_flatness(cloud: PointCloud, target: float) -> PointCloud:
    """Scale a normalized patch's heights to hit a flatness target exactly.

    The cloud must be normalized (Gaussian plane Z=0); only z-coordinates
    change. Raises ZeroFlatnessInput when asked to scale a coplanar patch
    to a nonzero target.
    """
    if target < 0:
        raise ValueError("target flatness must be >= 0")
    sol = fit_plane_lsq(cloud)
    if max(abs(sol.alpha), abs(sol.beta), abs(sol.omega)) > 1e-9:
        raise ValueError("cloud must be normalized before flatness scaling")
    pts = cloud.points.copy()
    if target == 0.0:
        pts[:, 2] = 0.0
        return PointCloud(pts, cloud.label, cloud.material_normal)
    current = float(pts[:, 2].max() - pts[:, 2].min())
    if current < 1e-15:
        raise ZeroFlatnessInput("coplanar patch cannot reach a nonzero flatness")
    pts[:, 2] *= target / current
    return PointCloud(pts, cloud.label, cloud.material_normal)


def place_face(cloud: PointCloud, pose: RigidTransform) -> PointCloud:
    """Rigidly place a canonical patch onto the part."""
    return cloud.transformed(pose)


def top_face_pose(geometry: PartGeometry) -> RigidTransform:
    """Centre of the top face, outward normal +Z."""
    return RigidTransform(
        np.eye(3), vec(geometry.length / 2.0, geometry.depth / 2.0, geometry.height)
    )


def side_face_pose(geometry: PartGeometry, angle_deviation_deg: float) -> RigidTransform:
    """Side face at Y=0 (outward normal -Y), tilted about the bottom edge.

    The tilt leans the top of the face toward the material (+Y) so the
    interior top/side angle opens to 90 degrees plus the deviation.
    """
    upright = RigidTransform(
        np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
        vec(geometry.length / 2.0, 0.0, geometry.height / 2.0),
    )
    tilt = rotation_about_axis(vec(1.0, 0.0, 0.0), -math.radians(angle_deviation_deg))
    return RigidTransform(tilt, vec(0.0, 0.0, 0.0)).compose(upright)


def aux_face_pose(geometry: PartGeometry) -> RigidTransform:
    """Auxiliary face at X=0, outward normal -X."""
    return RigidTransform(
        np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
        vec(0.0, geometry.depth / 2.0, geometry.height / 2.0),
    )


def _bore_cloud(geometry: PartGeometry) -> PointCloud:
    """Defect-free cylinder sampling: rings at evenly spaced depths."""
    cx, cy = geometry.hole_center
    r = geometry.hole_radius
    zs = [
        geometry.height - geometry.hole_depth * (2 * k + 1) / (2 * geometry.bore_stations)
        for k in range(geometry.bore_stations)
    ]
    angles = np.linspace(0.0, 2.0 * np.pi, geometry.bore_points_per_ring, endpoint=False)
    pts = [
        (cx + r * math.cos(a), cy + r * math.sin(a), z) for z in zs for a in angles
    ]
    return PointCloud(np.array(pts), "bore", vec(0.0, 0.0, -1.0))


def _make_face(geometry, extent, target_flatness, seed, pose, label, amplitude):
    if target_flatness == 0.0:
        amplitude = 0.0  # exactly coplanar face, no texture to erase
    patch = generate_texture(
        geometry.grid_counts, seed, extent=extent, amplitude=amplitude, label=label
    )
    patch = normalize_patch(patch)
    patch = scale_flatness(patch, target_flatness)
    return place_face(patch, pose)


def build_part(geometry: PartGeometry, defects: DefectSpec) -> PartModel:
    """Assemble one virtual part from its geometry and defect recipe.

    Face textures use decorrelated sub-seeds (seed*10 + face index). The
    auxiliary face and the bore are defect-free.
    """
    base = defects.texture_seed * 10
    top = _make_face(
        geometry,
        (geometry.length, geometry.depth),
        defects.flatness_top,
        base + 0,
        top_face_pose(geometry),
        "top",
        DEFAULT_TEXTURE_AMPLITUDE,
    )
    side = _make_face(
        geometry,
        (geometry.length, geometry.height),
        defects.flatness_side,
        base + 1,
        side_face_pose(geometry, defects.angle_deviation_deg),
        "side",
        DEFAULT_TEXTURE_AMPLITUDE,
    )
    aux = _make_face(
        geometry,
        (geometry.height, geometry.depth),
        0.0,
        base + 2,
        aux_face_pose(geometry),
        "aux",
        0.0,
    )
    return PartModel(top, side, aux, _bore_cloud(geometry), geometry, defects)


def export_points(cloud: PointCloud, path) -> None:
    """Write a cloud as a text point file (one "X Y Z" line per point).

    Coordinates are mm at 6 decimals with '.' as the decimal mark. Leading
    '#' comments carry the face label and material normal so a round trip
    preserves them.
    """
    path = Path(path)
    lines = [f"# face: {cloud.label}"]
    mn = cloud.material_normal
    lines.append("# material_normal: " + _COORD_FORMAT.format(mn[0], mn[1], mn[2]))
    for p in cloud.points:
        lines.append(_COORD_FORMAT.format(p[0], p[1], p[2]))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def import_points(path) -> PointCloud:
    """Read a text point file written by export_points.

    Raises ParseError with the offending 1-based line number on malformed
    content; '#' comment lines and blank lines are skipped.
    """
    path = Path(path)
    label = ""
    material_normal = vec(0.0, 0.0, 1.0)
    points = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("face:"):
                    label = body[len("face:"):].strip()
                elif body.startswith("material_normal:"):
                    fields = body[len("material_normal:"):].split()
                    try:
                        material_normal = unit([float(f) for f in fields])
                    except (ValueError, IndexError):
                        raise ParseError("malformed material_normal comment", lineno)
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ParseError(f"expected 3 coordinates, got {len(fields)}", lineno)
            try:
                points.append([float(f) for f in fields])
            except ValueError:
                raise ParseError(f"non-numeric coordinate in {line!r}", lineno)
    if not points:
        raise ParseError("file contains no points", 1)
    return PointCloud(np.array(points), label, material_normal)


def face_angle_deg(a: PointCloud, b: PointCloud) -> float:
    """Interior dihedral angle between two faces' Gaussian planes, degrees.

    Measured through the material (the supplement of the angle between the
    outward normals): a perfect box corner reads 90, a side face leaning
    into the material reads 90 plus the lean.
    """
    na = fit_plane_lsq(a).plane.normal
    nb = fit_plane_lsq(b).plane.normal
    return 180.0 - math.degrees(math.acos(float(np.clip(np.dot(na, nb), -1.0, 1.0))))
