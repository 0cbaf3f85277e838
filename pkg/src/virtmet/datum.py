"""Plane/Line/Point datum reference frames and hole measurement.

Four named construction recipes are shipped:

* Rep1: least-squares top, tangent side constrained perpendicular to top.
* Rep2: least-squares top and side, frame line by plane intersection. This
  is the no-options construction and serves as the baseline all other
  variants are compared against.
* Rep3: tangent top, tangent side constrained perpendicular to top - the
  construction a GPS-conforming datum system calls for.
* Rep4: tangent top, least-squares side, plane intersection.

The frame is built the same way for every variant: the top association is
the primary plane (+Z), the side association the secondary, their
intersection line carries the X axis, and the auxiliary face's Gaussian
plane pins the origin along the line. The hole position is the bore axis
pierced through the primary plane, expressed in frame coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fitting import (
    PointCloud,
    fit_cylinder,
    fit_plane_lsq,
    fit_plane_lsq_constrained,
    fit_plane_tangent,
    fit_plane_tangent_constrained,
)
from .geom import (
    Cylinder,
    DatumFrame,
    Line3,
    Plane,
    intersect_line_plane,
    intersect_planes,
    to_frame,
)
from .virtpart import PartModel


class Association(Enum):
    LEAST_SQUARES = "least_squares"
    TANGENT = "tangent"


class SideConstraint(Enum):
    INTERSECTION = "intersection"
    PERPENDICULAR_TO_TOP = "perpendicular_to_top"


@dataclass(frozen=True)
class VariantSpec:
    """One datum-construction recipe."""

    name: str
    top_association: Association
    side_association: Association
    side_constraint: SideConstraint


REP1 = VariantSpec(
    "Rep1", Association.LEAST_SQUARES, Association.TANGENT, SideConstraint.PERPENDICULAR_TO_TOP
)
REP2 = VariantSpec(
    "Rep2", Association.LEAST_SQUARES, Association.LEAST_SQUARES, SideConstraint.INTERSECTION
)
REP3 = VariantSpec(
    "Rep3", Association.TANGENT, Association.TANGENT, SideConstraint.PERPENDICULAR_TO_TOP
)
REP4 = VariantSpec(
    "Rep4", Association.TANGENT, Association.LEAST_SQUARES, SideConstraint.INTERSECTION
)

DEFAULT_VARIANTS = (REP1, REP2, REP3, REP4)
VARIANTS = {v.name: v for v in DEFAULT_VARIANTS}

BASELINE = REP2


@dataclass(frozen=True)
class MeasurementResult:
    """Hole position of one part under one datum variant.

    hole_xy is the bore-axis/primary-plane pierce point in frame
    coordinates; deviation_y is this variant's hole Y minus the baseline
    (Rep2) hole Y for the same part.
    """

    variant: VariantSpec
    frame: DatumFrame
    hole_xy: tuple
    deviation_y: float


def _associate(cloud: PointCloud, kind: Association) -> Plane:
    if kind is Association.LEAST_SQUARES:
        return fit_plane_lsq(cloud).plane
    return fit_plane_tangent(cloud).plane


def _associate_constrained(cloud: PointCloud, kind: Association, primary: Plane) -> Plane:
    if kind is Association.LEAST_SQUARES:
        return fit_plane_lsq_constrained(cloud, primary)
    return fit_plane_tangent_constrained(cloud, primary).plane


def build_frame(part: PartModel, variant: VariantSpec) -> DatumFrame:
    """Construct the Plane/Line/Point frame of a part under one variant.

    Raises NearParallel when the primary and secondary planes do not
    intersect; fitting errors propagate.
    """
    primary = _associate(part.top_face, variant.top_association)
    if variant.side_constraint is SideConstraint.PERPENDICULAR_TO_TOP:
        secondary = _associate_constrained(part.side_face, variant.side_association, primary)
    else:
        secondary = _associate(part.side_face, variant.side_association)
    line = intersect_planes(primary, secondary)
    z_axis = primary.normal
    x_axis = line.direction
    y_axis = np.cross(z_axis, x_axis)
    tertiary = fit_plane_lsq(part.aux_face).plane
    origin = intersect_line_plane(line, tertiary)
    return DatumFrame(origin, x_axis, y_axis, z_axis)


def _primary_plane(part: PartModel, variant: VariantSpec) -> Plane:
    return _associate(part.top_face, variant.top_association)


def fit_bore(part: PartModel) -> Cylinder:
    """Fit the bore cylinder, seeded with the bore cloud's own axis hint."""
    bore = part.bore_points
    seed_axis = Line3(bore.points.mean(axis=0), bore.material_normal)
    return fit_cylinder(bore, seed_axis)


def _measure(part: PartModel, variant: VariantSpec, bore: Cylinder):
    frame = build_frame(part, variant)
    hole_world = intersect_line_plane(bore.axis, _primary_plane(part, variant))
    local = to_frame(frame, hole_world)
    return frame, (float(local[0]), float(local[1]))


def measure_hole(part: PartModel, variant: VariantSpec) -> MeasurementResult:
    """Measure the hole position under one variant, referenced to Rep2."""
    bore = fit_bore(part)
    frame, hole_xy = _measure(part, variant, bore)
    if variant == BASELINE:
        deviation = 0.0
    else:
        _, base_xy = _measure(part, BASELINE, bore)
        deviation = hole_xy[1] - base_xy[1]
    return MeasurementResult(variant, frame, hole_xy, deviation)


def deviation_table(part: PartModel, variants=DEFAULT_VARIANTS) -> list:
    """Measure the hole under every variant, sharing a single bore fit."""
    bore = fit_bore(part)
    _, base_xy = _measure(part, BASELINE, bore)
    results = []
    for variant in variants:
        frame, hole_xy = _measure(part, variant, bore)
        deviation = 0.0 if variant == BASELINE else hole_xy[1] - base_xy[1]
        results.append(MeasurementResult(variant, frame, hole_xy, deviation))
    return results
