"""Virtual-metrology workbench.

Generates virtual parts (point clouds with controlled flatness and
perpendicularity defects), associates datum planes under least-squares and
tangent criteria, builds Plane/Line/Point datum frames under four recipes
(Rep1..Rep4), measures a bored hole's position in each frame, and runs a
Taguchi L9 screening study over part quality.
"""

from .datum import (
    BASELINE,
    DEFAULT_VARIANTS,
    REP1,
    REP2,
    REP3,
    REP4,
    VARIANTS,
    Association,
    MeasurementResult,
    SideConstraint,
    VariantSpec,
    build_frame,
    deviation_table,
    fit_bore,
    measure_hole,
)
from .doe import (
    STUDY_FACTORS,
    AngleGroup,
    DoePlan,
    EffectsReport,
    FactorSpec,
    RunRecord,
    TaguchiArray,
    angle_grouped_variation,
    build_plan,
    l9_matrix,
    main_effects,
    run_plan,
    select_array,
    taguchi_array,
)
from .errors import (
    ConfigError,
    DegenerateCloud,
    IncompletePlan,
    NearParallel,
    NoConvergence,
    OutOfTable,
    ParseError,
    TooManyFactors,
    WorkbenchError,
    ZeroFlatnessInput,
)
from .fitting import (
    LsqPlaneSolution,
    PointCloud,
    TangentPlaneSolution,
    fit_circle_lsq,
    fit_cylinder,
    fit_plane_lsq,
    fit_plane_lsq_constrained,
    fit_plane_tangent,
    fit_plane_tangent_constrained,
    flatness,
)
from .geom import (
    Cylinder,
    DatumFrame,
    Line3,
    Plane,
    RigidTransform,
    from_frame,
    intersect_line_plane,
    intersect_planes,
    rotation_about_axis,
    rotation_between,
    signed_distance,
    to_frame,
    unit,
    vec,
)
from .virtpart import (
    DefectSpec,
    PartGeometry,
    PartModel,
    build_part,
    export_points,
    generate_texture,
    import_points,
    face_angle_deg,
    normalize_patch,
    place_face,
    scale_flatness,
)

__version__ = "0.1.0"
