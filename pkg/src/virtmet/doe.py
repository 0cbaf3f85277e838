"""Taguchi design of experiments over virtual parts.

Covers array selection, the L9 orthogonal array, plan construction, batch
execution (build part, measure under every variant) and the standard
main-effects/range analysis plus the angle-grouped variation table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datum import DEFAULT_VARIANTS, deviation_table
from .errors import IncompletePlan, OutOfTable, TooManyFactors
from .virtpart import DefectSpec, PartGeometry, build_part

# Array selector: rows are factor level counts, columns parameter counts
# 2..10. Entry = smallest standard orthogonal array for that combination.
_SELECTOR = {
    2: ("L4", "L4", "L8", "L8", "L8", "L8", "L12", "L12", "L12"),
    3: ("L9", "L9", "L9", "L9", "L18", "L18", "L18", "L27", "L27"),
    4: ("L16", "L16", "L16", "L16", "L32", "L32", "L32", "L32", "L32"),
    5: ("L25", "L25", "L25", "L25", "L25", "L50", "L50", "L50", "L50"),
}

_L9_ROWS = (
    (1, 1, 1, 1),
    (1, 2, 2, 2),
    (1, 3, 3, 3),
    (2, 1, 2, 3),
    (2, 2, 3, 1),
    (2, 3, 1, 2),
    (3, 1, 3, 2),
    (3, 2, 1, 3),
    (3, 3, 2, 1),
)


@dataclass(frozen=True)
class FactorSpec:
    """A named factor and its physical level values (level order 1, 2, 3...)."""

    name: str
    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if len(set(self.levels)) != len(self.levels):
            raise ValueError("factor levels must be distinct")


# The study's factors: top-face flatness, side-face flatness (machining
# grades rough milling / finish milling / grinding) and the amount the
# top/side angle exceeds 90 degrees.
STUDY_FACTORS = (
    FactorSpec("flatnessTop", (0.03, 0.006, 0.0015)),
    FactorSpec("flatnessSide", (0.03, 0.006, 0.0015)),
    FactorSpec("angleDeviation", (0.1, 0.02, 1.0)),
)

_FACTOR_FIELD = {
    "flatnessTop": "flatness_top",
    "flatnessSide": "flatness_side",
    "angleDeviation": "angle_deviation_deg",
}


@dataclass(frozen=True)
class TaguchiArray:
    """Orthogonal array of 1-based level indices (rows x columns)."""

    name: str
    matrix: tuple

    def n_rows(self) -> int:
        return len(self.matrix)

    def n_columns(self) -> int:
        return len(self.matrix[0])

    def is_orthogonal(self) -> bool:
        """Every ordered level pair appears equally often in every column pair."""
        cols = self.n_columns()
        for a in range(cols):
            for b in range(a + 1, cols):
                counts = {}
                for row in self.matrix:
                    key = (row[a], row[b])
                    counts[key] = counts.get(key, 0) + 1
                if len(set(counts.values())) != 1:
                    return False
                levels_a = {row[a] for row in self.matrix}
                levels_b = {row[b] for row in self.matrix}
                if len(counts) != len(levels_a) * len(levels_b):
                    return False
        return True


def select_array(n_levels: int, n_params: int) -> str:
    """Smallest standard Taguchi array name for a levels/parameters pair.

    Raises OutOfTable outside 2..5 levels or 2..10 parameters.
    """
    if n_levels not in _SELECTOR or not 2 <= n_params <= 10:
        raise OutOfTable(f"no array tabulated for {n_levels} levels, {n_params} parameters")
    return _SELECTOR[n_levels][n_params - 2]


def l9_matrix() -> TaguchiArray:
    """The L9 array: 3-level, 4 columns, 9 runs."""
    return TaguchiArray("L9", _L9_ROWS)


def taguchi_array(name: str) -> TaguchiArray:
    """Fetch a shipped array by name; only L9 ships with this study."""
    if name == "L9":
        return l9_matrix()
    raise NotImplementedError(f"array {name} is tabulated in the selector but not shipped")


@dataclass(frozen=True)
class DoePlan:
    """Factors assigned to the leading array columns; one row per run."""

    factors: tuple
    array: TaguchiArray
    rows: tuple  # tuple of {factor name: physical value} dicts

    def row_defects(self, index: int, texture_seed: int = 0) -> DefectSpec:
        """DefectSpec for a 1-based plan row; unassigned defects are zero."""
        row = self.rows[index - 1]
        kwargs = {"flatness_top": 0.0, "flatness_side": 0.0, "angle_deviation_deg": 0.0}
        for name, value in row.items():
            kwargs[_FACTOR_FIELD[name]] = value
        return DefectSpec(texture_seed=texture_seed, **kwargs)


def build_plan(factors, array: TaguchiArray = None) -> DoePlan:
    """Assign factors to the first columns of an array (default L9)."""
    if array is None:
        array = l9_matrix()
    factors = tuple(factors)
    if len(factors) > array.n_columns():
        raise TooManyFactors(
            f"{len(factors)} factors exceed the {array.n_columns()} columns of {array.name}"
        )
    rows = tuple(
        {f.name: f.levels[row[i] - 1] for i, f in enumerate(factors)} for row in array.matrix
    )
    return DoePlan(factors, array, rows)


@dataclass(frozen=True)
class RunRecord:
    """Signed per-variant hole-position deviations of one experiment."""

    experiment_index: int
    defects: DefectSpec
    deviations: dict  # variant name -> deviation_y, mm


def run_plan(plan: DoePlan, geometry: PartGeometry = None, seed: int = 0) -> list:
    """Build and measure one virtual part per plan row.

    Deterministic for a fixed seed: row textures use sub-seed
    seed*100 + row index.
    """
    if geometry is None:
        geometry = PartGeometry()
    records = []
    for i in range(1, len(plan.rows) + 1):
        defects = plan.row_defects(i, texture_seed=seed * 100 + i)
        part = build_part(geometry, defects)
        results = deviation_table(part, DEFAULT_VARIANTS)
        records.append(
            RunRecord(i, defects, {r.variant.name: r.deviation_y for r in results})
        )
    return records


@dataclass(frozen=True)
class AngleGroup:
    """The runs sharing one angle level: |deviation| values and their spread."""

    angle_deg: float
    experiments: tuple
    deviations: tuple
    spread: float


@dataclass(frozen=True)
class EffectsReport:
    """Main-effects summary of one variant's |deviation| responses.

    level_means maps factor name to the mean response at each level (level
    order as declared); ranges is max minus min of those means. dominant
    is None when every range is zero (constant response, nothing to rank).
    """

    variant: str
    level_means: dict
    ranges: dict
    dominant: object
    angle_groups: tuple


def _check_complete(records, plan_size: int = 9):
    indices = sorted(r.experiment_index for r in records)
    if indices != list(range(1, plan_size + 1)):
        raise IncompletePlan(
            f"expected experiments 1..{plan_size} exactly once, got {indices}"
        )


def _level_index(value: float, levels) -> int:
    return min(range(len(levels)), key=lambda i: abs(levels[i] - value))


def _responses_by_level(records, variant: str, factor: FactorSpec):
    field = _FACTOR_FIELD[factor.name]
    buckets = [[] for _ in factor.levels]
    for rec in records:
        value = getattr(rec.defects, field)
        buckets[_level_index(value, factor.levels)].append(abs(rec.deviations[variant]))
    return buckets


def main_effects(records, variant: str, factors=STUDY_FACTORS) -> EffectsReport:
    """Level means and ranges of |deviation| per factor, dominant factor.

    Records must cover the full plan (each factor level the same number of
    times); raises IncompletePlan otherwise. Ties on the largest range are
    broken toward the lexicographically smallest factor name.
    """
    records = list(records)
    _check_complete(records)
    level_means = {}
    ranges = {}
    per_level = len(records) // len(factors[0].levels)
    for factor in factors:
        buckets = _responses_by_level(records, variant, factor)
        if any(len(b) != per_level for b in buckets):
            raise IncompletePlan(f"unbalanced levels for factor {factor.name}")
        means = tuple(sum(b) / len(b) for b in buckets)
        level_means[factor.name] = means
        ranges[factor.name] = max(means) - min(means)
    if max(ranges.values()) == 0.0:
        dominant = None
    else:
        dominant = min(
            (name for name in ranges if ranges[name] == max(ranges.values()))
        )
    return EffectsReport(
        variant, level_means, ranges, dominant, angle_grouped_variation(records, variant, factors)
    )


def angle_grouped_variation(records, variant: str, factors=STUDY_FACTORS) -> tuple:
    """Group runs by angle level; per group the |deviation| values and spread."""
    records = list(records)
    _check_complete(records)
    angle = next(f for f in factors if f.name == "angleDeviation")
    field = _FACTOR_FIELD[angle.name]
    groups = []
    for li, level in enumerate(angle.levels):
        members = sorted(
            (
                (rec.experiment_index, abs(rec.deviations[variant]))
                for rec in records
                if _level_index(getattr(rec.defects, field), angle.levels) == li
            ),
        )
        values = tuple(v for _, v in members)
        groups.append(
            AngleGroup(
                level,
                tuple(i for i, _ in members),
                values,
                max(values) - min(values) if values else 0.0,
            )
        )
    return tuple(groups)
