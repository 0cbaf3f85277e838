"""Command-line front end: generate parts, run the study, analyze results.

Subcommands
    generate   write one directory of point files per experiment
    run        execute the full study, emit results.csv and effects.json
    analyze    recompute effects.json from a stored results.csv

Configuration is a JSON file with full defaults baked in, so ``virtmet
run`` with no arguments reproduces the default study. Exit codes: 0
success, 1 usage or configuration error, 2 pipeline error. The output
directory can also be set through the VIRTMET_OUT environment variable
(precedence: --out flag, then VIRTMET_OUT, then config, then default).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .datum import VARIANTS
from .doe import STUDY_FACTORS, FactorSpec, build_plan, main_effects
from .errors import ConfigError, IncompletePlan, ParseError, WorkbenchError
from .virtpart import PartGeometry, build_part, export_points

DEFAULT_SEED = 1
DEFAULT_OUT = "study_out"
ENV_OUT = "VIRTMET_OUT"

CSV_HEADER = (
    "experiment,flatnessTop,flatnessSide,angleDeg,variant,holeX,holeY,deviationY"
)


@dataclass(frozen=True)
class StudyConfig:
    """Fully resolved study configuration."""

    geometry: PartGeometry
    factors: tuple
    variants: tuple  # variant names, measurement order
    seed: int
    out_dir: Path


def _require(condition, path, message):
    if not condition:
        raise ConfigError(f"{path}: {message}")


def _geometry_from_dict(data: dict) -> PartGeometry:
    known = {
        "length": "length",
        "depth": "depth",
        "height": "height",
        "holeCenter": "hole_center",
        "holeRadius": "hole_radius",
        "holeDepth": "hole_depth",
        "gridCounts": "grid_counts",
        "boreStations": "bore_stations",
        "borePointsPerRing": "bore_points_per_ring",
    }
    kwargs = {}
    for key, value in data.items():
        _require(key in known, f"geometry.{key}", "unknown field")
        if key in ("holeCenter", "gridCounts"):
            _require(
                isinstance(value, (list, tuple)) and len(value) == 2,
                f"geometry.{key}",
                "expected a pair",
            )
            value = tuple(value)
        kwargs[known[key]] = value
    try:
        return PartGeometry(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"geometry: {exc}")


def _factors_from_list(data) -> tuple:
    factors = []
    for i, item in enumerate(data):
        path = f"factors[{i}]"
        _require(isinstance(item, dict), path, "expected an object")
        _require("name" in item and "levels" in item, path, "needs name and levels")
        try:
            factors.append(FactorSpec(item["name"], tuple(item["levels"])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}")
    names = {"flatnessTop", "flatnessSide", "angleDeviation"}
    for f in factors:
        _require(f.name in names, f"factors.{f.name}", "unknown factor name")
    return tuple(factors)


def load_config(path=None, seed=None, out_dir=None, variants=None) -> StudyConfig:
    """Load a config file (optional) and apply flag/env overrides."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file: invalid JSON ({exc})")
        _require(isinstance(data, dict), "config", "top level must be an object")
    geometry = _geometry_from_dict(data.get("geometry", {}))
    factors = _factors_from_list(data.get("factors", [])) or STUDY_FACTORS
    names = variants or data.get("variants") or list(VARIANTS)
    for name in names:
        _require(name in VARIANTS, f"variants.{name}", "unknown variant")
    if seed is None:
        seed = data.get("seed", DEFAULT_SEED)
    _require(isinstance(seed, int), "seed", "must be an integer")
    if out_dir is None:
        out_dir = os.environ.get(ENV_OUT) or data.get("outDir", DEFAULT_OUT)
    return StudyConfig(geometry, factors, tuple(names), seed, Path(out_dir))


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def cmd_generate(config: StudyConfig, plan=None) -> Path:
    """Write per-experiment directories of face/bore point files."""
    if plan is None:
        plan = build_plan(config.factors)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for i in range(1, len(plan.rows) + 1):
        defects = plan.row_defects(i, texture_seed=config.seed * 100 + i)
        part = build_part(config.geometry, defects)
        exp_dir = out / f"exp_{i:02d}"
        exp_dir.mkdir(exist_ok=True)
        export_points(part.top_face, exp_dir / "top.txt")
        export_points(part.side_face, exp_dir / "side.txt")
        export_points(part.aux_face, exp_dir / "aux.txt")
        export_points(part.bore_points, exp_dir / "bore.txt")
        manifest = {
            "experiment": i,
            "flatnessTop": defects.flatness_top,
            "flatnessSide": defects.flatness_side,
            "angleDeg": defects.angle_deviation_deg,
            "textureSeed": defects.texture_seed,
        }
        (exp_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return out


def _rounded_records(records):
    """Deviations as they appear in the CSV (6 decimals), for analysis."""
    rounded = []
    for rec in records:
        devs = {name: float(_fmt(v)) for name, v in rec.deviations.items()}
        rounded.append(rec.__class__(rec.experiment_index, rec.defects, devs))
    return rounded


def _effects_payload(records, variants, factors) -> dict:
    payload = {}
    for name in variants:
        report = main_effects(records, name, factors)
        payload[name] = {
            "variant": report.variant,
            "levelMeans": {
                k: [round(v, 9) for v in means] for k, means in report.level_means.items()
            },
            "ranges": {k: round(v, 9) for k, v in report.ranges.items()},
            "dominant": report.dominant,
            "angleGroups": [
                {
                    "angleDeg": g.angle_deg,
                    "experiments": list(g.experiments),
                    "deviations": [round(v, 9) for v in g.deviations],
                    "spread": round(g.spread, 9),
                }
                for g in report.angle_groups
            ],
        }
    return payload


def _write_effects(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_run(config: StudyConfig, plan=None) -> Path:
    """Run the full study; write results.csv and effects.json."""
    from .datum import DEFAULT_VARIANTS, deviation_table
    from .doe import RunRecord

    if plan is None:
        plan = build_plan(config.factors)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER]
    records = []
    for i in range(1, len(plan.rows) + 1):
        defects = plan.row_defects(i, texture_seed=config.seed * 100 + i)
        part = build_part(config.geometry, defects)
        table = {r.variant.name: r for r in deviation_table(part, DEFAULT_VARIANTS)}
        records.append(RunRecord(i, defects, {n: r.deviation_y for n, r in table.items()}))
        for name in config.variants:
            r = table[name]
            lines.append(
                ",".join(
                    [
                        str(i),
                        _fmt(defects.flatness_top),
                        _fmt(defects.flatness_side),
                        _fmt(defects.angle_deviation_deg),
                        name,
                        _fmt(r.hole_xy[0]),
                        _fmt(r.hole_xy[1]),
                        _fmt(r.deviation_y),
                    ]
                )
            )
    (out / "results.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    payload = _effects_payload(_rounded_records(records), config.variants, config.factors)
    _write_effects(payload, out / "effects.json")
    return out


def read_results_csv(path) -> tuple:
    """Parse a results.csv back into run records.

    Returns (records, variant names in first-appearance order). Raises
    ParseError with the offending line number, IncompletePlan downstream
    when experiments are missing.
    """
    from .doe import RunRecord
    from .virtpart import DefectSpec

    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ParseError("missing or wrong results.csv header", 1)
    by_experiment = {}
    variants = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 8:
            raise ParseError(f"expected 8 fields, got {len(fields)}", lineno)
        try:
            exp = int(fields[0])
            f_top, f_side, angle = (float(fields[i]) for i in (1, 2, 3))
            variant = fields[4]
            deviation = float(fields[7])
            float(fields[5]), float(fields[6])
        except ValueError as exc:
            raise ParseError(str(exc), lineno)
        if variant not in VARIANTS:
            raise ParseError(f"unknown variant {variant!r}", lineno)
        entry = by_experiment.setdefault(
            exp, {"defects": (f_top, f_side, angle), "devs": {}}
        )
        entry["devs"][variant] = deviation
        if variant not in variants:
            variants.append(variant)
    records = []
    for exp in sorted(by_experiment):
        f_top, f_side, angle = by_experiment[exp]["defects"]
        records.append(
            RunRecord(
                exp,
                DefectSpec(f_top, f_side, angle, texture_seed=0),
                by_experiment[exp]["devs"],
            )
        )
    return records, variants


def cmd_analyze(results_path, out_path=None, factors=STUDY_FACTORS) -> Path:
    """Recompute effects.json from a stored results.csv."""
    records, variants = read_results_csv(results_path)
    for rec in records:
        missing = [v for v in variants if v not in rec.deviations]
        if missing:
            raise IncompletePlan(
                f"experiment {rec.experiment_index} lacks variants {missing}"
            )
    payload = _effects_payload(records, variants, factors)
    if out_path is None:
        out_path = Path(results_path).parent / "effects.json"
    out_path = Path(out_path)
    _write_effects(payload, out_path)
    return out_path


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="virtmet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate", "write per-experiment point files"),
        ("run", "run the study and emit results.csv + effects.json"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="override the study seed")
        p.add_argument("--out", help="output directory")
        p.add_argument(
            "--variant",
            action="append",
            choices=sorted(VARIANTS),
            help="restrict reported variants (repeatable)",
        )
    p = sub.add_parser("analyze", help="recompute effects.json from results.csv")
    p.add_argument("results", help="path to results.csv")
    p.add_argument("--out", help="output path for effects.json")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"virtmet: error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "analyze":
            out = cmd_analyze(args.results, args.out)
            print(f"wrote {out}")
            return 0
        config = load_config(
            args.config, seed=args.seed, out_dir=args.out, variants=args.variant
        )
    except ConfigError as exc:
        print(f"virtmet: config error: {exc}", file=sys.stderr)
        return 1
    except (WorkbenchError, OSError) as exc:
        print(f"virtmet: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "generate":
            out = cmd_generate(config)
            print(f"wrote {out}")
        else:
            out = cmd_run(config)
            print(f"wrote {out / 'results.csv'} and {out / 'effects.json'}")
        return 0
    except (WorkbenchError, OSError) as exc:
        print(f"virtmet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
