"""Run records: a JSON report plus a per-point CSV.

The report is the reproducibility artifact, so serialization is pinned
down hard: keys are sorted, floats go through repr (shortest round-trip),
and reading a report back yields every field bit-exactly. Two runs with
the same config and seed differ only in duration_seconds.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .assessor import DatasetAssessment, RobustnessSpec
from .aggregate import DatasetEstimate
from .errors import ConfigError

POINT_COLUMNS = [
    "index",
    "verdict",
    "samples_used",
    "failures",
    "left_tail",
    "right_tail",
    "center_label",
    "error",
]


def spec_as_dict(spec: RobustnessSpec) -> dict:
    return {
        "kappa": spec.kappa,
        "alpha": spec.alpha,
        "epsilon": spec.epsilon,
        "metric": spec.metric.value,
        "batch_size": spec.batch_size,
        "max_samples": spec.max_samples,
        "seed": spec.seed,
        "strict_alpha": spec.strict_alpha,
    }


def point_rows(result: DatasetAssessment) -> list[dict]:
    """One row per input, in input order; errored points carry the message."""
    by_index = dict(result.errors)
    rows = []
    for i, a in enumerate(result.assessments):
        if a is None:
            rows.append(
                {"index": i, "verdict": "error", "error": by_index.get(i, "unknown")}
            )
        else:
            rows.append(
                {
                    "index": i,
                    "verdict": a.observation.value,
                    "samples_used": a.samples_used,
                    "failures": a.failures,
                    "left_tail": a.final_left_tail,
                    "right_tail": a.final_right_tail,
                    "center_label": a.center_label,
                }
            )
    return rows


def build_report(
    version: str,
    config_echo: dict,
    result: DatasetAssessment,
    estimate: DatasetEstimate | None,
    duration_seconds: float,
) -> dict:
    return {
        "version": version,
        "seed": config_echo["spec"]["seed"],
        "config": config_echo,
        "points": point_rows(result),
        "estimate": estimate.as_dict() if estimate is not None else None,
        "error_count": len(result.errors),
        "duration_seconds": duration_seconds,
    }


def write_report(out_dir: str | Path, report: dict) -> tuple[Path, Path]:
    """Write report.json and points.csv under out_dir, creating it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    points_path = out_dir / "points.csv"
    with open(points_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POINT_COLUMNS)
        for row in report["points"]:
            writer.writerow(
                [
                    repr(row[c]) if isinstance(row.get(c), float) else row.get(c, "")
                    for c in POINT_COLUMNS
                ]
            )
    return report_path, points_path


def read_report(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError:
        raise ConfigError(f"report file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report file {path} is not valid JSON: {exc}") from None
