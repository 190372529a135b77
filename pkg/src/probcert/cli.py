"""Command-line front end.

Subcommands:
  assess  run a certification described by a config file, write a report
  bounds  convert decided-verdict counts into corrected bounds
  oracle  audit assessor verdicts against exact ground truth (built-ins)
  sample  dump perturbation draws for one dataset point

A run is described by one JSON config with sections model, dataset, spec,
and output; individual spec keys can be overridden by flags. File paths
inside the config resolve relative to the config file's directory. Exit
codes: 0 ok, 2 config, 3 transport, 4 estimation, 5 internal.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import SIL_KAPPA_PRESETS, aggregate, bounds_from_observed
from .assessor import DatasetAssessment, Observation, RobustnessSpec, assess_dataset
from .dataio import load_dataset
from .errors import ConfigError, EstimationError, ProbcertError, TransportError
from .models import ExternalModel, check_determinism, load_weights
from .oracle import oracle_p_fail
from .perturb import Metric, sample_ball
from .report import build_report, spec_as_dict, write_report
from .streams import Namespace, stream_for_point

log = logging.getLogger("probcert.cli")

_SPEC_KEYS = {
    "kappa",
    "alpha",
    "epsilon",
    "metric",
    "batch_size",
    "max_samples",
    "seed",
    "strict_alpha",
}


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="override spec.seed")
    parser.add_argument("--kappa", type=float, help="override spec.kappa")
    parser.add_argument("--alpha", type=float, help="override spec.alpha")
    parser.add_argument("--epsilon", type=float, help="override spec.epsilon")
    parser.add_argument("--metric", choices=["linf", "l2"], help="override spec.metric")
    parser.add_argument("--batch-size", type=int, help="override spec.batch_size")
    parser.add_argument("--max-samples", type=int, help="override spec.max_samples")
    parser.add_argument(
        "--strict-alpha",
        action="store_true",
        default=None,
        help="spend alpha geometrically across sequential looks",
    )
    parser.add_argument(
        "--sil-preset",
        type=int,
        choices=sorted(SIL_KAPPA_PRESETS),
        help="set kappa from the integrity-level ladder (level L -> 1e-L)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probcert",
        description="probabilistic robustness certification via exact binomial tests",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    assess = sub.add_parser("assess", help="assess a dataset and write a report")
    assess.add_argument("--config", required=True, help="JSON run config")
    assess.add_argument("--workers", type=int, help="worker threads (default: all cores)")
    assess.add_argument("--out-dir", help="report directory (overrides config)")
    _add_spec_flags(assess)

    bounds = sub.add_parser("bounds", help="bounds from decided-verdict counts")
    bounds.add_argument("k_prime", type=int, help="number of robust verdicts")
    bounds.add_argument("n_prime", type=int, help="number of decided points")
    bounds.add_argument("--alpha", type=float, default=0.05)

    oracle = sub.add_parser("oracle", help="audit verdicts against ground truth")
    oracle.add_argument("--config", required=True, help="JSON run config (built-in model)")
    oracle.add_argument("--workers", type=int)
    _add_spec_flags(oracle)

    sample = sub.add_parser("sample", help="dump perturbation draws for a point")
    sample.add_argument("--config", required=True, help="JSON run config")
    sample.add_argument("--index", type=int, default=0, help="dataset point index")
    sample.add_argument("--count", type=int, default=10, help="draws to print")
    _add_spec_flags(sample)

    return parser


def load_config(path: str | Path) -> tuple[dict, Path]:
    """Parse and structurally validate a run config; returns (config, base dir)."""
    path = Path(path)
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")

    unknown = set(cfg) - {"model", "dataset", "spec", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section in ("model", "dataset", "spec"):
        if section not in cfg or not isinstance(cfg[section], dict):
            raise ConfigError(f"config needs a {section!r} section (JSON object)")

    model = cfg["model"]
    has_path, has_command = "path" in model, "command" in model
    if has_path == has_command:
        raise ConfigError("model section needs exactly one of 'path' or 'command'")
    allowed = {"path"} if has_path else {"command", "timeout"}
    unknown = set(model) - allowed
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")

    if "path" not in cfg["dataset"] or set(cfg["dataset"]) != {"path"}:
        raise ConfigError("dataset section must be exactly {\"path\": ...}")

    unknown = set(cfg["spec"]) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"unknown spec keys: {sorted(unknown)}")

    output = cfg.get("output", {})
    if not isinstance(output, dict) or set(output) - {"out_dir"}:
        raise ConfigError("output section may only contain 'out_dir'")

    return cfg, path.parent


def compose_spec(cfg: dict, args: argparse.Namespace) -> RobustnessSpec:
    """Merge the config's spec section with command-line overrides."""
    values = dict(cfg["spec"])
    if args.sil_preset is not None:
        if args.kappa is not None:
            raise ConfigError("--kappa and --sil-preset are mutually exclusive")
        values["kappa"] = SIL_KAPPA_PRESETS[args.sil_preset]
    for key in ("seed", "kappa", "alpha", "epsilon", "batch_size", "max_samples"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    if args.metric is not None:
        values["metric"] = args.metric
    if args.strict_alpha is not None:
        values["strict_alpha"] = args.strict_alpha

    missing = {"kappa", "alpha", "epsilon"} - set(values)
    if missing:
        raise ConfigError(f"spec is missing required keys: {sorted(missing)}")
    if "metric" in values:
        try:
            values["metric"] = Metric(values["metric"])
        except ValueError:
            raise ConfigError(
                f"metric must be 'linf' or 'l2', got {values['metric']!r}"
            ) from None
    try:
        return RobustnessSpec(**values)
    except TypeError as exc:
        raise ConfigError(f"bad spec section: {exc}") from None


def build_model(cfg: dict, base_dir: Path):
    """Construct the model a config describes; external models are not started."""
    model = cfg["model"]
    if "path" in model:
        return load_weights(_resolve(model["path"], base_dir))
    command = model["command"]
    if isinstance(command, str):
        command = shlex.split(command)
    if not isinstance(command, list) or not all(isinstance(c, str) for c in command):
        raise ConfigError("model command must be a string or list of strings")
    timeout = model.get("timeout", 30.0)
    if not isinstance(timeout, (int, float)) or timeout <= 0:
        raise ConfigError(f"model timeout must be a positive number, got {timeout!r}")
    return ExternalModel(command, timeout=float(timeout))


def _resolve(path: str, base_dir: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base_dir / p


def _summarize(result: DatasetAssessment, estimate, report_path: Path) -> None:
    counts = {o: 0 for o in Observation}
    for a in result.assessments:
        if a is not None:
            counts[a.observation] += 1
    print(
        f"decided={counts[Observation.W1] + counts[Observation.W0]} "
        f"w1={counts[Observation.W1]} w0={counts[Observation.W0]} "
        f"inconclusive={counts[Observation.INCONCLUSIVE]} "
        f"errors={len(result.errors)}"
    )
    if estimate is None:
        print("no decided points; estimate unavailable")
    else:
        print(f"p_w={estimate.p_w!r} conservative_p_w={estimate.conservative_p_w!r}")
        print(
            f"verdict-noise bounds: lower={estimate.lower_bound!r} "
            f"upper={estimate.upper_bound!r}"
        )
        print(
            f"p_w exact interval: lower={estimate.p_w_interval_lower!r} "
            f"upper={estimate.p_w_interval_upper!r}"
        )
        print(
            f"composed bounds (supplementary): lower={estimate.composed_lower!r} "
            f"upper={estimate.composed_upper!r}"
        )
    print(f"report: {report_path}")


def cmd_assess(args: argparse.Namespace) -> int:
    cfg, base_dir = load_config(args.config)
    spec = compose_spec(cfg, args)
    out_dir = args.out_dir or cfg.get("output", {}).get("out_dir")
    if out_dir is None:
        raise ConfigError("no output directory: set output.out_dir or pass --out-dir")
    out_dir = Path(out_dir) if args.out_dir else _resolve(out_dir, base_dir)
    workers = args.workers if args.workers is not None else os.cpu_count() or 1

    points = load_dataset(_resolve(cfg["dataset"]["path"], base_dir))
    model = build_model(cfg, base_dir)

    config_echo = {
        "model": cfg["model"],
        "dataset": {
            "path": cfg["dataset"]["path"],
            "points": int(points.shape[0]),
            "dimension": int(points.shape[1]),
        },
        "spec": spec_as_dict(spec),
    }

    started = time.monotonic()
    transport_failure = None
    with _maybe_started(model, points) as live:
        try:
            result = assess_dataset(live, points, spec, workers=workers)
        except TransportError as exc:
            result = getattr(exc, "assessment", None)
            if result is None:
                raise
            transport_failure = exc

    try:
        estimate = aggregate(result.completed, spec.alpha)
    except EstimationError as exc:
        estimate = None
        estimation_failure = exc
    else:
        estimation_failure = None
    duration = time.monotonic() - started

    report = build_report(__version__, config_echo, result, estimate, duration)
    report_path, _ = write_report(out_dir, report)
    _summarize(result, estimate, report_path)

    if transport_failure is not None or result.errors:
        message = transport_failure or f"{len(result.errors)} points failed"
        print(f"transport error: {message}", file=sys.stderr)
        return 3
    if estimation_failure is not None:
        print(f"estimation error: {estimation_failure}", file=sys.stderr)
        return 4
    return 0


class _maybe_started:
    """Start and close an external model around a block; no-op for built-ins.

    External models get a determinism probe on the first dataset point
    before any assessment spends samples.
    """

    def __init__(self, model, points: np.ndarray):
        self.model = model
        self.points = points

    def __enter__(self):
        if isinstance(self.model, ExternalModel):
            self.model.start()
            check_determinism(self.model, self.points[:1])
        return self.model

    def __exit__(self, *exc) -> None:
        if isinstance(self.model, ExternalModel):
            self.model.close()


def cmd_bounds(args: argparse.Namespace) -> int:
    if args.n_prime < 1:
        raise ConfigError(f"n_prime must be >= 1, got {args.n_prime}")
    if not 0 <= args.k_prime <= args.n_prime:
        raise ConfigError(
            f"k_prime must lie in [0, n_prime], got {args.k_prime}/{args.n_prime}"
        )
    if not 0.0 < args.alpha < 0.5:
        raise ConfigError(f"alpha must lie in (0, 0.5), got {args.alpha}")
    p_w = args.k_prime / args.n_prime
    lower, upper = bounds_from_observed(p_w, args.alpha)
    print(f"p_w={p_w:.6f} lower={lower:.6f} upper={upper:.6f}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg, base_dir = load_config(args.config)
    if "command" in cfg["model"]:
        raise ConfigError("oracle audits need a built-in model; got an external one")
    spec = compose_spec(cfg, args)
    workers = args.workers if args.workers is not None else os.cpu_count() or 1
    points = load_dataset(_resolve(cfg["dataset"]["path"], base_dir))
    model = build_model(cfg, base_dir)

    result = assess_dataset(model, points, spec, workers=workers)
    table = {(z, o): 0 for z in (True, False) for o in Observation}
    in_band = 0
    disagree = 0
    decided_outside = 0
    for i, assessment in enumerate(result.assessments):
        point = oracle_p_fail(model, points[i], spec, index=i)
        verdict = assessment.observation
        table[point.z, verdict] += 1
        banded = spec.kappa / 2 <= point.p_x <= 2 * spec.kappa
        in_band += banded
        if not banded and verdict is not Observation.INCONCLUSIVE:
            decided_outside += 1
            disagree += (verdict is Observation.W1) != point.z
        print(
            f"index={i} p_x={point.p_x!r} z={str(point.z).lower()} "
            f"verdict={verdict.value} method={point.method.value}"
        )

    print("agreement (rows: oracle z, columns: verdict):")
    print("            w1      w0      inconclusive")
    for z in (True, False):
        row = "  ".join(f"{table[z, o]:6d}" for o in Observation)
        print(f"z={str(z).lower():5s} {row}")
    print(f"band [kappa/2, 2*kappa]: {in_band} points excluded")
    rate = disagree / decided_outside if decided_outside else 0.0
    print(f"disagreements outside band: {disagree}/{decided_outside} rate={rate:.6f}")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    cfg, base_dir = load_config(args.config)
    spec = compose_spec(cfg, args)
    points = load_dataset(_resolve(cfg["dataset"]["path"], base_dir))
    if not 0 <= args.index < points.shape[0]:
        raise ConfigError(
            f"index {args.index} out of range for {points.shape[0]} points"
        )
    if args.count < 1:
        raise ConfigError(f"count must be >= 1, got {args.count}")
    stream = stream_for_point(spec.seed, args.index, Namespace.SAMPLE)
    draws = sample_ball(points[args.index], spec.epsilon, spec.metric, stream, args.count)
    print(",".join(f"x{i}" for i in range(draws.shape[1])))
    for row in draws:
        print(",".join(repr(float(v)) for v in row))
    return 0


_HANDLERS = {
    "assess": cmd_assess,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "sample": cmd_sample,
}

_LOG_LEVELS = {"debug", "info", "warning", "error"}


def _configure_logging() -> None:
    level_name = os.environ.get("PROBCERT_LOG", "warning").lower()
    if level_name not in _LOG_LEVELS:
        raise ConfigError(
            f"PROBCERT_LOG must be one of {sorted(_LOG_LEVELS)}, got {level_name!r}"
        )
    root = logging.getLogger("probcert")
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(level_name.upper())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _configure_logging()
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 3
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 4
    except ProbcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except Exception as exc:
        if log.isEnabledFor(logging.DEBUG):
            traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
