"""Sequential per-point robustness assessment.

For one input x the assessor draws perturbations in batches, counts label
flips against the center prediction, and after every batch runs the exact
two-sided tail test at threshold kappa. The first rejection settles the
point: rejecting the upper side certifies the failure rate below kappa
(verdict W1), rejecting the lower side certifies it above (verdict W0).
If max_samples is exhausted with no rejection the point is inconclusive.

The default keeps the full alpha at every look, exactly the procedure the
guarantees

    P(W1 | p_x > kappa) < alpha      P(W0 | p_x < kappa) < alpha

are quoted for; repeated looks do inflate the realized error above the
single-test level near the boundary, and `strict_alpha=True` switches to
the spending schedule alpha_j = alpha * 2^-j whose union bound restores a
total error below alpha at the price of larger sample sizes.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .binomial import TailDecision, binomial_left_tail, binomial_right_tail
from .errors import ConfigError, TransportError
from .perturb import Metric, sample_ball
from .streams import Namespace, stream_for_point

__all__ = [
    "Observation",
    "RobustnessSpec",
    "PointAssessment",
    "DatasetAssessment",
    "sequential_decision",
    "assess_point",
    "assess_dataset",
]

progress_log = logging.getLogger("probcert.progress")


class Observation(Enum):
    """Per-point verdict: the binary observation the dataset estimate counts."""

    W1 = "w1"                      # failure rate certified below kappa
    W0 = "w0"                      # failure rate certified above kappa
    INCONCLUSIVE = "inconclusive"  # sample budget exhausted without a verdict


@dataclass(frozen=True)
class RobustnessSpec:
    """What to certify and how hard to try.

    kappa: failure-rate threshold the verdicts are tested against.
    alpha: per-test significance level, in (0, 0.5).
    epsilon: perturbation ball radius.
    metric: ball geometry, Linf or L2.
    batch_size: perturbations drawn between consecutive tests.
    max_samples: per-point sampling budget.
    seed: 64-bit run seed; per-point streams derive from (seed, index).
    strict_alpha: spend alpha geometrically over looks instead of reusing it.
    """

    kappa: float
    alpha: float
    epsilon: float
    metric: Metric = Metric.LINF
    batch_size: int = 100
    max_samples: int = 1_000_000
    seed: int = 0
    strict_alpha: bool = False

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ConfigError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if self.epsilon < 0.0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if not isinstance(self.metric, Metric):
            raise ConfigError(f"metric must be a Metric, got {self.metric!r}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_samples < self.batch_size:
            raise ConfigError(
                f"max_samples ({self.max_samples}) must be >= batch_size "
                f"({self.batch_size})"
            )


@dataclass(frozen=True)
class PointAssessment:
    """Outcome of the sequential test at one input."""

    observation: Observation
    samples_used: int
    failures: int
    final_left_tail: float
    final_right_tail: float
    center_label: int


def sequential_decision(
    draw_failures: Callable[[int], int],
    spec: RobustnessSpec,
) -> tuple[Observation, int, int, float, float]:
    """Run the grow-and-test loop against an arbitrary failure source.

    draw_failures(m) must return how many of m fresh perturbation trials
    flipped the label. Returns (observation, samples_used, failures,
    final_left_tail, final_right_tail).
    """
    n = 0
    k = 0
    look = 0
    left = right = 1.0
    while n < spec.max_samples:
        batch = min(spec.batch_size, spec.max_samples - n)
        k += int(draw_failures(batch))
        n += batch
        look += 1
        if not 0 <= k <= n:
            raise ValueError(f"failure source returned an impossible count: k={k}, n={n}")
        level = spec.alpha * 2.0 ** (-look) if spec.strict_alpha else spec.alpha
        left = binomial_left_tail(k, n, spec.kappa)
        right = binomial_right_tail(k, n, spec.kappa)
        if left < level:
            return Observation.W1, n, k, left, right
        if right < level:
            return Observation.W0, n, k, left, right
    return Observation.INCONCLUSIVE, n, k, left, right


def assess_point(
    model,
    x: np.ndarray,
    spec: RobustnessSpec,
    stream: Optional[np.random.Generator] = None,
    index: int = 0,
) -> PointAssessment:
    """Assess one input. Queries the model at most max_samples + 1 times."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.input_dim:
        raise ConfigError(
            f"input has shape {x.shape} but the model consumes "
            f"{model.input_dim} features"
        )
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ConfigError(f"input components must lie in [0, 1]: {x}")
    if stream is None:
        stream = stream_for_point(spec.seed, index, Namespace.ASSESS)
    center = int(model.predict_batch(x[None, :])[0])

    def draw(count: int) -> int:
        pts = sample_ball(x, spec.epsilon, spec.metric, stream, count)
        labels = model.predict_batch(pts)
        return int(np.count_nonzero(labels != center))

    obs, n, k, left, right = sequential_decision(draw, spec)
    return PointAssessment(
        observation=obs,
        samples_used=n,
        failures=k,
        final_left_tail=left,
        final_right_tail=right,
        center_label=center,
    )


@dataclass
class DatasetAssessment:
    """Per-point results in input order; errored points carry a message instead."""

    assessments: list[Optional[PointAssessment]]
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def completed(self) -> list[PointAssessment]:
        return [a for a in self.assessments if a is not None]


def assess_dataset(
    model,
    points: np.ndarray,
    spec: RobustnessSpec,
    workers: int = 1,
) -> DatasetAssessment:
    """Assess every row of `points`, optionally across worker threads.

    Results are deterministic for a given spec regardless of worker count:
    each point consumes only its own (seed, index)-derived stream. Transport
    errors abort only their point; the call raises only if every point
    failed.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ConfigError(f"need a non-empty 2-d point array, got shape {points.shape}")
    if points.shape[1] != model.input_dim:
        raise ConfigError(
            f"dataset dimension {points.shape[1]} does not match model "
            f"input_dim {model.input_dim}"
        )
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    total = points.shape[0]
    results: list[Optional[PointAssessment]] = [None] * total
    errors: list[tuple[int, str]] = []
    counts = {Observation.W1: 0, Observation.W0: 0, Observation.INCONCLUSIVE: 0}
    done = 0
    lock = threading.Lock()

    def run_one(i: int) -> None:
        nonlocal done
        try:
            res = assess_point(model, points[i], spec, index=i)
        except TransportError as exc:
            with lock:
                done += 1
                errors.append((i, str(exc)))
                progress_log.warning(
                    "point=%d error=%s done=%d/%d", i, exc, done, total
                )
            return
        with lock:
            done += 1
            counts[res.observation] += 1
            results[i] = res
            progress_log.info(
                "point=%d verdict=%s samples=%d failures=%d done=%d/%d "
                "w1=%d w0=%d inconclusive=%d",
                i,
                res.observation.value,
                res.samples_used,
                res.failures,
                done,
                total,
                counts[Observation.W1],
                counts[Observation.W0],
                counts[Observation.INCONCLUSIVE],
            )

    if workers == 1:
        for i in range(total):
            run_one(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, range(total)))

    errors.sort(key=lambda e: e[0])
    if len(errors) == total:
        exc = TransportError(
            f"every point failed; first error at point {errors[0][0]}: {errors[0][1]}"
        )
        # callers that report partial progress still get the error rows
        exc.assessment = DatasetAssessment(results, errors)
        raise exc
    return DatasetAssessment(assessments=results, errors=errors)
