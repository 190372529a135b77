"""Probabilistic robustness certification via exact binomial tests.

Assess each input by sampling its perturbation neighbourhood until an
exact binomial test certifies the failure rate on either side of a
threshold, then convert the observed verdict rate into rigorous bounds
on the true fraction of robust points.
"""

from .aggregate import (
    SIL_KAPPA_PRESETS,
    DatasetEstimate,
    aggregate,
    bounds_from_observed,
    clopper_pearson,
)
from .assessor import (
    DatasetAssessment,
    Observation,
    PointAssessment,
    RobustnessSpec,
    assess_dataset,
    assess_point,
    sequential_decision,
)
from .binomial import (
    TailDecision,
    TailProbabilities,
    binomial_left_tail,
    binomial_right_tail,
    exact_test,
    log_binomial_pmf,
    tail_probabilities,
)
from .dataio import load_dataset, save_dataset
from .errors import ConfigError, EstimationError, ProbcertError, TransportError
from .models import (
    ExternalModel,
    LinearModel,
    MlpModel,
    check_determinism,
    load_weights,
)
from .oracle import OracleMethod, OraclePoint, oracle_p_fail
from .perturb import Metric, sample_ball
from .report import build_report, read_report, write_report
from .streams import Namespace, stream_for_point

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SIL_KAPPA_PRESETS",
    "DatasetEstimate",
    "aggregate",
    "bounds_from_observed",
    "clopper_pearson",
    "DatasetAssessment",
    "Observation",
    "PointAssessment",
    "RobustnessSpec",
    "assess_dataset",
    "assess_point",
    "sequential_decision",
    "TailDecision",
    "TailProbabilities",
    "binomial_left_tail",
    "binomial_right_tail",
    "exact_test",
    "log_binomial_pmf",
    "tail_probabilities",
    "load_dataset",
    "save_dataset",
    "ConfigError",
    "EstimationError",
    "ProbcertError",
    "TransportError",
    "ExternalModel",
    "LinearModel",
    "MlpModel",
    "check_determinism",
    "load_weights",
    "OracleMethod",
    "OraclePoint",
    "oracle_p_fail",
    "Metric",
    "sample_ball",
    "build_report",
    "read_report",
    "write_report",
    "Namespace",
    "stream_for_point",
]
