"""Dataset-level estimation from per-point verdicts.

Each decided point contributes a binary observation w; the quantity of
interest is the dataset fraction z of truly robust points. Verdicts are
noisy with one-sided error below alpha, so by the law of total probability

    P(w) = P(w | z) P(z) + P(w | not z) (1 - P(z))

with P(w | not z) < alpha and P(w | z) > 1 - alpha, which pins P(z) inside

    (P(w) - alpha) / (1 + alpha)  <  P(z)  <  P(w) / (1 - alpha)

once P(w) is replaced by the observed fraction k'/n'. Those bounds treat
k'/n' as exact; the estimate additionally carries a supplementary interval
that first wraps k'/n' in an exact (Clopper-Pearson) confidence interval at
level 1 - alpha and then pushes both endpoints through the same correction,
so sampling error in the verdict fraction is accounted for end to end.

Inconclusive points are excluded from n'. The conservative rate
k' / (n' + inconclusive) counts every undecided point as if it had failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from scipy import stats

from .assessor import Observation, PointAssessment
from .errors import EstimationError

__all__ = [
    "SIL_KAPPA_PRESETS",
    "DatasetEstimate",
    "bounds_from_observed",
    "clopper_pearson",
    "aggregate",
]

# Threshold ladder borrowed from safety-integrity-level practice: preset
# level L certifies a per-point failure rate below 10^-L.
SIL_KAPPA_PRESETS = {1: 1e-1, 2: 1e-2, 3: 1e-3, 4: 1e-4, 5: 1e-5}


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    return alpha


def bounds_from_observed(p_w: float, alpha: float) -> tuple[float, float]:
    """Convert an observed verdict rate into bounds on the true robust rate.

    Returns (lower, upper) = ((p_w - alpha)/(1 + alpha), p_w/(1 - alpha)),
    clamped into [0, 1]. lower <= p_w <= upper always holds.
    """
    p_w = float(p_w)
    if not 0.0 <= p_w <= 1.0:
        raise ValueError(f"p_w must lie in [0, 1], got {p_w}")
    alpha = _check_alpha(alpha)
    lower = max(0.0, (p_w - alpha) / (1.0 + alpha))
    upper = min(1.0, p_w / (1.0 - alpha))
    return lower, upper


def clopper_pearson(k: int, n: int, alpha: float) -> tuple[float, float]:
    """Exact two-sided confidence interval for a binomial proportion.

    Coverage level 1 - alpha; endpoints are the usual Beta quantiles with
    the conventional closures at k = 0 and k = n.
    """
    k = int(k)
    n = int(n)
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    alpha = _check_alpha(alpha)
    lower = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2.0, k, n - k + 1))
    upper = 1.0 if k == n else float(stats.beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return lower, upper


@dataclass(frozen=True)
class DatasetEstimate:
    """Aggregate robustness estimate over a dataset.

    lower_bound/upper_bound treat the observed verdict rate as exact;
    composed_lower/composed_upper additionally absorb its sampling error
    through an exact proportion interval at the same level.
    """

    n_prime: int
    k_prime: int
    p_w: float
    lower_bound: float
    upper_bound: float
    inconclusive: int
    alpha: float
    conservative_p_w: float
    p_w_interval_lower: float
    p_w_interval_upper: float
    composed_lower: float
    composed_upper: float

    def as_dict(self) -> dict:
        return {
            "n_prime": self.n_prime,
            "k_prime": self.k_prime,
            "p_w": self.p_w,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "inconclusive": self.inconclusive,
            "alpha": self.alpha,
            "conservative_p_w": self.conservative_p_w,
            "p_w_interval_lower": self.p_w_interval_lower,
            "p_w_interval_upper": self.p_w_interval_upper,
            "composed_lower": self.composed_lower,
            "composed_upper": self.composed_upper,
        }


def aggregate(results: Sequence[PointAssessment], alpha: float) -> DatasetEstimate:
    """Fold per-point verdicts into a DatasetEstimate.

    Raises EstimationError when no point reached a verdict, since the
    correction is undefined at n' = 0.
    """
    alpha = _check_alpha(alpha)
    n_prime = 0
    k_prime = 0
    inconclusive = 0
    for r in results:
        if r.observation is Observation.INCONCLUSIVE:
            inconclusive += 1
        else:
            n_prime += 1
            k_prime += r.observation is Observation.W1
    if n_prime == 0:
        raise EstimationError(
            f"no decided points to aggregate ({inconclusive} inconclusive)"
        )
    p_w = k_prime / n_prime
    lower, upper = bounds_from_observed(p_w, alpha)
    cp_lo, cp_hi = clopper_pearson(k_prime, n_prime, alpha)
    comp_lo, _ = bounds_from_observed(cp_lo, alpha)
    _, comp_hi = bounds_from_observed(cp_hi, alpha)
    return DatasetEstimate(
        n_prime=n_prime,
        k_prime=k_prime,
        p_w=p_w,
        lower_bound=lower,
        upper_bound=upper,
        inconclusive=inconclusive,
        alpha=alpha,
        conservative_p_w=k_prime / (n_prime + inconclusive),
        p_w_interval_lower=cp_lo,
        p_w_interval_upper=cp_hi,
        composed_lower=comp_lo,
        composed_upper=comp_hi,
    )
