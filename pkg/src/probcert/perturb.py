"""Uniform sampling from the epsilon-ball around an input.

Inputs live in [0, 1]^d. A draw is uniform over the ball in the chosen
metric and is then clipped back into the domain componentwise; clipping
never increases the distance to the center (the center is inside the
domain), so membership in the ball is preserved.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

__all__ = ["Metric", "sample_ball"]


class Metric(Enum):
    LINF = "linf"
    L2 = "l2"


def sample_ball(
    x: np.ndarray,
    epsilon: float,
    metric: Metric,
    rng: np.random.Generator,
    count: int,
) -> np.ndarray:
    """Draw `count` perturbations of x, uniform over the epsilon-ball.

    Linf: each component independently uniform on [x_i - eps, x_i + eps].
    L2: uniform direction on the sphere scaled by eps * U^(1/d), the radius
    law that makes the density uniform over the ball's volume.

    Returns an array of shape (count, d) clipped into [0, 1]^d.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"x must be a 1-d vector, got shape {x.shape}")
    epsilon = float(epsilon)
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    d = x.shape[0]
    if metric is Metric.LINF:
        pts = x + rng.uniform(-epsilon, epsilon, size=(count, d))
    elif metric is Metric.L2:
        direction = rng.standard_normal(size=(count, d))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        # a zero normal vector has probability zero; guard the division anyway
        np.maximum(norms, np.finfo(np.float64).tiny, out=norms)
        radius = epsilon * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / d)
        pts = x + direction / norms * radius
    else:
        raise ValueError(f"unknown metric: {metric!r}")
    np.clip(pts, 0.0, 1.0, out=pts)
    return pts
