"""Per-point random streams derived from (seed, point index).

Each dataset point gets its own Philox generator keyed by the run seed, a
namespace, and the point index. Philox is counter-based, so stream i is the
same bit sequence no matter how many worker threads run or in what order
points complete, which is what makes reports reproducible at any worker
count. The oracle namespace keeps reference-probability draws independent
of the draws used by the assessment itself.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Namespace", "stream_for_point"]


class Namespace:
    """Stream namespaces; oracle draws never collide with assessment draws."""

    ASSESS = 0
    ORACLE = 1
    SAMPLE = 2


def stream_for_point(seed: int, index: int, namespace: int = Namespace.ASSESS) -> np.random.Generator:
    """Deterministic generator for one dataset point.

    seed is treated as a 64-bit value; index must be a non-negative point
    index below 2**48 so it packs next to the namespace tag.
    """
    index = int(index)
    namespace = int(namespace)
    if index < 0 or index >= 1 << 48:
        raise ValueError(f"point index out of range: {index}")
    if namespace < 0 or namespace >= 1 << 16:
        raise ValueError(f"namespace out of range: {namespace}")
    key = np.array(
        [int(seed) % (1 << 64), (namespace << 48) | index],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
