"""Log-space geometric mean over partition factors."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .. import config
from ..errors import DimensionMismatch


def geometric_mean(values: Sequence[float], multiplicities: Sequence[int] | None = None) -> float:
    """(prod v_i^k_i)^(1 / sum k_i); exactly 0 once any factor drops below config.ZERO.

    With config.REPRODUCIBLE the log sum is exactly rounded (math.fsum), so the
    result does not depend on the order partitions arrive in.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    weights = np.ones_like(values) if multiplicities is None else np.asarray(multiplicities, dtype=np.float64)
    if weights.shape != values.shape:
        raise DimensionMismatch(f"{weights.size} multiplicities for {values.size} values")
    if np.any(values < config.ZERO):
        return 0.0
    logs = weights * np.log(values)
    if config.REPRODUCIBLE:
        return math.exp(math.fsum(logs) / math.fsum(weights))
    return float(np.exp(logs.sum() / weights.sum()))
