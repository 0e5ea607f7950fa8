"""Named states: GHZ, W, Bell pairs, Werner states and the four-qubit noise family

    rho(p1, p2) = p1 P+_12 (x) P+_34 + p2 P_GHZ + (1 - p1 - p2) / 16 * identity

together with its noise coordinates q = 1 - p1 - p2 and r = p2 / p1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core.tensor_core import DensityMatrix, PureState, SystemShape, product_on_sites, validate_density
from ..errors import InvalidRange, InvalidWeights, LevelOutOfRange, SiteOutOfRange

# Serialized stand-in for r = p2 / p1 when p1 = 0.
RATIO_INF = "inf"

WEIGHT_SLACK = 1e-12
FOUR_QUBITS = SystemShape(4)


def ghz(n: int, d: int = 2) -> PureState:
    """(|0...0> + |d-1...d-1>) / sqrt(2)."""
    if n < 2:
        raise InvalidRange(f"GHZ needs n >= 2, got {n}")
    shape = SystemShape(n, d)
    amps = np.zeros(shape.total_dim, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return PureState(shape, amps)


def phi_plus() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)


def bell_pair_projector(sites: tuple[int, int], shape: SystemShape) -> DensityMatrix:
    """P+ on the two given sites, as a two-qubit operator; `pair_product` places it."""
    i, j = sites
    if i == j or not (1 <= i <= shape.n and 1 <= j <= shape.n):
        raise SiteOutOfRange(f"need two distinct sites in 1..{shape.n}, got {sites}")
    v = phi_plus()
    return DensityMatrix(SystemShape(2), np.outer(v, v.conj()))


def pair_product(shape: SystemShape, pairs: Sequence[tuple[int, int]]) -> PureState:
    """phi+ on every listed pair of sites, e.g. [(1, 2), (3, 4)]."""
    for pair in pairs:
        bell_pair_projector(pair, shape)
    return product_on_sites(shape, [(pair, phi_plus()) for pair in pairs])


def w_state(n: int) -> PureState:
    if n < 2:
        raise InvalidRange(f"W needs n >= 2, got {n}")
    shape = SystemShape(n)
    amps = np.zeros(shape.total_dim, dtype=np.complex128)
    for site in range(n):
        amps[1 << (n - 1 - site)] = 1 / math.sqrt(n)
    return PureState(shape, amps)


def product_state(labels: str | Sequence[int], d: int = 2) -> PureState:
    """Computational basis state, e.g. "0101"."""
    digits = [int(c) for c in labels]
    if not digits:
        raise InvalidRange("empty product label")
    if any(not 0 <= x < d for x in digits):
        raise LevelOutOfRange(f"labels {labels} outside 0..{d - 1}")
    shape = SystemShape(len(digits), d)
    amps = np.zeros(shape.total_dim, dtype=np.complex128)
    amps[int(np.ravel_multi_index(tuple(digits), shape.dims))] = 1.0
    return PureState(shape, amps)


def werner(w: float) -> DensityMatrix:
    """w P+ + (1 - w) identity / 4 on two qubits; PSD for w in [-1/3, 1]."""
    if not -1 / 3 - WEIGHT_SLACK <= w <= 1 + WEIGHT_SLACK:
        raise InvalidWeights(f"Werner weight {w} outside [-1/3, 1]")
    v = phi_plus()
    return DensityMatrix(SystemShape(2), w * np.outer(v, v.conj()) + (1 - w) * np.eye(4) / 4)


def isotropic_mix(rho: DensityMatrix, q: float) -> DensityMatrix:
    """(1 - q) rho + q identity / d^n."""
    if not 0.0 <= q <= 1.0:
        raise InvalidWeights(f"noise degree {q} outside [0, 1]")
    return DensityMatrix(rho.shape, (1 - q) * rho.mat + q * np.eye(rho.dim) / rho.dim)


# --- Four-qubit noise family ---

@dataclass(frozen=True)
class BBOParams:
    p1: float
    p2: float

    def __post_init__(self):
        if self.p1 < 0 or self.p2 < 0 or self.p1 + self.p2 > 1 + WEIGHT_SLACK:
            raise InvalidWeights(f"need p1, p2 >= 0 and p1 + p2 <= 1, got ({self.p1}, {self.p2})")


@dataclass(frozen=True)
class NoiseCoords:
    """q = 1 - p1 - p2 and r = p2 / p1, with r = RATIO_INF on the p1 = 0 edge."""

    q: float
    r: float | str

    @property
    def r_text(self) -> str:
        return RATIO_INF if self.r == RATIO_INF else f"{self.r:.12g}"


def coords(p: BBOParams) -> NoiseCoords:
    q = max(0.0, 1.0 - p.p1 - p.p2)
    r = RATIO_INF if p.p1 == 0 else p.p2 / p.p1
    return NoiseCoords(q, r)


def params_from_coords(c: NoiseCoords) -> BBOParams:
    if not 0.0 <= c.q <= 1.0:
        raise InvalidWeights(f"noise degree {c.q} outside [0, 1]")
    if c.r == RATIO_INF:
        return BBOParams(0.0, 1.0 - c.q)
    if c.r < 0:
        raise InvalidWeights(f"ratio {c.r} is negative")
    p1 = (1.0 - c.q) / (1.0 + c.r)
    return BBOParams(p1, c.r * p1)


def bbo_state(p: BBOParams) -> DensityMatrix:
    pairs = pair_product(FOUR_QUBITS, [(1, 2), (3, 4)]).projector().mat
    g = ghz(4).projector().mat
    weight = p.p1 + p.p2
    if weight > 1.0:
        # inside the weight slack: no noise left, rescale so the trace stays one
        return validate_density((p.p1 * pairs + p.p2 * g) / weight, FOUR_QUBITS)
    return DensityMatrix(FOUR_QUBITS, p.p1 * pairs + p.p2 * g + (1.0 - weight) * np.eye(16) / 16)
