"""Monte-Carlo convex-roof estimates and the bound-chain campaign.

Exact convex roofs are not computable, so the chain

    Lambda^2_{gamma,delta}(rho) <= C^2_{gamma,delta}(rho) <= sum_a p_a C^2_{gamma,delta}(psi_a)

is checked against random decompositions: every sampled ensemble gives an
upper estimate, and the lower bound must stay below the best one found.
All comparisons are in bare concurrence units (no eta normalization).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .. import config
from ..core.flip_family import check_pair, witness_family
from ..core.partitions import SubsetOfSites, complement, nonempty_subsets, proper_subsets
from ..core.tensor_core import ComplexMatrix, DensityMatrix, PureState, SystemShape, herm_eig
from ..errors import ChainViolation, InvalidRange, SizeTooSmall
from ..observability import tracer
from ..states.random_states import random_density
from .mixed import PRODUCTION_VARIANT, BoundVariant, lambda_bound
from .pure import DEFAULT_CONFIG, MeasureConfig, c2_batch, check_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ensemble:
    weights: np.ndarray
    states: tuple[PureState, ...]

    def reconstruct(self) -> ComplexMatrix:
        amps = np.array([s.amplitudes for s in self.states])
        return (amps.T * self.weights) @ amps.conj()

    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitudes for s in self.states])


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _haar_isometry(size: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    if size == 1:
        return np.ones((1, 1), dtype=np.complex128)
    return unitary_group.rvs(size, random_state=rng)[:, :rank]


def random_ensemble(rho: DensityMatrix, size: int, seed: int | np.random.Generator = config.SEED) -> Ensemble:
    """Mixes the eigen-ensemble of rho with a Haar-random size x rank isometry U:
    psi~_a = sum_i U_ai sqrt(mu_i) e_i, p_a = |psi~_a|^2.
    """
    evals, evecs = herm_eig(rho.mat)
    keep = evals > config.ZERO
    rank = int(keep.sum())
    if size < rank:
        raise SizeTooSmall(f"ensemble size {size} below rank {rank}")

    rng = np.random.default_rng(seed)
    u = _haar_isometry(size, rank, rng)
    unnormalized = u @ (np.sqrt(evals[keep])[:, None] * evecs[:, keep].T)
    weights = np.real(np.einsum("ai,ai->a", unnormalized, unnormalized.conj()))

    nonzero = weights > 0
    states = tuple(
        PureState(rho.shape, vec / np.sqrt(p)) for vec, p in zip(unnormalized[nonzero], weights[nonzero])
    )
    return Ensemble(weights[nonzero] / weights.sum(), states)


def roof_upper(
    rho: DensityMatrix,
    gamma: Sequence[int],
    delta: Sequence[int],
    trials: int = 100,
    size: int | None = None,
    seed: int = config.SEED,
    cfg: MeasureConfig = DEFAULT_CONFIG,
) -> float:
    """min over trials of sum_a p_a c2(psi_a); trial t always draws from SeedSequence([seed, t])."""
    gamma, delta = check_pair(rho.shape, gamma, delta)
    return _roof_scan(rho, gamma, [delta], trials, size, seed, cfg)[0][delta]


def _roof_scan(rho, gamma, deltas, trials, size, seed, cfg) -> tuple[dict, float]:
    """Best per-delta averages and best summed average over the same trials."""
    if trials < 1:
        raise InvalidRange(f"need at least one trial, got {trials}")
    size = rho.dim if size is None else size
    families = {delta: witness_family(rho.shape, gamma, delta, cfg.reading) for delta in deltas}
    best = {delta: np.inf for delta in deltas}
    best_total = np.inf
    for t in range(trials):
        ens = random_ensemble(rho, size, _trial_rng(seed, t))
        amps = ens.amplitudes()
        total = 0.0
        for delta, family in families.items():
            avg = float(np.dot(ens.weights, c2_batch(amps, family)))
            best[delta] = min(best[delta], avg)
            total += avg
        best_total = min(best_total, total)
    return best, best_total


@dataclass(frozen=True)
class DeltaMargin:
    delta: SubsetOfSites
    bound_sq: float
    roof: float

    @property
    def margin(self) -> float:
        return self.roof + config.TOL_GAP - self.bound_sq


@dataclass(frozen=True)
class ChainReport:
    gamma: SubsetOfSites
    variant: BoundVariant
    per_delta: tuple[DeltaMargin, ...]
    total_bound: float
    total_roof: float

    @property
    def total_margin(self) -> float:
        return self.total_roof + config.TOL_GAP - self.total_bound

    @property
    def ok(self) -> bool:
        return self.total_margin >= 0 and all(d.margin >= 0 for d in self.per_delta)

    def to_dict(self) -> dict:
        return {
            "gamma": list(self.gamma),
            "variant": self.variant.value,
            "per_delta": [
                {"delta": list(d.delta), "bound_sq": d.bound_sq, "roof": d.roof, "margin": d.margin}
                for d in self.per_delta
            ],
            "total_bound": self.total_bound,
            "total_roof": self.total_roof,
            "total_margin": self.total_margin,
        }


def validate_chain(
    rho: DensityMatrix,
    gamma: Sequence[int],
    variant: BoundVariant = PRODUCTION_VARIANT,
    trials: int = 500,
    size: int | None = None,
    seed: int = config.SEED,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    raise_on_violation: bool = True,
) -> ChainReport:
    """Checks Lambda^2 <= roof estimate per delta and the summed form against sum_a p_a sum_delta c2."""
    variant = BoundVariant(variant)
    gamma = check_gamma(rho.shape, gamma)
    deltas = nonempty_subsets(complement(gamma, rho.shape.n))

    with tracer(__name__).start_as_current_span("validate_chain") as span:
        span.set_attribute("gamma", list(gamma))
        span.set_attribute("variant", variant.value)
        best, best_total = _roof_scan(rho, gamma, deltas, trials, size, seed, cfg)
        per_delta = tuple(
            DeltaMargin(delta, lambda_bound(rho, gamma, delta, variant, cfg) ** 2, best[delta]) for delta in deltas
        )
        report = ChainReport(gamma, variant, per_delta, sum(d.bound_sq for d in per_delta), best_total)

    if raise_on_violation and not report.ok:
        worst = min(per_delta, key=lambda d: d.margin)
        if report.total_margin < worst.margin:
            raise ChainViolation(complement(gamma, rho.shape.n), report.total_margin)
        raise ChainViolation(worst.delta, worst.margin)
    return report


@dataclass
class CampaignReport:
    seed: int
    variant: BoundVariant
    checked: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant.value,
            "checked": self.checked,
            "violations": self.violations,
            "ok": self.ok,
        }


def run_chain_campaign(
    counts: Sequence[tuple[SystemShape, int]] = ((SystemShape(2), 50), (SystemShape(3), 25)),
    variant: BoundVariant = PRODUCTION_VARIANT,
    trials: int = 500,
    seed: int = config.SEED,
    cfg: MeasureConfig = DEFAULT_CONFIG,
) -> CampaignReport:
    """validate_chain over random mixed states of each shape and every proper gamma, with pinned seeds."""
    variant = BoundVariant(variant)
    report = CampaignReport(seed, variant)
    rng = np.random.default_rng(seed)
    for shape, count in counts:
        for k in range(count):
            rho = random_density(shape, rng)
            for gamma in proper_subsets(shape.n):
                chain = validate_chain(rho, gamma, variant, trials, seed=seed + k, cfg=cfg, raise_on_violation=False)
                report.checked += 1
                if not chain.ok:
                    report.violations.append({"n": shape.n, "state": k, **chain.to_dict()})
        logger.info("🔗 %d-site campaign: %d states checked, %d violations so far", shape.n, count, len(report.violations))
    return report
