"""Computable lower bounds for mixed states.

For a witness O with F = O + O^T, lambda_1 >= lambda_2 >= ... are the square
roots of the eigenvalues of rho F rho* F. They are taken as the singular values
of sqrt(rho) F sqrt(rho)*, which keeps lambda accurate to round-off instead of
its square root. Each witness contributes t = 2 lambda_1 - sum(lambda);
the variants below aggregate those terms into Lambda_{gamma,delta}, and
eta_bound / rm_bound carry them up to R~_m exactly as the pure-state measures do.

The fast path restricts everything to the (at most) four basis states F
touches and decomposes a batch of 4x4 matrices per witness family.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .. import config
from ..core.flip_family import SparseWitness, WitnessFamily, check_pair, witness_arrays, witness_dense, witness_family
from ..core.partitions import OrbitTable, Partition, SitePermutation, SubsetOfSites, complement, nonempty_subsets, orbit_reduce, proper_subsets, set_partitions
from ..core.tensor_core import ComplexMatrix, DensityMatrix, SystemShape, permute_sites, sqrt_psd
from ..errors import ConvergenceFailure, DimensionMismatch, SymmetryViolation
from ..observability import tracer
from ..states.random_states import random_density
from .means import geometric_mean
from .pure import DEFAULT_CONFIG, MeasureConfig, check_gamma, check_m

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


class BoundVariant(str, Enum):
    SUM_LITERAL = "literal"
    QUADRATURE = "quadrature"
    MAX_SINGLE = "max"


# Passes the pure-state check Lambda^2 <= C^2; the other two are diagnostics.
PRODUCTION_VARIANT = BoundVariant.QUADRATURE


@dataclass(frozen=True)
class WitnessSpectrum:
    witness: SparseWitness
    lambdas: NDArray[np.float64]  # descending, >= 0

    @property
    def lead(self) -> float:
        return float(self.lambdas[0]) if self.lambdas.size else 0.0

    @property
    def total(self) -> float:
        return float(self.lambdas.sum())

    @property
    def term(self) -> float:
        """2 lambda_1 - sum(lambda)."""
        return 2 * self.lead - self.total


@dataclass(frozen=True)
class PartitionBound:
    partition: Partition
    per_block: tuple[tuple[SubsetOfSites, float], ...]
    multiplicity: int = 1

    @property
    def factor(self) -> float:
        return sum(value for _, value in self.per_block)


@dataclass(frozen=True)
class BoundReport:
    m: int
    variant: BoundVariant
    per_partition: tuple[PartitionBound, ...]
    rm_tilde: float
    symmetry_used: OrbitTable | None = None


# --- Spectra ---

def rho_tilde(rho: DensityMatrix, w: SparseWitness) -> ComplexMatrix:
    """F rho* F, filled only on the rows and columns F touches."""
    if w.dim != rho.dim:
        raise DimensionMismatch(f"witness of dimension {w.dim} for a {rho.dim}-dimensional state")
    out = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
    if w.zero:
        return out
    support, blocks = witness_arrays([w])
    idx = np.ix_(support[0], support[0])
    out[idx] = blocks[0] @ rho.mat.conj()[idx] @ blocks[0]
    return out


def _singular_values(a: ComplexMatrix) -> NDArray[np.float64]:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"svd failed: {exc}") from exc


def _spectra_fast(mat: ComplexMatrix, support: NDArray[np.int64], blocks: NDArray[np.float64]) -> NDArray[np.float64]:
    """(W, 4) descending lambdas: singular values of sqrt(rho_SS) B sqrt(rho_SS)* per witness."""
    if len(support) == 0:
        return np.zeros((0, 4))
    sub = mat[support[:, :, None], support[:, None, :]]
    try:
        vals, vecs = np.linalg.eigh(sub)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"batched eigh failed: {exc}") from exc
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))[:, None, :]) @ vecs.conj().swapaxes(-1, -2)
    return _singular_values(root @ blocks @ root.conj())


def _spectrum_dense(rho: DensityMatrix, w: SparseWitness, root: ComplexMatrix | None = None) -> NDArray[np.float64]:
    root = sqrt_psd(rho.mat) if root is None else root
    return _singular_values(root @ dense_witness_matrix(w) @ root.conj())


def witness_spectrum(rho: DensityMatrix, w: SparseWitness, fast: bool | None = None) -> WitnessSpectrum:
    fast = config.FAST_PATH if fast is None else fast
    if w.dim != rho.dim:
        raise DimensionMismatch(f"witness of dimension {w.dim} for a {rho.dim}-dimensional state")
    if w.zero:
        return WitnessSpectrum(w, np.zeros(4))
    if fast:
        support, blocks = witness_arrays([w])
        return WitnessSpectrum(w, _spectra_fast(rho.mat, support, blocks)[0])
    return WitnessSpectrum(w, _spectrum_dense(rho, w))


def family_terms(rho: DensityMatrix, family: WitnessFamily, fast: bool | None = None) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Per-class terms 2 lambda_1 - sum(lambda) and the class sizes that weight them."""
    fast = config.FAST_PATH if fast is None else fast
    if fast:
        lambdas = _spectra_fast(rho.mat, family.support[family.classes], family.blocks[family.classes])
    else:
        root = sqrt_psd(rho.mat)
        active = family.active
        lambdas = np.array([_spectrum_dense(rho, active[a], root)[:4] for a in family.classes]).reshape(-1, 4)
    return 2 * lambdas[:, 0] - lambdas.sum(axis=1), family.class_sizes


def aggregate(terms: NDArray[np.float64], weights: NDArray[np.float64], variant: BoundVariant) -> float:
    """Lambda from per-witness terms; the 1/2 in the clipped variants undoes the doubling in F = O + O^T."""
    variant = BoundVariant(variant)
    if terms.size == 0:
        return 0.0
    if variant is BoundVariant.SUM_LITERAL:
        return max(0.0, float(np.dot(weights, terms)))
    clipped = np.clip(terms, 0.0, None)
    if variant is BoundVariant.QUADRATURE:
        return 0.5 * float(np.sqrt(np.dot(weights, clipped**2)))
    return 0.5 * float(clipped.max())


# --- Lambda, eta, R~_m ---

def lambda_bound(
    rho: DensityMatrix,
    gamma: Sequence[int],
    delta: Sequence[int],
    variant: BoundVariant = PRODUCTION_VARIANT,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    fast: bool | None = None,
) -> float:
    """Lambda_{gamma,delta} (not squared)."""
    gamma, delta = check_pair(rho.shape, gamma, delta)
    family = witness_family(rho.shape, gamma, delta, cfg.reading)
    terms, weights = family_terms(rho, family, fast)
    return aggregate(terms, weights, variant)


def eta_bound(
    rho: DensityMatrix,
    gamma: Sequence[int],
    variant: BoundVariant = PRODUCTION_VARIANT,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    fast: bool | None = None,
) -> float:
    gamma = check_gamma(rho.shape, gamma)
    total = sum(
        lambda_bound(rho, gamma, delta, variant, cfg, fast) ** 2
        for delta in nonempty_subsets(complement(gamma, rho.shape.n))
    )
    return cfg.scale(len(gamma), rho.shape.d) * total


def check_symmetry(rho: DensityMatrix, group: Sequence[SitePermutation]) -> None:
    for g in group:
        if g.n != rho.shape.n:
            raise SymmetryViolation(f"permutation on {g.n} sites for a {rho.shape.n}-site state")
        deviation = float(np.max(np.abs(permute_sites(rho, g.images).mat - rho.mat)))
        if deviation > SYMMETRY_TOL:
            raise SymmetryViolation(f"state is not invariant under {g.images} (deviation {deviation:.3e})")


def eta_bound_table(
    rho: DensityMatrix,
    variant: BoundVariant = PRODUCTION_VARIANT,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    fast: bool | None = None,
    gammas: Sequence[SubsetOfSites] | None = None,
    symmetry: Sequence[SitePermutation] | None = None,
) -> dict[SubsetOfSites, float]:
    """eta_bound for every requested gamma (default: all proper subsets).

    With a symmetry group, which the caller guarantees leaves rho invariant,
    one gamma per orbit is evaluated and its value copied to the rest.
    """
    wanted = list(proper_subsets(rho.shape.n) if gammas is None else gammas)
    table: dict[SubsetOfSites, float] = {}
    for gamma in wanted:
        if gamma in table:
            continue
        value = eta_bound(rho, gamma, variant, cfg, fast)
        table[gamma] = value
        for g in symmetry or ():
            table.setdefault(g.apply(gamma), value)
    return {gamma: table[gamma] for gamma in wanted}


def rm_bound_from_table(table: dict[SubsetOfSites, float], n: int, m: int) -> float:
    """R~_m from precomputed eta bounds; 0 for m = 1."""
    check_m(n, m)
    if m == 1:
        return 0.0
    factors = [sum(table[b] for b in part.blocks) for part in set_partitions(n, m)]
    return geometric_mean(factors) / m


def rm_bound(
    rho: DensityMatrix,
    m: int,
    variant: BoundVariant = PRODUCTION_VARIANT,
    symmetry: Sequence[SitePermutation] | None = None,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    fast: bool | None = None,
) -> BoundReport:
    """(1/m) * geometric mean over m-block partitions of sum_i eta_bound(gamma_i).

    With `symmetry`, rho's invariance is checked first and one partition per
    orbit is evaluated, weighted by the orbit size.
    """
    variant = BoundVariant(variant)
    n = rho.shape.n
    check_m(n, m)
    with tracer(__name__).start_as_current_span("rm_bound") as span:
        span.set_attribute("m", m)
        span.set_attribute("variant", variant.value)
        if m == 1:
            return BoundReport(1, variant, (), 0.0)

        orbits = None
        if symmetry:
            check_symmetry(rho, symmetry)
            orbits = orbit_reduce(set_partitions(n, m), symmetry)
            entries = orbits.entries
        else:
            entries = tuple((part, 1) for part in set_partitions(n, m))

        etas: dict[SubsetOfSites, float] = {}
        rows = []
        for part, mult in entries:
            for block in part.blocks:
                if block not in etas:
                    etas[block] = eta_bound(rho, block, variant, cfg, fast)
            rows.append(PartitionBound(part, tuple((b, etas[b]) for b in part.blocks), mult))

        value = geometric_mean([r.factor for r in rows], [r.multiplicity for r in rows]) / m
        span.set_attribute("rm_tilde", value)
        logger.debug("R~_%d (%s) = %.12g over %d partition classes", m, variant.value, value, len(rows))
        return BoundReport(m, variant, tuple(rows), value, orbits)


# --- Reporting ---

def witness_trace_rows(
    rho: DensityMatrix,
    gamma: Sequence[int],
    delta: Sequence[int],
    cfg: MeasureConfig = DEFAULT_CONFIG,
    fast: bool | None = None,
) -> list[dict]:
    """One row per nonzero witness: provenance plus lambda_1 and sum(lambda)."""
    gamma, delta = check_pair(rho.shape, gamma, delta)
    family = witness_family(rho.shape, gamma, delta, cfg.reading)
    rows = []
    for w in family.active:
        spectrum = witness_spectrum(rho, w, fast)
        rows.append({
            "gamma": ",".join(map(str, w.gamma)),
            "delta": ",".join(map(str, w.delta)),
            "assignment": str(w.assignment),
            "j": str(w.label),
            "lambda1": f"{spectrum.lead:.12g}",
            "lambda_sum": f"{spectrum.total:.12g}",
        })
    return rows


def report_to_dict(report: BoundReport) -> dict:
    return {
        "m": report.m,
        "variant": report.variant.value,
        "rm_tilde": report.rm_tilde,
        "per_partition": [
            {
                "partition": row.partition.to_json(),
                "multiplicity": row.multiplicity,
                "factor": row.factor,
                "per_block": [{"gamma": list(b), "eta_bound": v} for b, v in row.per_block],
            }
            for row in report.per_partition
        ],
        "symmetry": None if report.symmetry_used is None else report.symmetry_used.to_json(),
    }


def dense_witness_matrix(w: SparseWitness) -> ComplexMatrix:
    """F = O + O^T as a dense matrix."""
    o = witness_dense(w)
    return o + o.T


FASTPATH_TOL = 1e-9


def fastpath_campaign(pairs: int = 1000, shape: SystemShape = SystemShape(4), seed: int = config.SEED) -> dict:
    """Largest fast-vs-dense lambda deviation over random (state, witness) pairs."""
    rng = np.random.default_rng(seed)
    gammas = proper_subsets(shape.n)
    worst = 0.0
    for _ in range(pairs):
        rho = random_density(shape, rng)
        gamma = gammas[rng.integers(len(gammas))]
        deltas = nonempty_subsets(complement(gamma, shape.n))
        delta = deltas[rng.integers(len(deltas))]
        active = witness_family(shape, gamma, delta, DEFAULT_CONFIG.reading).active
        w = active[rng.integers(len(active))]
        fast = witness_spectrum(rho, w, fast=True).lambdas
        dense = witness_spectrum(rho, w, fast=False).lambdas
        worst = max(worst, float(np.max(np.abs(dense[:4] - fast))), float(np.max(dense[4:], initial=0.0)))
    logger.info("⚡ Fast path: max deviation %.3e over %d pairs", worst, pairs)
    return {"pairs": pairs, "dim": shape.total_dim, "max_deviation": worst, "tolerance": FASTPATH_TOL, "ok": worst < FASTPATH_TOL}
