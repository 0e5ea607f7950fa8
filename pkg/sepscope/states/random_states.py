"""Seeded random pure states, density matrices and separable mixtures for property tests and campaigns."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..core.partitions import complement, make_subset
from ..core.tensor_core import DensityMatrix, PureState, SystemShape, product_on_sites
from ..errors import EmptySubset, FullSetError, InvalidRange

RngLike = np.random.Generator | int | None


def _gaussian(rng: np.random.Generator, size) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def random_pure_state(shape: SystemShape, rng: RngLike = None) -> PureState:
    """Haar-distributed pure state (normalized complex Gaussian vector)."""
    rng = np.random.default_rng(rng)
    vec = _gaussian(rng, shape.total_dim)
    return PureState(shape, vec / np.linalg.norm(vec))


def random_density(shape: SystemShape, rng: RngLike = None, rank: int | None = None) -> DensityMatrix:
    """Induced-measure mixed state G G^dag / Tr(G G^dag) with a dim x rank Ginibre matrix G."""
    rng = np.random.default_rng(rng)
    dim = shape.total_dim
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise InvalidRange(f"rank {rank} outside 1..{dim}")
    g = _gaussian(rng, (dim, rank))
    mat = g @ g.conj().T
    return DensityMatrix(shape, mat / np.real(np.trace(mat)))


def random_product_mixture(
    shape: SystemShape, gamma: Sequence[int], rng: RngLike = None, terms: int = 4
) -> DensityMatrix:
    """Convex mixture of `terms` random pure states, each product across gamma | rest."""
    rng = np.random.default_rng(rng)
    gamma = make_subset(gamma, shape.n)
    if not gamma:
        raise EmptySubset("gamma must be nonempty")
    rest = complement(gamma, shape.n)
    if not rest:
        raise FullSetError("gamma covers every site")
    if terms < 1:
        raise InvalidRange(f"need at least one term, got {terms}")

    weights = rng.dirichlet(np.ones(terms))
    mat = np.zeros((shape.total_dim, shape.total_dim), dtype=np.complex128)
    for p in weights:
        left = random_pure_state(SystemShape(len(gamma), shape.d), rng).amplitudes
        right = random_pure_state(SystemShape(len(rest), shape.d), rng).amplitudes
        psi = product_on_sites(shape, [(gamma, left), (rest, right)]).amplitudes
        mat += p * np.outer(psi, psi.conj())
    return DensityMatrix(shape, mat)
