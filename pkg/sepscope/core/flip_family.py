"""Flip operators and the two-entry witness operators built from them.

A witness for the split gamma | rest, a flipped set delta inside the rest and a
basis label j holds at most two signed unit entries. Two readings of the
operator are supported:

* ``printed``: +|f_delta j><j| - f_gamma |j><j| f_delta, with level pairs
  chosen jointly on gamma and delta.
* ``minor``: for every nonempty eps inside gamma,
  +|f_(eps+delta) j><j| - f_eps |j><j| f_delta. <psi|O|psi*> is then the
  (conjugated) 2x2 minor psi_j psi_(f j) - psi_(f_eps j) psi_(f_delta j),
  which vanishes on every gamma|rest product state.

Witness families are enumerated once per (shape, gamma, delta, reading) and
cached together with the index/block arrays the vectorized evaluators use.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from ..errors import EmptySubset, LevelOutOfRange, OverlapError, SiteOutOfRange
from .partitions import SubsetOfSites, make_subset, nonempty_subsets
from .tensor_core import BasisLabel, ComplexMatrix, SystemShape

logger = logging.getLogger(__name__)

SUPPORT = 4  # F = O + O^T touches at most four basis states


class FlipReading(str, Enum):
    PRINTED = "printed"
    MINOR = "minor"


@dataclass(frozen=True)
class PairAssignment:
    """Level pair (k, l), k < l, for every flipped site; stored as sorted (site, k, l) triples."""

    pairs: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        for site, k, l in self.pairs:
            if not k < l:
                raise LevelOutOfRange(f"site {site}: need k < l, got ({k}, {l})")

    @property
    def domain(self) -> SubsetOfSites:
        return tuple(site for site, _, _ in self.pairs)

    def restrict(self, sites: Sequence[int]) -> "PairAssignment":
        keep = set(sites)
        return PairAssignment(tuple(p for p in self.pairs if p[0] in keep))

    def __str__(self) -> str:
        return ",".join(f"{site}:{k}{l}" for site, k, l in self.pairs)


def pair_assignments(shape: SystemShape, sites: Sequence[int]) -> list[PairAssignment]:
    """Every joint choice of k < l per site, lexicographic in site order."""
    level_pairs = list(itertools.combinations(range(shape.d), 2))
    sites = sorted(sites)
    return [
        PairAssignment(tuple((site, k, l) for site, (k, l) in zip(sites, choice)))
        for choice in itertools.product(level_pairs, repeat=len(sites))
    ]


def _digits_table(shape: SystemShape) -> NDArray[np.int64]:
    """(n, d^n) table: row i-1 holds the digit of site i for every flat index."""
    return np.array(np.unravel_index(np.arange(shape.total_dim), shape.dims), dtype=np.int64)


# --- Single-site flip ---

@dataclass(frozen=True)
class SiteFlip:
    """sigma_kl = |k><l| + |l><k| on one site, identity elsewhere."""

    shape: SystemShape
    site: int
    k: int
    l: int

    def apply(self, flat: int) -> list[tuple[int, int]]:
        """Images of a basis state as (flat index, coefficient) pairs."""
        digits = list(np.unravel_index(flat, self.shape.dims))
        x = int(digits[self.site - 1])
        if self.k == self.l:
            return [(flat, 2)] if x == self.k else []
        if x not in (self.k, self.l):
            return []
        digits[self.site - 1] = self.l if x == self.k else self.k
        return [(int(np.ravel_multi_index(tuple(digits), self.shape.dims)), 1)]

    def dense(self) -> ComplexMatrix:
        dim = self.shape.total_dim
        out = np.zeros((dim, dim), dtype=np.complex128)
        for col in range(dim):
            for row, coeff in self.apply(col):
                out[row, col] += coeff
        return out


def flip_site(shape: SystemShape, i: int, k: int, l: int) -> SiteFlip:
    if not 1 <= i <= shape.n:
        raise SiteOutOfRange(f"site {i} outside 1..{shape.n}")
    if not (0 <= k < shape.d and 0 <= l < shape.d):
        raise LevelOutOfRange(f"levels ({k}, {l}) outside 0..{shape.d - 1}")
    return SiteFlip(shape, i, k, l)


# --- Multi-site flip ---

@dataclass(frozen=True)
class FlipMap:
    """Involutive action of f_delta on basis labels; -1 marks annihilated labels."""

    shape: SystemShape
    assignment: PairAssignment
    images: NDArray[np.int64]

    def apply(self, flat: int) -> int | None:
        image = int(self.images[flat])
        return None if image < 0 else image


def flip_subset(shape: SystemShape, assign: PairAssignment) -> FlipMap:
    for site, k, l in assign.pairs:
        if not 1 <= site <= shape.n:
            raise SiteOutOfRange(f"site {site} outside 1..{shape.n}")
        if l >= shape.d:
            raise LevelOutOfRange(f"level {l} outside 0..{shape.d - 1}")

    digits = _digits_table(shape)
    alive = np.ones(shape.total_dim, dtype=bool)
    for site, k, l in assign.pairs:
        row = digits[site - 1]
        alive &= (row == k) | (row == l)
        digits[site - 1] = np.where(row == k, l, np.where(row == l, k, row))

    images = np.ravel_multi_index(tuple(digits), shape.dims).astype(np.int64)
    images[~alive] = -1
    images.setflags(write=False)
    return FlipMap(shape, assign, images)


# --- Witnesses ---

@dataclass(frozen=True)
class WitnessTerm:
    row: int
    col: int
    coeff: int


@dataclass(frozen=True)
class SparseWitness:
    dim: int
    terms: tuple[WitnessTerm, ...]
    gamma: SubsetOfSites
    delta: SubsetOfSites
    flipped: SubsetOfSites  # gamma-side sites flipped by the second term
    assignment: PairAssignment
    label: BasisLabel
    zero: bool = False

    def support(self) -> tuple[int, ...]:
        return tuple(sorted({t.row for t in self.terms} | {t.col for t in self.terms}))


def _make_witness(shape, gamma, delta, flipped, assign, j, term1, term2) -> SparseWitness:
    terms = []
    if term1 is not None:
        terms.append(WitnessTerm(term1[0], term1[1], +1))
    if term2 is not None:
        terms.append(WitnessTerm(term2[0], term2[1], -1))
    zero = not terms or (
        len(terms) == 2 and (terms[0].row, terms[0].col) == (terms[1].row, terms[1].col)
    )
    return SparseWitness(
        dim=shape.total_dim,
        terms=() if zero else tuple(terms),
        gamma=gamma,
        delta=delta,
        flipped=flipped,
        assignment=assign,
        label=BasisLabel.from_flat(shape, j),
        zero=zero,
    )


def check_pair(shape: SystemShape, gamma, delta) -> tuple[SubsetOfSites, SubsetOfSites]:
    gamma = make_subset(gamma, shape.n)
    delta = make_subset(delta, shape.n)
    if not gamma or not delta:
        raise EmptySubset("gamma and delta must both be nonempty")
    if set(gamma) & set(delta):
        raise OverlapError(f"delta {delta} intersects gamma {gamma}")
    return gamma, delta


def enumerate_witnesses(
    shape: SystemShape,
    gamma: Sequence[int],
    delta: Sequence[int],
    reading: FlipReading = FlipReading.MINOR,
) -> list[SparseWitness]:
    """Witnesses in deterministic order: flipped gamma-side set, then level assignment, then label j."""
    gamma, delta = check_pair(shape, gamma, delta)
    return list(witness_family(shape, gamma, delta, FlipReading(reading)).witnesses)


def _enumerate(shape, gamma, delta, reading) -> list[SparseWitness]:
    out = []
    labels = range(shape.total_dim)
    sides = [gamma] if reading is FlipReading.PRINTED else nonempty_subsets(gamma)
    for eps in sides:
        for assign in pair_assignments(shape, eps + delta):
            f_eps = flip_subset(shape, assign.restrict(eps)).images
            f_delta = flip_subset(shape, assign.restrict(delta)).images
            f_both = flip_subset(shape, assign).images
            first = f_delta if reading is FlipReading.PRINTED else f_both
            for j in labels:
                term1 = (int(first[j]), j) if first[j] >= 0 else None
                term2 = (int(f_eps[j]), int(f_delta[j])) if f_eps[j] >= 0 and f_delta[j] >= 0 else None
                out.append(_make_witness(shape, gamma, delta, eps, assign, j, term1, term2))
    return out


@dataclass(frozen=True)
class WitnessFamily:
    """All witnesses of one (gamma, delta) plus dense views of the nonzero ones.

    rows/cols/coeffs are (W, 2) with zero-coefficient padding; support is (W, 4)
    basis indices and blocks the (W, 4, 4) restriction of F = O + O^T to them.
    Witnesses whose F agree up to sign share every spectrum; `classes` indexes
    one representative per such group and `class_sizes` counts its members.
    """

    shape: SystemShape
    gamma: SubsetOfSites
    delta: SubsetOfSites
    reading: FlipReading
    witnesses: tuple[SparseWitness, ...]
    rows: NDArray[np.int64]
    cols: NDArray[np.int64]
    coeffs: NDArray[np.float64]
    support: NDArray[np.int64]
    blocks: NDArray[np.float64]
    classes: NDArray[np.int64]
    class_sizes: NDArray[np.float64]

    @property
    def active(self) -> list[SparseWitness]:
        return [w for w in self.witnesses if not w.zero]


def witness_arrays(witnesses: Sequence[SparseWitness]) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Support indices padded to four and the matching blocks of F = O + O^T."""
    active = [w for w in witnesses if not w.zero]
    support = np.zeros((len(active), SUPPORT), dtype=np.int64)
    blocks = np.zeros((len(active), SUPPORT, SUPPORT), dtype=np.float64)
    for a, w in enumerate(active):
        idx = list(w.support())
        # pad with untouched indices: F vanishes there, so the nonzero spectrum is unchanged
        filler = (x for x in range(w.dim) if x not in idx)
        while len(idx) < SUPPORT:
            idx.append(next(filler))
        pos = {x: p for p, x in enumerate(idx)}
        support[a] = idx
        for t in w.terms:
            blocks[a, pos[t.row], pos[t.col]] += t.coeff
            blocks[a, pos[t.col], pos[t.row]] += t.coeff
    return support, blocks


@lru_cache(maxsize=512)
def witness_family(
    shape: SystemShape, gamma: SubsetOfSites, delta: SubsetOfSites, reading: FlipReading
) -> WitnessFamily:
    witnesses = _enumerate(shape, gamma, delta, reading)
    active = [w for w in witnesses if not w.zero]

    rows = np.zeros((len(active), 2), dtype=np.int64)
    cols = np.zeros((len(active), 2), dtype=np.int64)
    coeffs = np.zeros((len(active), 2), dtype=np.float64)
    for a, w in enumerate(active):
        for t, term in enumerate(w.terms):
            rows[a, t], cols[a, t], coeffs[a, t] = term.row, term.col, term.coeff
    support, blocks = witness_arrays(active)
    classes, class_sizes = _spectral_classes(support, blocks)

    for arr in (rows, cols, coeffs, support, blocks, classes, class_sizes):
        arr.setflags(write=False)
    logger.debug(
        "witness family gamma=%s delta=%s (%s): %d witnesses, %d nonzero, %d distinct spectra",
        gamma, delta, reading.value, len(witnesses), len(active), len(classes),
    )
    return WitnessFamily(
        shape, gamma, delta, reading, tuple(witnesses),
        rows, cols, coeffs, support, blocks, classes, class_sizes,
    )


def _spectral_classes(support: NDArray[np.int64], blocks: NDArray[np.float64]) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Groups witnesses by (support, F up to sign); F rho* F and hence the spectrum only see F up to sign."""
    first: dict[bytes, int] = {}
    sizes: list[int] = []
    reps: list[int] = []
    for a in range(len(blocks)):
        nz = blocks[a][np.nonzero(blocks[a])]
        sign = -1.0 if nz.size and nz[0] < 0 else 1.0
        key = support[a].tobytes() + (sign * blocks[a] + 0.0).tobytes()
        if key in first:
            sizes[first[key]] += 1
        else:
            first[key] = len(reps)
            reps.append(a)
            sizes.append(1)
    return np.array(reps, dtype=np.int64), np.array(sizes, dtype=np.float64)


def witness_dense(w: SparseWitness) -> ComplexMatrix:
    out = np.zeros((w.dim, w.dim), dtype=np.complex128)
    for t in w.terms:
        out[t.row, t.col] += t.coeff
    return out


def dump_witness(w: SparseWitness) -> str:
    """`gamma|delta|assignment|j|row,col,sign;row,col,sign`"""
    terms = ";".join(f"{t.row},{t.col},{t.coeff:+d}" for t in w.terms)
    return "|".join([
        ",".join(map(str, w.gamma)),
        ",".join(map(str, w.delta)),
        str(w.assignment),
        str(w.label),
        terms,
    ])
