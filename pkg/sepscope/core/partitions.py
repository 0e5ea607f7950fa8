"""Subsets of sites, set partitions, Stirling counts and orbit reduction under site relabelings.

Subsets are sorted tuples of 1-based site labels. Partitions keep their blocks
in canonical order (sorted by smallest element) so equality is set equality.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from math import comb, factorial
from pathlib import Path
from typing import Iterable, Sequence

from sympy.combinatorics import Permutation, PermutationGroup

from ..errors import EmptySubset, InvalidRange, NotAGroup, ParseError, SiteOutOfRange

logger = logging.getLogger(__name__)

SubsetOfSites = tuple[int, ...]


def make_subset(members: Iterable[int], n: int | None = None) -> SubsetOfSites:
    members = tuple(sorted(set(int(i) for i in members)))
    if n is not None and any(not 1 <= i <= n for i in members):
        raise SiteOutOfRange(f"sites {members} outside 1..{n}")
    if any(i < 1 for i in members):
        raise SiteOutOfRange(f"site labels start at 1, got {members}")
    return members


def complement(subset: Iterable[int], n: int) -> SubsetOfSites:
    taken = set(subset)
    return tuple(i for i in range(1, n + 1) if i not in taken)


def nonempty_subsets(universe: Iterable[int]) -> list[SubsetOfSites]:
    """All nonempty subsets, by size and then lexicographically: {2,3} -> (2,), (3,), (2, 3)."""
    items = make_subset(universe)
    return [c for r in range(1, len(items) + 1) for c in itertools.combinations(items, r)]


def proper_subsets(n: int) -> list[SubsetOfSites]:
    """Nonempty subsets of 1..n other than 1..n itself."""
    return [s for s in nonempty_subsets(range(1, n + 1)) if len(s) < n]


# --- Partitions ---

@dataclass(frozen=True, order=True)
class Partition:
    blocks: tuple[SubsetOfSites, ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        """Canonicalizes and validates: disjoint nonempty blocks covering 1..n."""
        canon = tuple(sorted((make_subset(b) for b in blocks), key=lambda b: (b[0] if b else 0, b)))
        if any(len(b) == 0 for b in canon):
            raise EmptySubset("partition has an empty block")
        labels = [i for b in canon for i in b]
        if len(labels) != len(set(labels)):
            raise InvalidRange(f"blocks {canon} overlap")
        n = max(labels) if n is None else n
        if sorted(labels) != list(range(1, n + 1)):
            raise InvalidRange(f"blocks {canon} do not cover 1..{n}")
        return cls(canon)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def relabel(self, perm: "SitePermutation") -> "Partition":
        return Partition.of((perm.apply(b) for b in self.blocks), self.n)

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    def __str__(self) -> str:
        return "{" + ",".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks) + "}"


def set_partitions(n: int, m: int) -> list[Partition]:
    """Partitions of 1..n into exactly m blocks, from restricted growth strings in lexicographic order."""
    if not 1 <= m <= n:
        raise InvalidRange(f"need 1 <= m <= n, got n={n}, m={m}")

    out: list[Partition] = []
    rgs = [0] * n

    def extend(pos: int, used: int) -> None:
        # used = number of blocks opened by rgs[:pos]
        if used + (n - pos) < m:
            return
        if pos == n:
            if used == m:
                blocks = [[] for _ in range(m)]
                for site, b in enumerate(rgs, start=1):
                    blocks[b].append(site)
                out.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        for b in range(min(used + 1, m)):
            rgs[pos] = b
            extend(pos + 1, max(used, b + 1))

    rgs[0] = 0
    extend(1, 1)
    return out


def stirling(n: int, m: int) -> int:
    """Stirling number of the second kind from the alternating sum

        S(n, m) = sum_{k=1}^{m} (-1)^(m-k) k^(n-1) / ((k-1)! (m-k)!)

    evaluated over the common denominator (m-1)! in exact integers.
    """
    if not 1 <= m <= n:
        raise InvalidRange(f"need 1 <= m <= n, got n={n}, m={m}")
    total = sum((-1) ** (m - k) * comb(m - 1, k - 1) * k ** (n - 1) for k in range(1, m + 1))
    value, rest = divmod(total, factorial(m - 1))
    assert rest == 0
    return value


def bell_number(n: int) -> int:
    """Bell number from the Bell triangle."""
    if n < 0:
        raise InvalidRange(f"n must be >= 0, got {n}")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


# --- Site permutations and orbits ---

@dataclass(frozen=True)
class SitePermutation:
    """Bijection on 1..n; images[i-1] is the image of site i."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise NotAGroup(f"{self.images} is not a bijection on 1..{len(self.images)}")

    @classmethod
    def identity(cls, n: int) -> "SitePermutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Sequence[int]) -> "SitePermutation":
        images = list(range(1, n + 1))
        for cycle in cycles:
            for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
                images[a - 1] = b
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    def apply(self, sites: Iterable[int]) -> SubsetOfSites:
        return tuple(sorted(self.images[i - 1] for i in sites))

    def compose(self, other: "SitePermutation") -> "SitePermutation":
        """self after other."""
        return SitePermutation(tuple(self.images[other.images[i] - 1] for i in range(self.n)))

    def inverse(self) -> "SitePermutation":
        inv = [0] * self.n
        for i, image in enumerate(self.images, start=1):
            inv[image - 1] = i
        return SitePermutation(tuple(inv))


def close_group(generators: Sequence[SitePermutation]) -> list[SitePermutation]:
    """All elements of the group generated by `generators`."""
    if not generators:
        raise NotAGroup("no generators given")
    n = generators[0].n
    group = PermutationGroup([Permutation([i - 1 for i in g.images]) for g in generators])
    elements = [SitePermutation(tuple(i + 1 for i in af)) for af in group.generate(af=True)]
    return sorted(elements, key=lambda g: g.images) if elements else [SitePermutation.identity(n)]


def check_group(group: Sequence[SitePermutation]) -> None:
    if not group:
        raise NotAGroup("empty group")
    n = group[0].n
    if any(g.n != n for g in group):
        raise NotAGroup("permutations act on different site counts")
    members = set(group)
    if SitePermutation.identity(n) not in members:
        raise NotAGroup("identity missing")
    for a in members:
        for b in members:
            if a.compose(b) not in members:
                raise NotAGroup(f"{a.images} o {b.images} not in group")


def vierergruppe() -> list[SitePermutation]:
    """{e, (12), (34), (12)(34)} on four sites."""
    return [
        SitePermutation.identity(4),
        SitePermutation.from_cycles(4, (1, 2)),
        SitePermutation.from_cycles(4, (3, 4)),
        SitePermutation.from_cycles(4, (1, 2), (3, 4)),
    ]


def load_group(path: str | Path) -> list[SitePermutation]:
    """Reads a JSON list of image arrays and closes it to a group."""
    try:
        raw = json.loads(Path(path).read_text())
        generators = [SitePermutation(tuple(int(i) for i in images)) for images in raw]
    except (OSError, ValueError, TypeError) as exc:
        raise ParseError(f"cannot read permutation group from {path}: {exc}") from exc
    return close_group(generators)


@dataclass(frozen=True)
class OrbitTable:
    entries: tuple[tuple[Partition, int], ...]

    @property
    def total(self) -> int:
        return sum(mult for _, mult in self.entries)

    def to_json(self) -> list[dict]:
        return [{"partition": p.to_json(), "multiplicity": mult} for p, mult in self.entries]


def orbit_reduce(parts: Sequence[Partition], group: Sequence[SitePermutation]) -> OrbitTable:
    """Groups `parts` into orbits under relabeling; each orbit is represented by its smallest member."""
    check_group(group)
    sizes = {part.n for part in parts}
    if sizes - {group[0].n}:
        raise NotAGroup(f"group acts on {group[0].n} sites but partitions cover {sorted(sizes)}")
    remaining = list(dict.fromkeys(parts))
    entries = []
    seen: set[Partition] = set()
    for part in sorted(remaining):
        if part in seen:
            continue
        orbit = {part.relabel(g) for g in group}
        seen |= orbit
        members = [p for p in remaining if p in orbit]
        entries.append((min(orbit & set(members)), len(members)))
    logger.debug("orbit reduction: %d partitions -> %d orbits", len(remaining), len(entries))
    return OrbitTable(tuple(entries))
