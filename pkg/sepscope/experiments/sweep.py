"""Grid sweep of R~_m over the four-qubit noise family, CSV output and structural checks.

Grid point (i, k) sits at p1 = i / (p1_steps - 1), p2 = k / (p2_steps - 1);
points with p1 + p2 > 1 are skipped. Rows come out p1-major whatever order the
workers finish in.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, TextIO

from .. import config
from ..core.partitions import SitePermutation, vierergruppe
from ..errors import InvalidRange, IoError
from ..measures.mixed import PRODUCTION_VARIANT, BoundVariant, check_symmetry, eta_bound_table, rm_bound_from_table
from ..measures.pure import DEFAULT_CONFIG, MeasureConfig
from ..observability import tracer
from ..states.zoo import BBOParams, bbo_state, coords

logger = logging.getLogger(__name__)

ZERO_BIN = 1e-12
STRUCTURE_SLACK = 1e-10


class ColorBin(str, Enum):
    RED = "red"
    DARK_PURPLE = "dark-purple"
    BRIGHT_PURPLE = "bright-purple"
    BLUE = "blue"
    ASH = "ash"
    OVERFLOW = "overflow"


def bin_value(value: float) -> ColorBin:
    """Upper bin edges are inclusive; values above 1 are reported, not clamped."""
    if value < ZERO_BIN:
        return ColorBin.RED
    if value <= 0.25:
        return ColorBin.DARK_PURPLE
    if value <= 0.5:
        return ColorBin.BRIGHT_PURPLE
    if value <= 0.75:
        return ColorBin.BLUE
    if value <= 1.0:
        return ColorBin.ASH
    return ColorBin.OVERFLOW


@dataclass(frozen=True)
class SweepRow:
    i: int
    k: int
    p1: float
    p2: float
    q: float
    r: float | str
    values: tuple[float, ...]  # R~_m in the order of SweepGrid.ms

    def bins(self) -> tuple[ColorBin, ...]:
        return tuple(bin_value(v) for v in self.values)


@dataclass
class SweepGrid:
    p1_steps: int
    p2_steps: int
    ms: tuple[int, ...] = (2, 3, 4)
    variant: BoundVariant = PRODUCTION_VARIANT
    rows: list[SweepRow] = field(default_factory=list)

    def points(self) -> list[tuple[int, int]]:
        a, b = self.p1_steps - 1, self.p2_steps - 1
        return [(i, k) for i in range(self.p1_steps) for k in range(self.p2_steps) if i * b + k * a <= a * b]

    def value(self, row: SweepRow, m: int) -> float:
        return row.values[self.ms.index(m)]


def _evaluate_point(args) -> SweepRow:
    i, k, p1_steps, p2_steps, ms, variant, cfg, symmetric, fast = args
    p = BBOParams(min(1.0, i / (p1_steps - 1)), min(1.0, k / (p2_steps - 1)))
    rho = bbo_state(p)
    table = eta_bound_table(rho, variant, cfg, fast, symmetry=vierergruppe() if symmetric else None)
    c = coords(p)
    return SweepRow(i, k, p.p1, p.p2, c.q, c.r, tuple(rm_bound_from_table(table, 4, m) for m in ms))


def run_sweep(
    p1_steps: int = 101,
    p2_steps: int | None = None,
    ms: Sequence[int] = (2, 3, 4),
    variant: BoundVariant = PRODUCTION_VARIANT,
    threads: int | None = None,
    cfg: MeasureConfig = DEFAULT_CONFIG,
    symmetry: Sequence[SitePermutation] | None = None,
    fast: bool | None = None,
) -> SweepGrid:
    """Evaluates R~_m on the grid; `symmetry` may only be the Vierergruppe, which every grid state respects."""
    p2_steps = p1_steps if p2_steps is None else p2_steps
    if p1_steps < 2 or p2_steps < 2:
        raise InvalidRange(f"need at least 2 steps per axis, got {p1_steps} x {p2_steps}")
    if any(not 1 <= m <= 4 for m in ms):
        raise InvalidRange(f"m values {list(ms)} outside 1..4")
    variant = BoundVariant(variant)
    threads = config.THREADS if threads is None else max(1, threads)
    symmetric = bool(symmetry)
    if symmetric:
        check_symmetry(bbo_state(BBOParams(0.3, 0.3)), symmetry)
        if set(symmetry) != set(vierergruppe()):
            raise InvalidRange("sweeps only use the Vierergruppe symmetry")

    grid = SweepGrid(p1_steps, p2_steps, tuple(ms), variant)
    tasks = [(i, k, p1_steps, p2_steps, grid.ms, variant, cfg, symmetric, fast) for i, k in grid.points()]

    with tracer(__name__).start_as_current_span("sweep") as span:
        span.set_attribute("points", len(tasks))
        span.set_attribute("threads", threads)
        span.set_attribute("variant", variant.value)
        logger.info("🧮 Sweeping %d grid points (%s, %d worker(s))...", len(tasks), variant.value, threads)
        if threads == 1:
            grid.rows = [_evaluate_point(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                grid.rows = list(pool.map(_evaluate_point, tasks, chunksize=max(1, len(tasks) // (8 * threads))))
    return grid


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_sweep_csv(grid: SweepGrid, out: str | Path | TextIO) -> None:
    header = ["p1", "p2", "q", "r"] + [f"R{m}" for m in grid.ms] + [f"bin{m}" for m in grid.ms]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in grid.rows:
        r = row.r if isinstance(row.r, str) else _fmt(row.r)
        writer.writerow(
            [_fmt(row.p1), _fmt(row.p2), _fmt(row.q), r]
            + [_fmt(v) for v in row.values]
            + [b.value for b in row.bins()]
        )

    if hasattr(out, "write"):
        out.write(buf.getvalue())
        return
    try:
        Path(out).write_text(buf.getvalue())
    except OSError as exc:
        raise IoError(f"cannot write sweep to {out}: {exc}") from exc


# --- Structure ---

@dataclass
class StructureReport:
    """Violations of the expected contour structure.

    The literal variant breaks r-slice monotonicity (c) on the noise family, so
    for it (c) is reported without failing `ok`.
    """

    nesting: list[dict] = field(default_factory=list)
    rays: list[dict] = field(default_factory=list)
    slices: list[dict] = field(default_factory=list)
    slices_required: bool = True

    @property
    def ok(self) -> bool:
        return not self.nesting and not self.rays and not (self.slices_required and self.slices)

    def to_dict(self) -> dict:
        return {
            "zero_set_nesting": {"violations": len(self.nesting), "examples": self.nesting[:5]},
            "q_ray_monotonicity": {"violations": len(self.rays), "examples": self.rays[:5]},
            "r_slice_monotonicity_R2": {"violations": len(self.slices), "examples": self.slices[:5], "required": self.slices_required},
            "ok": self.ok,
        }


def _ray_key(row: SweepRow, grid: SweepGrid) -> tuple[int, int] | None:
    # direction (p1, p2) in lowest terms over the common denominator; None at the origin
    a, b = row.i * (grid.p2_steps - 1), row.k * (grid.p1_steps - 1)
    g = math.gcd(a, b)
    return None if g == 0 else (a // g, b // g)


def check_structure(grid: SweepGrid, slack: float = STRUCTURE_SLACK) -> StructureReport:
    """(a) R~_m = 0 implies R~_{m-1} = 0; (b) along each ray of fixed r every R~_m is
    non-increasing in q; (c) at fixed q, R~_2 is non-increasing as r decreases."""
    report = StructureReport(slices_required=grid.variant is not BoundVariant.SUM_LITERAL)
    ms = sorted(grid.ms)

    for row in grid.rows:
        for lo, hi in zip(ms, ms[1:]):
            if grid.value(row, hi) < ZERO_BIN and grid.value(row, lo) >= ZERO_BIN:
                report.nesting.append({"p1": row.p1, "p2": row.p2, "zero_m": hi, "nonzero_m": lo})

    origin = [row for row in grid.rows if _ray_key(row, grid) is None]
    rays: dict[tuple[int, int], list[SweepRow]] = {}
    for row in grid.rows:
        key = _ray_key(row, grid)
        if key is not None:
            rays.setdefault(key, []).append(row)
    for key, members in rays.items():
        members = sorted(members, key=lambda r: r.q) + origin
        for m in grid.ms:
            for near, far in zip(members, members[1:]):
                if grid.value(far, m) > grid.value(near, m) + slack:
                    report.rays.append({"ray": list(key), "m": m, "q": far.q, "increase": grid.value(far, m) - grid.value(near, m)})

    if 2 in grid.ms:
        slices: dict[float, list[SweepRow]] = {}
        for row in grid.rows:
            if row.i or row.k:
                slices.setdefault(round(row.q, 12), []).append(row)
        for q, members in slices.items():
            # r descending: p1 ascending along a slice
            members = sorted(members, key=lambda r: r.p1)
            for prev, nxt in zip(members, members[1:]):
                if grid.value(nxt, 2) > grid.value(prev, 2) + slack:
                    report.slices.append({"q": q, "p1": nxt.p1, "increase": grid.value(nxt, 2) - grid.value(prev, 2)})

    logger.info(
        "📐 Structure: %d nesting, %d ray, %d slice violations",
        len(report.nesting), len(report.rays), len(report.slices),
    )
    return report
