import io

import pytest

from sepscope.core.partitions import vierergruppe
from sepscope.errors import InvalidRange
from sepscope.experiments.sweep import ColorBin, SweepGrid, SweepRow, bin_value, check_structure, run_sweep, write_sweep_csv
from sepscope.measures.mixed import BoundVariant


@pytest.mark.parametrize(
    "value, expected",
    [
        (0.0, ColorBin.RED),
        (1e-13, ColorBin.RED),
        (0.1, ColorBin.DARK_PURPLE),
        (0.25, ColorBin.DARK_PURPLE),
        (0.2500001, ColorBin.BRIGHT_PURPLE),
        (0.5, ColorBin.BRIGHT_PURPLE),
        (0.75, ColorBin.BLUE),
        (1.0, ColorBin.ASH),
        (1.5, ColorBin.OVERFLOW),
    ],
)
def test_bins(value, expected):
    assert bin_value(value) is expected


def test_grid_skips_points_outside_the_simplex():
    assert len(SweepGrid(11, 11).points()) == 66
    assert len(SweepGrid(3, 5).points()) == 9


@pytest.fixture(scope="module")
def small_grid():
    return run_sweep(p1_steps=11, threads=1, symmetry=vierergruppe())


def test_sweep_rows_are_p1_major(small_grid):
    keys = [(row.i, row.k) for row in small_grid.rows]
    assert keys == sorted(keys)
    assert len(small_grid.rows) == 66


def test_sweep_corner_values(small_grid):
    rows = {(row.i, row.k): row for row in small_grid.rows}
    pairs_only = rows[(10, 0)]
    assert small_grid.value(pairs_only, 2) == 0.0
    assert pairs_only.bins()[0] is ColorBin.RED
    assert small_grid.value(pairs_only, 3) > 0.0

    noise_only = rows[(0, 0)]
    assert all(v == 0.0 for v in noise_only.values)
    assert noise_only.r == "inf"

    ghz_row = rows[(0, 10)]
    assert small_grid.value(ghz_row, 2) == pytest.approx(((11 / 14) ** 4 * (2 / 3) ** 3) ** (1 / 7), abs=1e-9)


def test_sweep_structure_small(small_grid):
    report = check_structure(small_grid)
    assert report.ok, report.to_dict()


def test_symmetry_does_not_change_the_sweep(small_grid):
    plain = run_sweep(p1_steps=11, threads=1, symmetry=None)
    for a, b in zip(plain.rows, small_grid.rows):
        assert b.values == pytest.approx(a.values, abs=1e-10)


def test_csv_is_deterministic(small_grid):
    first, second = io.StringIO(), io.StringIO()
    write_sweep_csv(small_grid, first)
    write_sweep_csv(small_grid, second)
    assert first.getvalue() == second.getvalue()

    lines = first.getvalue().splitlines()
    assert lines[0] == "p1,p2,q,r,R2,R3,R4,bin2,bin3,bin4"
    assert lines[1].startswith("0,0,1,inf,0,0,0,red,red,red")
    assert len(lines) == 67


def test_csv_to_file(small_grid, tmp_path):
    out = tmp_path / "sweep.csv"
    write_sweep_csv(small_grid, out)
    assert out.read_text().count("\n") == 67


def test_sweep_rejects_bad_arguments():
    with pytest.raises(InvalidRange):
        run_sweep(p1_steps=1)
    with pytest.raises(InvalidRange):
        run_sweep(p1_steps=3, ms=(5,))


def test_slice_violations_fail_ok_unless_literal():
    grid = SweepGrid(3, 3, variant=BoundVariant.QUADRATURE)
    grid.rows = [
        SweepRow(1, 0, 0.5, 0.0, 0.5, 0.0, (0.1, 0.2, 0.3)),
        SweepRow(0, 1, 0.0, 0.5, 0.5, "inf", (0.05, 0.2, 0.3)),
    ]
    # same q = 0.5: R2 rises from 0.05 to 0.1 as p1 grows, i.e. as r decreases
    report = check_structure(grid)
    assert len(report.slices) == 1
    assert not report.ok

    grid.variant = BoundVariant.SUM_LITERAL
    report = check_structure(grid)
    assert len(report.slices) == 1
    assert report.ok
    assert report.to_dict()["r_slice_monotonicity_R2"]["required"] is False


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["quadrature", "max"])
def test_structure_on_41_by_41_grid(variant):
    grid = run_sweep(p1_steps=41, variant=variant, threads=2, symmetry=vierergruppe())
    report = check_structure(grid)
    assert not report.nesting
    assert not report.rays
    assert not report.slices
    assert report.ok


@pytest.mark.slow
def test_literal_variant_breaks_slice_monotonicity():
    grid = run_sweep(p1_steps=41, variant="literal", threads=2, symmetry=vierergruppe())
    report = check_structure(grid)
    assert not report.nesting
    assert not report.rays
    assert report.slices
    assert report.ok


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["quadrature", "max", "literal"])
def test_structure_on_desk_scale_grid(variant):
    grid = run_sweep(p1_steps=101, variant=variant, threads=4, symmetry=vierergruppe())
    assert len(grid.rows) == 5151
    report = check_structure(grid)
    assert report.ok, report.to_dict()
