import numpy as np
import pytest
from scipy.stats import unitary_group

from sepscope import config
from sepscope.core.flip_family import FlipReading, enumerate_witnesses, witness_dense
from sepscope.core.partitions import Partition, proper_subsets
from sepscope.core.tensor_core import PureState, SystemShape
from sepscope.errors import DimensionMismatch, FullSetError, InvalidRange, TrivialPartition
from sepscope.measures.means import geometric_mean
from sepscope.measures.pure import (
    DEFAULT_CONFIG,
    MeasureConfig,
    Normalization,
    c2_pure,
    calibrate_eta,
    concurrences,
    eta_pure,
    eta_via_concurrences,
    rm_pure,
    rm_pure_report,
    xi_pure,
)
from sepscope.states.random_states import random_pure_state
from sepscope.states.zoo import ghz, pair_product, product_state, w_state

GHZ4_R2 = ((11 / 14) ** 4 * (2 / 3) ** 3) ** (1 / 7)


def _bell() -> PureState:
    return ghz(2)


def test_geometric_mean():
    assert geometric_mean([4.0, 1.0]) == pytest.approx(2.0)
    assert geometric_mean([2.0, 8.0], [2, 1]) == pytest.approx(32 ** (1 / 3))
    assert geometric_mean([0.5, 0.0]) == 0.0
    with pytest.raises(DimensionMismatch):
        geometric_mean([1.0, 2.0], [1])


def test_geometric_mean_is_order_independent_when_reproducible(monkeypatch, rng):
    values = rng.uniform(1e-6, 2.0, size=2000)
    weights = rng.integers(1, 5, size=2000)
    order = rng.permutation(2000)

    monkeypatch.setattr(config, "REPRODUCIBLE", True)
    exact = geometric_mean(values, weights)
    assert geometric_mean(values[order], weights[order]) == exact

    monkeypatch.setattr(config, "REPRODUCIBLE", False)
    assert geometric_mean(values[order], weights[order]) == pytest.approx(exact, rel=1e-12)


def test_bell_pair_concurrence():
    assert c2_pure(_bell(), [1], [2]) == pytest.approx(1.0)
    assert c2_pure(_bell(), [1], [2], FlipReading.PRINTED) == pytest.approx(0.5)
    assert c2_pure(product_state("00"), [1], [2]) == 0.0


def test_c2_matches_dense_witness_sum(rng):
    psi = random_pure_state(SystemShape(3), rng)
    expected = sum(
        abs(psi.amplitudes.conj() @ witness_dense(w) @ psi.amplitudes.conj()) ** 2
        for w in enumerate_witnesses(psi.shape, [1], [2, 3])
    )
    assert c2_pure(psi, [1], [2, 3]) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "psi, gamma, expected",
    [
        (ghz(2), [1], 1.0),
        (ghz(4), [1, 2], 2 / 3),
        (ghz(4), [1], 1.0),
        (w_state(4), [1], 3 / 4),
        (product_state("0101"), [2, 3], 0.0),
    ],
)
def test_eta_hand_values(psi, gamma, expected):
    assert eta_pure(psi, gamma) == pytest.approx(expected, abs=1e-12)
    assert eta_via_concurrences(psi, gamma) == pytest.approx(expected, abs=1e-12)


def test_eta_rejects_full_set():
    with pytest.raises(FullSetError):
        eta_pure(ghz(3), [1, 2, 3])


@pytest.mark.parametrize("shape", [SystemShape(2), SystemShape(3), SystemShape(4), SystemShape(2, 3)])
def test_concurrence_path_agrees_with_linear_entropy(shape, rng):
    for _ in range(20):
        psi = random_pure_state(shape, rng)
        for gamma in proper_subsets(shape.n):
            assert eta_via_concurrences(psi, gamma) == pytest.approx(eta_pure(psi, gamma), rel=1e-9, abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize(
    "shape, samples",
    [(SystemShape(2), 200), (SystemShape(3), 200), (SystemShape(4), 200), (SystemShape(2, 3), 100)],
)
def test_concurrence_identity_on_full_sample(shape, samples, rng):
    for _ in range(samples):
        psi = random_pure_state(shape, rng)
        for gamma in proper_subsets(shape.n):
            assert eta_via_concurrences(psi, gamma) == pytest.approx(eta_pure(psi, gamma), rel=1e-9, abs=1e-12)


def test_calibration_reproduces_default_config():
    cfg = calibrate_eta()
    assert cfg.reading is DEFAULT_CONFIG.reading
    assert cfg.calibration_factor == pytest.approx(DEFAULT_CONFIG.calibration_factor, abs=1e-8)
    assert cfg.size_factors == ()


def test_calibration_needs_enough_samples():
    with pytest.raises(InvalidRange):
        calibrate_eta(samples=10)


def test_bare_sum_normalization():
    cfg = MeasureConfig(Normalization.BARE_SUM)
    assert eta_via_concurrences(_bell(), [1], cfg) == pytest.approx(1.0)
    assert eta_via_concurrences(ghz(4), [1, 2], cfg) == pytest.approx(1.0)


def test_ghz_xi_values():
    assert xi_pure(ghz(4), Partition.of([[1], [2, 3, 4]])) == pytest.approx(11 / 14)
    assert xi_pure(ghz(4), Partition.of([[1, 2], [3, 4]])) == pytest.approx(2 / 3)
    with pytest.raises(TrivialPartition):
        xi_pure(ghz(4), Partition.of([[1, 2, 3, 4]]))


def test_ghz_r2_closed_form():
    assert rm_pure(ghz(4), 2) == pytest.approx(GHZ4_R2, abs=1e-10)


def test_w_state_values():
    assert rm_pure(w_state(3), 3) == pytest.approx(8 / 9)
    assert rm_pure(w_state(3), 2) == pytest.approx(20 / 27)


def test_rm_edge_cases():
    assert rm_pure(ghz(4), 1) == 0.0
    assert rm_pure(product_state("0000"), 2) == 0.0
    with pytest.raises(InvalidRange):
        rm_pure(ghz(4), 5)
    with pytest.raises(InvalidRange):
        rm_pure(ghz(4), 0)


def test_zero_at_m_implies_zero_below():
    pairs = pair_product(SystemShape(4), [(1, 2), (3, 4)])
    assert rm_pure(pairs, 2) == 0.0
    assert rm_pure(pairs, 3) > 0.0


def test_rm_report_breakdown():
    report = rm_pure_report(ghz(4), 2)
    assert report["m"] == 2
    assert len(report["per_partition"]) == 7
    row = report["per_partition"][0]
    assert row["xi"] == pytest.approx(np.mean(row["per_block_eta"]))


def test_rm_is_invariant_under_local_unitaries(rng):
    psi = random_pure_state(SystemShape(4), rng)
    local = unitary_group.rvs(2, random_state=rng)
    for _ in range(3):
        local = np.kron(local, unitary_group.rvs(2, random_state=rng))
    moved = PureState(psi.shape, np.exp(0.3j) * (local @ psi.amplitudes))
    for m in (2, 3, 4):
        assert rm_pure(moved, m) == pytest.approx(rm_pure(psi, m), rel=1e-9)


def test_concurrences_vanish_exactly_on_products(rng):
    left = random_pure_state(SystemShape(1), rng).amplitudes
    right = random_pure_state(SystemShape(2), rng).amplitudes
    product = PureState(SystemShape(3), np.kron(left, right))
    assert all(c.c2 < 1e-12 for c in concurrences(product, [1]))

    entangled = random_pure_state(SystemShape(3), rng)
    assert sum(c.c2 for c in concurrences(entangled, [1])) > 1e-6
