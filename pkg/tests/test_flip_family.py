import numpy as np
import pytest

from sepscope.core.flip_family import (
    FlipReading,
    PairAssignment,
    dump_witness,
    enumerate_witnesses,
    flip_site,
    flip_subset,
    witness_dense,
    witness_family,
)
from sepscope.core.partitions import complement, nonempty_subsets, proper_subsets
from sepscope.core.tensor_core import SystemShape, product_on_sites
from sepscope.errors import EmptySubset, LevelOutOfRange, OverlapError, SiteOutOfRange
from sepscope.measures.pure import family_overlaps
from sepscope.states.random_states import random_pure_state

QUBITS_2 = SystemShape(2)


def test_site_flip_on_a_qubit_is_pauli_x():
    np.testing.assert_array_equal(flip_site(SystemShape(1), 1, 0, 1).dense(), [[0, 1], [1, 0]])


def test_site_flip_with_equal_levels_doubles_the_projector():
    np.testing.assert_array_equal(flip_site(SystemShape(1, 3), 1, 1, 1).dense(), np.diag([0, 2, 0]))


def test_site_flip_acts_on_one_site_only():
    # |10> -> |12> on two qutrits flipping levels 0 <-> 2 on site 2
    assert flip_site(SystemShape(2, 3), 2, 0, 2).apply(3) == [(5, 1)]
    assert flip_site(SystemShape(2, 3), 2, 0, 2).apply(4) == []


def test_site_flip_rejects_bad_arguments():
    with pytest.raises(SiteOutOfRange):
        flip_site(QUBITS_2, 3, 0, 1)
    with pytest.raises(LevelOutOfRange):
        flip_site(SystemShape(2, 3), 1, 0, 3)


def test_flip_subset_images():
    one = flip_subset(QUBITS_2, PairAssignment(((1, 0, 1),)))
    both = flip_subset(QUBITS_2, PairAssignment(((1, 0, 1), (2, 0, 1))))
    assert one.apply(1) == 3  # |01> -> |11>
    assert both.apply(0) == 3  # |00> -> |11>

    qutrit = flip_subset(SystemShape(1, 3), PairAssignment(((1, 0, 1),)))
    assert qutrit.apply(2) is None


def test_flip_subset_is_an_involution():
    f = flip_subset(SystemShape(3, 3), PairAssignment(((1, 0, 2), (3, 1, 2))))
    alive = np.flatnonzero(f.images >= 0)
    np.testing.assert_array_equal(f.images[f.images[alive]], alive)


def test_printed_witness_for_label_01():
    ws = enumerate_witnesses(QUBITS_2, [1], [2], FlipReading.PRINTED)
    assert len(ws) == 4
    w = ws[1]
    assert str(w.label) == "01"

    expected = np.zeros((4, 4))
    expected[0, 1] = 1  # |00><01|
    expected[3, 0] = -1  # -|11><00|
    np.testing.assert_array_equal(witness_dense(w).real, expected)
    assert dump_witness(w) == "1|2|1:01,2:01|01|0,1,+1;3,0,-1"


@pytest.mark.parametrize(
    "shape, gamma, delta, reading, count",
    [
        (QUBITS_2, [1], [2], FlipReading.MINOR, 4),
        (SystemShape(2, 3), [1], [2], FlipReading.PRINTED, 81),
        (SystemShape(2, 3), [1], [2], FlipReading.MINOR, 81),
        (SystemShape(3), [1, 2], [3], FlipReading.PRINTED, 8),
        (SystemShape(3), [1, 2], [3], FlipReading.MINOR, 24),
    ],
)
def test_witness_counts(shape, gamma, delta, reading, count):
    assert len(enumerate_witnesses(shape, gamma, delta, reading)) == count


def test_witness_argument_errors():
    with pytest.raises(OverlapError):
        enumerate_witnesses(SystemShape(3), [1, 2], [2, 3])
    with pytest.raises(EmptySubset):
        enumerate_witnesses(SystemShape(3), [1], [])


def test_annihilated_witnesses_are_flagged_zero():
    ws = enumerate_witnesses(SystemShape(2, 3), [1], [2], FlipReading.PRINTED)
    zero = [w for w in ws if w.zero]
    assert zero
    for w in zero:
        assert not witness_dense(w).any()


def test_minor_witnesses_vanish_on_products(rng):
    shape = SystemShape(3)
    for gamma in proper_subsets(shape.n):
        rest = complement(gamma, shape.n)
        left = random_pure_state(SystemShape(len(gamma)), rng).amplitudes
        right = random_pure_state(SystemShape(len(rest)), rng).amplitudes
        psi = product_on_sites(shape, [(gamma, left), (rest, right)])
        for delta in nonempty_subsets(rest):
            family = witness_family(shape, gamma, delta, FlipReading.MINOR)
            np.testing.assert_allclose(family_overlaps(psi.amplitudes, family), 0, atol=1e-14)


def test_printed_witnesses_do_not_vanish_on_every_product():
    psi = product_on_sites(QUBITS_2, [((1,), [1, 0]), ((2,), np.array([1, 1]) / np.sqrt(2))])
    family = witness_family(QUBITS_2, (1,), (2,), FlipReading.PRINTED)
    assert np.sum(np.abs(family_overlaps(psi.amplitudes, family)) ** 2) == pytest.approx(0.5)


def test_family_blocks_are_symmetric_and_classes_cover_witnesses():
    family = witness_family(SystemShape(3), (1,), (2, 3), FlipReading.MINOR)
    np.testing.assert_array_equal(family.blocks, family.blocks.swapaxes(1, 2))
    assert family.class_sizes.sum() == len(family.active)
    for a, w in enumerate(family.active):
        assert set(w.support()) <= set(family.support[a])


def test_all_bell_pair_witnesses_share_one_spectrum_class():
    family = witness_family(QUBITS_2, (1,), (2,), FlipReading.MINOR)
    assert len(family.classes) == 1
    assert family.class_sizes[0] == 4
