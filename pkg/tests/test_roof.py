import numpy as np
import pytest

from sepscope.core.tensor_core import DensityMatrix, SystemShape
from sepscope.errors import ChainViolation, SizeTooSmall
from sepscope.measures.mixed import BoundVariant
from sepscope.measures.pure import c2_pure
from sepscope.measures.roof import random_ensemble, roof_upper, run_chain_campaign, validate_chain
from sepscope.states.random_states import random_density, random_pure_state
from sepscope.states.zoo import product_state, werner


def test_ensemble_reconstructs_the_state(rng):
    rho = random_density(SystemShape(2), rng, rank=3)
    ens = random_ensemble(rho, 6, seed=3)
    assert ens.weights.sum() == pytest.approx(1.0)
    assert len(ens.states) <= 6
    np.testing.assert_allclose(ens.reconstruct(), rho.mat, atol=1e-10)
    for state in ens.states:
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0)


def test_ensemble_of_a_pure_state_repeats_it(rng):
    psi = random_pure_state(SystemShape(2), rng)
    ens = random_ensemble(psi.projector(), 3, seed=1)
    for state in ens.states:
        assert abs(np.vdot(state.amplitudes, psi.amplitudes)) == pytest.approx(1.0)


def test_single_qubit_ensemble():
    rho = DensityMatrix(SystemShape(1), np.eye(2) / 2)
    np.testing.assert_allclose(random_ensemble(rho, 2, seed=0).reconstruct(), rho.mat, atol=1e-12)


def test_ensemble_size_below_rank():
    with pytest.raises(SizeTooSmall):
        random_ensemble(DensityMatrix(SystemShape(2), np.eye(4) / 4), 3)


def test_roof_of_pure_state_is_its_concurrence(rng):
    psi = random_pure_state(SystemShape(3), rng)
    assert roof_upper(psi.projector(), [1], [2, 3], trials=5) == pytest.approx(c2_pure(psi, [1], [2, 3]), abs=1e-12)


def test_roof_estimate_only_improves_with_more_trials():
    rho = werner(0.6)
    assert roof_upper(rho, [1], [2], trials=50) <= roof_upper(rho, [1], [2], trials=10)


def test_roof_orders_werner_states():
    # P+ is pure, so its roof is exact; random decompositions of the separable Werner state do better
    assert roof_upper(werner(1 / 3), [1], [2], trials=200) < roof_upper(werner(1.0), [1], [2], trials=5) - 0.1


def test_chain_holds_for_quadrature(rng):
    for _ in range(5):
        rho = random_density(SystemShape(2), rng)
        report = validate_chain(rho, [1], trials=100)
        assert report.ok
        assert all(d.margin >= 0 for d in report.per_delta)


def test_chain_trivial_for_product_state():
    report = validate_chain(product_state("000").projector(), [2], trials=10)
    assert report.total_bound == 0.0
    assert report.total_roof == pytest.approx(0.0, abs=1e-12)


def test_literal_sum_violates_the_chain_on_bell_pair():
    with pytest.raises(ChainViolation) as info:
        validate_chain(werner(1.0), [1], BoundVariant.SUM_LITERAL, trials=10)
    assert info.value.delta == (2,)
    assert info.value.margin < 0
    assert info.value.exit_code == 1

    report = validate_chain(werner(1.0), [1], "literal", trials=10, raise_on_violation=False)
    assert not report.ok
    assert report.per_delta[0].bound_sq == pytest.approx(16.0)


@pytest.mark.slow
def test_chain_campaign():
    report = run_chain_campaign()
    assert report.ok, report.violations[:3]
    assert report.checked == 50 * 2 + 25 * 6
