import numpy as np
import pytest

from sepscope.core.partitions import vierergruppe
from sepscope.core.tensor_core import DensityMatrix, PureState, SystemShape, partial_trace, purity, validate_density
from sepscope.errors import InvalidRange, InvalidWeights, MixedStateError, ParseError, SiteOutOfRange
from sepscope.measures.mixed import check_symmetry
from sepscope.states.random_states import random_density, random_product_mixture
from sepscope.states.spec_parser import as_pure, parse_state
from sepscope.states.zoo import (
    RATIO_INF,
    BBOParams,
    NoiseCoords,
    bbo_state,
    bell_pair_projector,
    coords,
    ghz,
    isotropic_mix,
    params_from_coords,
    phi_plus,
    w_state,
    werner,
)


def test_ghz_amplitudes():
    psi = ghz(4)
    assert psi.amplitudes[0] == pytest.approx(1 / np.sqrt(2))
    assert psi.amplitudes[15] == pytest.approx(1 / np.sqrt(2))
    np.testing.assert_allclose(ghz(2).amplitudes, phi_plus())
    with pytest.raises(InvalidRange):
        ghz(1)


def test_bell_pair_projector_has_maximally_mixed_halves():
    p = bell_pair_projector((1, 3), SystemShape(4))
    assert purity(p) == pytest.approx(1.0)
    np.testing.assert_allclose(partial_trace(p, [1]).mat, np.eye(2) / 2)
    with pytest.raises(SiteOutOfRange):
        bell_pair_projector((2, 2), SystemShape(4))


def test_w_state_marginal():
    assert purity(partial_trace(w_state(4).projector(), [1])) == pytest.approx(5 / 8)


def test_werner_and_isotropic_mix():
    np.testing.assert_allclose(werner(1.0).mat, np.outer(phi_plus(), phi_plus()))
    rho = ghz(3).projector()
    np.testing.assert_allclose(isotropic_mix(rho, 0.0).mat, rho.mat)
    np.testing.assert_allclose(isotropic_mix(rho, 1.0).mat, np.eye(8) / 8)
    with pytest.raises(InvalidWeights):
        werner(-0.5)
    with pytest.raises(InvalidWeights):
        isotropic_mix(rho, 1.5)


def test_noise_family_corners():
    np.testing.assert_allclose(bbo_state(BBOParams(0, 0)).mat, np.eye(16) / 16)
    assert purity(bbo_state(BBOParams(1, 0))) == pytest.approx(1.0)
    np.testing.assert_allclose(bbo_state(BBOParams(0, 1)).mat, ghz(4).projector().mat, atol=1e-15)
    with pytest.raises(InvalidWeights):
        BBOParams(0.7, 0.7)
    with pytest.raises(InvalidWeights):
        BBOParams(-0.1, 0.5)


def test_noise_family_trace_stays_one_inside_weight_slack():
    rho = bbo_state(BBOParams(0.6, 0.4 + 5e-13))
    assert np.trace(rho.mat).real == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(np.diag(rho.mat).real[[0, 15]], [0.25 * 0.6 + 0.2, 0.25 * 0.6 + 0.2], atol=1e-12)


def test_noise_family_is_valid_and_vierergruppe_invariant():
    for p1 in np.linspace(0, 1, 5):
        for p2 in np.linspace(0, 1 - p1, 5):
            rho = bbo_state(BBOParams(p1, p2))
            validate_density(rho.mat, rho.shape)
            check_symmetry(rho, vierergruppe())


def test_noise_coordinates():
    c = coords(BBOParams(0.25, 0.25))
    assert c.q == pytest.approx(0.5)
    assert c.r == pytest.approx(1.0)
    assert coords(BBOParams(0.5, 0.0)).r == 0.0

    edge = coords(BBOParams(0.0, 0.4))
    assert edge.r == RATIO_INF
    assert edge.r_text == "inf"
    back = params_from_coords(edge)
    assert back.p1 == 0.0
    assert back.p2 == pytest.approx(0.4)

    p = params_from_coords(NoiseCoords(0.0, 1.0))
    assert (p.p1, p.p2) == pytest.approx((0.5, 0.5))


def test_random_states_are_valid(rng):
    for rho in (random_density(SystemShape(3), rng), random_product_mixture(SystemShape(3), [1, 3], rng)):
        validate_density(rho.mat, rho.shape)
    assert np.linalg.matrix_rank(random_density(SystemShape(2), rng, rank=1).mat, tol=1e-10) == 1


@pytest.mark.parametrize(
    "spec, kind, n",
    [
        ("ghz:4", PureState, 4),
        ("w:3", PureState, 3),
        ("product:0101", PureState, 4),
        ("werner:0.5", DensityMatrix, 2),
        ("bbo:0.2,0.3", DensityMatrix, 4),
        ("mix:ghz:4:0.1", DensityMatrix, 4),
        ("mix:mix:w:3:0.1:0.2", DensityMatrix, 3),
    ],
)
def test_parse_state(spec, kind, n):
    state = parse_state(spec)
    assert isinstance(state, kind)
    assert state.shape.n == n


def test_parse_product_infers_local_dimension():
    assert parse_state("product:012").shape == SystemShape(3, 3)


@pytest.mark.parametrize(
    "spec", ["ghz", "ghz:x", "bbo:0.5", "bbo:0.8,0.8", "werner:2", "mix:ghz:4", "cat:3", "product:ab", "bbo:nan,0"]
)
def test_parse_errors(spec):
    with pytest.raises(ParseError):
        parse_state(spec)


def test_as_pure_rejects_mixed_states():
    with pytest.raises(MixedStateError):
        as_pure(parse_state("werner:0.5"), "werner:0.5")
