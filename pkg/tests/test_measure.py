import math

import numpy as np
import pytest
from hypothesis import given, settings

from seqnonlocal.measure import (
    BlochDirection,
    Sharpness,
    effect,
    luders_update,
    observable,
    projector,
    sqrt_effect,
)
from seqnonlocal.qcore import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, check_density_matrix, embed, pure_state

from .conftest import directions, outcomes, sharpnesses

Z = BlochDirection(0.0, 0.0)
X = BlochDirection(math.pi / 2, 0.0)
Y = BlochDirection(math.pi / 2, math.pi / 2)


@pytest.mark.parametrize("d, expected", [(Z, SIGMA_Z), (X, SIGMA_X), (Y, SIGMA_Y)])
def test_observable_axes(d, expected):
    np.testing.assert_allclose(observable(d), expected, atol=1e-15)


@given(directions)
def test_direction_unit_norm(d):
    assert abs(np.linalg.norm(d.vector) - 1) < 1e-12


def test_projector_examples():
    np.testing.assert_allclose(projector(Z, 1), np.diag([1, 0]), atol=1e-15)
    np.testing.assert_allclose(projector(X, 1), np.full((2, 2), 0.5), atol=1e-15)


@given(directions)
def test_projectors_complete_and_idempotent(d):
    p = projector(d, 1)
    np.testing.assert_allclose(p + projector(d, -1), I2, atol=1e-15)
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.linalg.matrix_rank(p, tol=1e-9) == 1


def test_effect_examples():
    np.testing.assert_allclose(effect(Z, 1, 1.0).matrix, np.diag([1, 0]), atol=1e-15)
    np.testing.assert_allclose(effect(Z, 1, 0.5).matrix, np.diag([0.75, 0.25]), atol=1e-15)


@settings(max_examples=100)
@given(directions, sharpnesses)
def test_effects_complete(d, s):
    np.testing.assert_allclose(effect(d, 1, s).matrix + effect(d, -1, s).matrix, I2, atol=1e-12)


@settings(max_examples=100)
@given(directions, sharpnesses, outcomes)
def test_effect_spectrum(d, s, c):
    eig = np.linalg.eigvalsh(effect(d, c, s).matrix)
    lam = s.value
    np.testing.assert_allclose(eig, [(1 - lam) / 2, (1 + lam) / 2], atol=1e-12)


def test_sqrt_effect_examples():
    np.testing.assert_allclose(sqrt_effect(Z, 1, 1.0), np.diag([1, 0]), atol=1e-15)
    k = sqrt_effect(Z, 1, 0.5)
    np.testing.assert_allclose(k @ k, np.diag([0.75, 0.25]), atol=1e-15)


@settings(max_examples=100)
@given(directions, sharpnesses, outcomes)
def test_sqrt_effect_squares_to_effect(d, s, c):
    k = sqrt_effect(d, c, s)
    np.testing.assert_allclose(k @ k, effect(d, c, s).matrix, atol=1e-12)
    np.testing.assert_allclose(k, k.conj().T, atol=1e-15)


@given(sharpnesses)
def test_quality_precision_tradeoff(s):
    assert abs(s.quality_factor() ** 2 + s.precision() ** 2 - 1) < 1e-15


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.0000001, float("nan")])
def test_sharpness_bounds(bad):
    with pytest.raises(ValueError, match="sharpness"):
        Sharpness(bad)


def test_luders_sharp_z_collapses_ghz(ghz):
    post, p = luders_update(ghz.matrix, "C", Z, 1, 1.0)
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    np.testing.assert_allclose(post, expected, atol=1e-15)
    assert p == pytest.approx(0.5, abs=1e-15)


def test_luders_maximally_mixed_qubit():
    for d in (Z, X, Y, BlochDirection(1.0, 2.0)):
        _, p = luders_update(I2 / 2, "C", d, 1, 0.3)
        assert p == pytest.approx(0.5, abs=1e-15)


def test_luders_zero_probability():
    with pytest.raises(ValueError, match="zero probability"):
        luders_update(np.diag([1.0, 0.0]), "C", Z, -1, 1.0)


def _random_state(seed):
    rng = np.random.default_rng(seed)
    return pure_state(rng.normal(size=8) + 1j * rng.normal(size=8))


@settings(max_examples=50)
@given(directions, sharpnesses, outcomes)
def test_luders_outputs_are_states(d, s, c):
    rho = _random_state(7)
    for party in "ABC":
        total = 0.0
        for cc in (1, -1):
            post, p = luders_update(rho, party, d, cc, s)
            check_density_matrix(post)
            total += p
        assert total == pytest.approx(1, abs=1e-12)
    assert 0 <= luders_update(rho, "B", d, c, s)[1] <= 1


@settings(max_examples=30)
@given(directions, outcomes)
def test_sharp_luders_is_projective_update(d, c):
    rho = _random_state(11)
    post, p = luders_update(rho, "A", d, c, 1.0)
    proj = embed(projector(d, c), "A")
    ref = proj @ rho @ proj
    np.testing.assert_allclose(post, ref / np.trace(ref).real, atol=1e-12)
    assert p == pytest.approx(np.trace(ref).real, abs=1e-12)
