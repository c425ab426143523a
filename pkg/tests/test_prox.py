import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import grid_prox
from nestgil.prox import (NormalizationError, P_VALUES, PROX_MAPS, ProxWeights, prox_l0, prox_l1,
                          prox_l2, prox_l32, theta)

finite = st.floats(-50, 50, allow_nan=False)
taus = st.floats(0, 3, allow_nan=False)


@pytest.mark.parametrize("fn, z, tau, expected", [
    (prox_l0, 1.2, 0.5, 1.2),
    (prox_l0, 0.9, 0.5, 0.0),
    (prox_l0, 0.0, 0.7, 0.0),
    (prox_l1, 2.0, 0.5, 1.5),
    (prox_l1, -0.3, 0.5, 0.0),
    (prox_l32, 1.0, 1.0, 0.25),
    (prox_l32, 0.0, 1.0, 0.0),
    (prox_l32, -1.0, 1.0, -0.25),
    (prox_l2, 3.0, 0.5, 1.5),
    (prox_l2, 0.0, 0.5, 0.0),
])
def test_closed_form_examples(fn, z, tau, expected):
    assert fn(z, tau) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("fn", PROX_MAPS)
def test_zero_tau_is_identity(fn, rng):
    z = rng.normal(size=20)
    np.testing.assert_array_equal(fn(z, 0.0), z)


def test_l32_stationarity():
    x = float(prox_l32(1.0, 1.0))
    assert x - 1.0 + 1.5 * math.sqrt(x) == pytest.approx(0.0, abs=1e-12)


def test_l32_matches_literal_formula(rng):
    z = rng.uniform(-5, 5, 200)
    tau = 0.7
    literal = z + 9 / 8 * tau ** 2 * np.sign(z) * (1 - np.sqrt(1 + 16 * np.abs(z) / (9 * tau ** 2)))
    np.testing.assert_allclose(prox_l32(z, tau), literal, atol=1e-12)


def test_l0_keeps_value_at_threshold():
    assert prox_l0(1.0, 0.5) == 1.0
    assert prox_l0(-1.0, 0.5) == -1.0


@pytest.mark.parametrize("p_index", range(4))
def test_grid_oracle_sample(p_index, rng):
    fn, p = PROX_MAPS[p_index], P_VALUES[p_index]
    for z, tau in zip(rng.uniform(-5, 5, 40), rng.uniform(1e-3, 2, 40)):
        assert abs(float(fn(z, tau)) - grid_prox(z, tau, p)) <= 2e-4


def test_non_finite_input_raises():
    with pytest.raises(FloatingPointError):
        prox_l1(np.array([1.0, np.nan]), 0.1)


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        prox_l2(1.0, -0.1)


@given(finite, taus)
def test_odd_symmetry(z, tau):
    for fn in PROX_MAPS:
        assert fn(-z, tau) == -fn(z, tau)


@given(finite, taus)
def test_shrinkage(z, tau):
    for fn in PROX_MAPS:
        assert abs(float(fn(z, tau))) <= abs(z) + 1e-12


@given(finite, finite, taus)
def test_nonexpansive(a, b, tau):
    for fn in (prox_l1, prox_l32, prox_l2):
        assert abs(float(fn(a, tau) - fn(b, tau))) <= abs(a - b) * (1 + 1e-12) + 1e-12


@given(finite, st.floats(1e-6, 3), st.lists(st.floats(0, 10), min_size=4, max_size=4).filter(lambda b: sum(b) > 0))
@settings(max_examples=200)
def test_theta_within_prox_hull(z, tau, beta):
    vals = [float(fn(z, tau)) for fn in PROX_MAPS]
    out = float(theta(z, tau, ProxWeights(tuple(beta))))
    assert min(vals) - 1e-12 <= out <= max(vals) + 1e-12


def test_weights_normalize():
    w = ProxWeights((0.482, 1.3, -0.2, 2.0))
    assert abs(w.eta.sum() - 1.0) <= 1e-15
    np.testing.assert_allclose(ProxWeights().eta, [0.25] * 4)


def test_zero_sum_weights_rejected():
    with pytest.raises(NormalizationError):
        ProxWeights((1.0, -1.0, 0.0, 0.0))


def test_theta_selector_weights(rng):
    z = rng.normal(size=50) * 2
    np.testing.assert_array_equal(theta(z, 0.3, (1, 0, 0, 0)), prox_l0(z, 0.3))


def test_theta_examples():
    assert float(theta(0.0, 0.5)) == 0.0
    expected = 0.25 * (2 + 1.5 + float(prox_l32(2.0, 0.5)) + 1.0)
    assert float(theta(2.0, 0.5)) == pytest.approx(expected, abs=1e-12)
