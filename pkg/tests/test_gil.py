import warnings

import numpy as np
import pytest
from scipy import ndimage
from scipy.sparse.linalg import LinearOperator, cg

from nestgil.gil import (ContractionError, ContractionWarning, GilConfig, gil_restore, half_operator_chain,
                         m_apply, psi, spectral_series)
from nestgil.operators import gradient_extractor, laplacian_extractor
from nestgil.prox import theta

RIDGE = (0.0, 0.0, 0.0, 1.0)


def cg_solve(m, tau, k):
    shape = m.shape
    op = LinearOperator((m.size, m.size), matvec=lambda v: (v.reshape(shape) + tau * k.normal(v.reshape(shape))).ravel())
    x, info = cg(op, m.ravel(), rtol=1e-14, atol=0.0, maxiter=5000)
    assert info == 0
    return x.reshape(shape)


def cartoon(side=24):
    img = np.zeros((side, side))
    img[6:14, 5:17] = 1.0
    img[16:21, 3:9] = 0.4
    return img


@pytest.mark.parametrize("variant", ["identity", "normalized"])
def test_m_apply_kills_constants(variant):
    cfg = GilConfig(psi=variant, tau=0.05)
    assert not m_apply(np.full((9, 9), 0.8), cfg).any()


def test_m_apply_zero_tau():
    assert not m_apply(np.arange(16.0).reshape(4, 4), GilConfig(tau=0.0)).any()


def test_m_apply_matches_dense_laplacian(rng):
    k = laplacian_extractor()
    basis = np.eye(64).reshape(64, 8, 8)
    kmat = np.stack([k.apply(e).ravel() for e in basis], axis=1)
    v = rng.normal(size=(8, 8))
    tau = 0.01
    expected = -tau * kmat.T @ kmat @ v.ravel()
    got = m_apply(v, GilConfig(tau=tau, extractor=k))
    assert np.max(np.abs(got.ravel() - expected)) <= 1e-12


def test_psi_normalized_unit_vectors(rng):
    f = rng.normal(size=(2, 5, 5))
    f[:, 0, 0] = 0.0
    out = psi(f, "normalized", 1e-8)
    norms = np.sqrt((out ** 2).sum(axis=0))
    assert norms[0, 0] == 0.0
    np.testing.assert_allclose(norms.ravel()[1:], 1.0, atol=1e-12)


def test_zero_tau_returns_input(rng):
    m = rng.normal(size=(10, 10))
    cfg = GilConfig(tau=0.0)
    h, terms = spectral_series(m, cfg)
    np.testing.assert_array_equal(h, m)
    assert all(not t.any() for t in terms)
    np.testing.assert_array_equal(gil_restore(m, cfg), m)


def test_single_domain_hand_composition(rng):
    k = gradient_extractor()
    tau = 0.05
    cfg = GilConfig(n_domains=1, tau=tau, extractor=k)
    m = rng.normal(size=(12, 12))
    expected = m - tau * k.adjoint(theta(k.apply(m), tau, cfg.weights))
    h, terms = spectral_series(m, cfg)
    assert len(terms) == 1
    np.testing.assert_allclose(h, expected, atol=1e-14)


def test_two_domain_hand_composition(rng):
    """n = 1: one full term, then shrinkage on the image-shaped chain element."""
    k = gradient_extractor()
    tau = 0.04
    cfg = GilConfig(n_domains=2, tau=tau, extractor=k)
    m = rng.normal(size=(10, 10))
    w1 = -tau * k.adjoint(k.apply(m))
    rem = -tau * k.adjoint(k.apply(theta(w1, tau, cfg.weights)))
    h, terms = spectral_series(m, cfg)
    np.testing.assert_allclose(terms[0], w1, atol=1e-14)
    np.testing.assert_allclose(terms[1], rem, atol=1e-14)
    np.testing.assert_allclose(h, m + w1 + rem, atol=1e-14)


@pytest.mark.parametrize("n_domains", range(1, 8))
def test_chain_parity_shapes(n_domains, rng):
    k = gradient_extractor()
    cfg = GilConfig(n_domains=n_domains, tau=0.02, extractor=k)
    m = rng.normal(size=(9, 11))
    chain = half_operator_chain(m, cfg, 2 * n_domains)
    for j, item in enumerate(chain):
        assert item.shape == ((2, 9, 11) if j % 2 else (9, 11))
    h, terms = spectral_series(m, cfg)
    assert h.shape == m.shape and len(terms) == n_domains
    assert all(t.shape == m.shape for t in terms)


def test_neumann_against_cg(rng):
    k = laplacian_extractor()
    tau = 1 / 128
    q = tau * k.spectral_bound
    for _ in range(3):
        m = rng.normal(size=(16, 16))
        exact = cg_solve(m, tau, k)
        errors = []
        for n in range(7):
            h, _ = spectral_series(m, GilConfig(n_domains=n + 1, tau=tau, extractor=k, weights=RIDGE))
            errors.append(np.linalg.norm(h - exact) / np.linalg.norm(m))
        ratios = np.array(errors[1:]) / np.array(errors[:-1])
        assert ratios.max() <= q + 1e-3
        assert errors[5] <= q ** 6 / (1 - q)


def test_term_decay(rng):
    k = laplacian_extractor()
    cfg = GilConfig(n_domains=6, tau=1 / 128, extractor=k, weights=RIDGE)
    for _ in range(5):
        _, terms = spectral_series(rng.normal(size=(16, 16)), cfg)
        norms = [np.linalg.norm(t) for t in terms]
        for a, b in zip(norms, norms[1:]):
            assert b <= cfg.contraction_factor * a + 1e-12


@pytest.mark.parametrize("tau", [0.005, 0.01, 0.02, 0.03])
def test_tau_continuity(tau, rng):
    cfg = GilConfig(tau=tau)
    assert cfg.contraction_factor <= 0.25
    for _ in range(5):
        m = rng.normal(size=(14, 14))
        assert np.linalg.norm(gil_restore(m, cfg) - m) <= 2 * cfg.contraction_factor * np.linalg.norm(m)


@pytest.mark.parametrize("variant", ["identity", "normalized"])
def test_constant_fixed_point(variant):
    m = np.full((13, 13), 0.42)
    out = gil_restore(m, GilConfig(psi=variant, tau=0.05))
    assert np.max(np.abs(out - m)) <= 1e-12


@pytest.mark.parametrize("variant", ["identity", "normalized"])
def test_zero_image(variant):
    assert not gil_restore(np.zeros((8, 8)), GilConfig(psi=variant, tau=0.05)).any()


def test_normalized_changes_only_near_edges():
    m = cartoon()
    cfg = GilConfig(psi="normalized", tau=0.05, n_domains=6)
    h = gil_restore(m, cfg)
    edges = np.abs(cfg.extractor.apply(m)).sum(axis=0) > 0
    # each application of M widens the support by at most one pixel
    near = ndimage.binary_dilation(edges, iterations=cfg.n_domains + 1)
    assert np.max(np.abs(h - m)[~near]) <= 1e-12
    assert np.abs(h - m)[near].max() > 0


def test_contraction_warning_and_error():
    m = np.eye(6)
    cfg = GilConfig(tau=0.2, extractor="laplacian")
    with pytest.warns(ContractionWarning):
        spectral_series(m, cfg)
    with pytest.raises(ContractionError):
        spectral_series(m, GilConfig(tau=0.2, extractor="laplacian", strict_contraction=True))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spectral_series(m, GilConfig(tau=0.2, extractor="laplacian", psi="normalized"))


@pytest.mark.parametrize("kwargs", [dict(n_domains=0), dict(psi="cubic"), dict(tau=-1.0), dict(epsilon=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        GilConfig(**kwargs)
