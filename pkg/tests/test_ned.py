import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nedkit.ned import baseline1, baseline2, encode, ned, ned_from_embeddings, pca_fit


def test_encode_shape_and_determinism(small_checkpoint):
    x = np.random.default_rng(0).standard_normal(228)
    z = encode(small_checkpoint, x)
    assert z.shape == (30,)
    assert np.array_equal(z, encode(small_checkpoint, x))
    assert np.all(np.isfinite(encode(small_checkpoint, np.zeros(228))))
    with pytest.raises(ValueError):
        encode(small_checkpoint, np.zeros(100))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_ned_properties(small_checkpoint, seed):
    rng = np.random.default_rng(seed)
    xi, xj = rng.standard_normal(228), rng.standard_normal(228)
    v = ned(small_checkpoint, xi, xj, "A", "B")
    assert v.value >= 0 and np.isfinite(v.value)
    assert v.direction == "A->B"
    assert v.value == ned(small_checkpoint, xj, xi).value
    assert ned(small_checkpoint, xi, xi).value == 0.0


def test_ned_linear_branch():
    assert ned_from_embeddings(np.full(30, 2.0), np.zeros(30)) == 45.0


def test_baseline1_examples():
    x = np.random.default_rng(0).standard_normal(228)
    assert baseline1(x, x) == 0.0
    assert baseline1(x, x + 1.0) == pytest.approx(114.0)
    y = x + np.random.default_rng(1).uniform(-1, 1, 228)
    assert baseline1(x, y) == baseline1(y, x)
    assert baseline1(x, y) == pytest.approx(0.5 * np.sum((x - y) ** 2))


def test_pca_axis_recovery():
    rng = np.random.default_rng(0)
    axis = rng.standard_normal(20)
    axis /= np.linalg.norm(axis)
    X = rng.standard_normal((500, 1)) * 5.0 * axis + 0.01 * rng.standard_normal((500, 20))
    model = pca_fit(X, k=3)
    cosang = abs(model.axes[0] @ axis)
    assert np.degrees(np.arccos(min(1.0, cosang))) < 1.0
    np.testing.assert_allclose(model.axes @ model.axes.T, np.eye(3), atol=1e-8)


def _faddeev_leverrier(A):
    # characteristic polynomial coefficients, highest degree first
    n = A.shape[0]
    M = np.zeros_like(A)
    coeffs = [1.0]
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def test_pca_eigenvalues_match_characteristic_polynomial():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((40, 4)) @ rng.standard_normal((4, 4))
    C = np.cov(X, rowvar=False)
    oracle = np.sort(np.roots(_faddeev_leverrier(C)).real)[::-1]
    model = pca_fit(X, k=4)
    total = np.sum(oracle)
    np.testing.assert_allclose(model.explained * total, oracle, atol=1e-8)
    # each axis is an eigenvector of C
    for lam, v in zip(oracle, model.axes):
        np.testing.assert_allclose(C @ v, lam * v, atol=1e-8)


def test_pca_degenerate_warns():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 2)) @ rng.standard_normal((2, 12))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        model = pca_fit(X, k=10)
    assert model.k == 2
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
    with pytest.raises(ValueError):
        pca_fit(X[:5], k=10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_projection_energy_and_cosine(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((50, 15))
    model = pca_fit(X, k=10)
    x = rng.standard_normal(15)
    proj = model.project(x)
    assert np.sum(proj**2) <= np.sum((x - model.mean) ** 2) + 1e-9
    assert baseline2(model, x, x) == pytest.approx(1.0)
    y = rng.standard_normal(15)
    assert baseline2(model, x, y) == pytest.approx(baseline2(model, y, x))
    assert -1 - 1e-12 <= baseline2(model, x, y) <= 1 + 1e-12
