import itertools
import json
import math

import numpy as np
import pytest

from salsa import estimator as es
from salsa import kernels as kn
from salsa.errors import DegenerateColumn, DimensionMismatch, TooFewRows, ValidationError


def make(n=40, D=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (n, D))
    Y = np.sin(2 * X[:, 0]) + X[:, 1] * X[:, 2] + 0.1 * rng.standard_normal(n)
    return X, Y


def test_bandwidths():
    X = np.array([[-1.0, 2.0], [1.0, 0.0]] * 50)  # sd 1 per column, n = 100
    h = es.compute_bandwidths(X)
    assert np.allclose(h, 20 * 100**-0.2, rtol=1e-14)
    assert h[0] == pytest.approx(7.96214, abs=1e-5)
    assert np.array_equal(es.compute_bandwidths(X, c=40), 2 * h)
    with pytest.raises(DegenerateColumn):
        es.compute_bandwidths(np.array([[1.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(TooFewRows):
        es.compute_bandwidths(np.ones((1, 2)))


def test_two_point_residual():
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    m = es.fit(X, np.array([1.0, -1.0]), es.SalsaConfig(1, 1.0))
    K = kn.kernel_matrix(m.X_train, m.spec)
    yn = m.normalization.transform_y(np.array([1.0, -1.0]))
    assert np.linalg.norm((K + 2 * np.eye(2)) @ m.alpha - yn) <= 1e-10
    with pytest.raises(TooFewRows):
        es.fit(X[:1], np.array([1.0]), es.SalsaConfig(1, 1.0))


def test_constant_target():
    X, _ = make()
    m = es.fit(X, np.full(40, 3.5), es.SalsaConfig(2, 1e-3))
    assert not np.any(m.alpha)
    assert np.allclose(m.predict(X), 3.5, atol=1e-6)


def test_large_lambda_shrinks_alpha():
    X, Y = make()
    lam = 1e6
    m = es.fit(X, Y, es.SalsaConfig(2, lam))
    yn = m.normalization.transform_y(Y)
    ratio = np.linalg.norm(m.alpha) / (np.linalg.norm(yn) / (lam * 40))
    assert 0.5 <= ratio <= 2.0


def test_predict_consistency_and_edges():
    X, Y = make()
    m = es.fit(X, Y, es.SalsaConfig(2, 1e-3))
    assert abs(es.mse(m.predict(X), Y) - m.train_mse) <= 1e-10
    assert m.predict(np.zeros((0, 4))).shape == (0,)
    far = np.full((1, 4), 100.0 * m.spec.bandwidths.max() * m.normalization.sds.max())
    assert abs(m.predict(far)[0] - Y.mean()) <= 1e-3
    with pytest.raises(DimensionMismatch):
        m.predict(np.zeros((2, 3)))


def test_component_decomposition():
    X, Y = make(n=30, D=5, seed=1)
    for d in (1, 2, 3):
        m = es.fit(X, Y, es.SalsaConfig(d, 1e-2, variant="exact"))
        Z = np.random.default_rng(2).uniform(-1, 1, (7, 5))
        total = sum(es.evaluate_component(m, S, Z) for S in itertools.combinations(range(5), d))
        full = m.normalization.transform_y(m.predict(Z))
        assert np.allclose(total, full, atol=1e-8)
    m = es.fit(X, Y, es.SalsaConfig(5, 1e-2))
    Z = X[:4]
    assert np.allclose(es.evaluate_component(m, range(5), Z), m.normalization.transform_y(m.predict(Z)), atol=1e-12)


def test_component_zero_alpha():
    X, _ = make()
    m = es.fit(X, np.zeros(40), es.SalsaConfig(2, 1e-2))
    assert not np.any(es.evaluate_component(m, (0, 1), X[:5]))


def test_mse():
    assert es.mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert es.mse([2.0, 3.0], [1.0, 2.0]) == 1.0
    assert es.mse([3.0, 4.0], [0.0, 0.0]) == 12.5


def test_lambda_path_matches_single_fits():
    X, Y = make()
    path = es.fit_lambda_path(X, Y, 2, [1e-4, 1e-2, 1.0])
    for m in path:
        single = es.fit(X, Y, es.SalsaConfig(2, m.lam))
        assert np.allclose(m.alpha, single.alpha, rtol=1e-12, atol=1e-14)


def test_config_validation():
    with pytest.raises(ValidationError):
        es.SalsaConfig(0, 1.0)
    with pytest.raises(ValidationError):
        es.SalsaConfig(2, 0.0)
    X, Y = make(D=3)
    with pytest.raises(ValidationError):
        es.fit(X, Y, es.SalsaConfig(4, 1.0))


def test_model_document(tmp_path):
    X, Y = make()
    m = es.fit(X, Y, es.SalsaConfig(3, 1e-3, variant="upto"))
    doc = json.loads(m.to_document())
    assert doc["format_version"] == es.FORMAT_VERSION
    assert doc["d"] == 3 and doc["variant"] == "upto"
    es.save_model(m, tmp_path / "m.json")
    back = es.load_model(tmp_path / "m.json")
    assert back.alpha.tobytes() == m.alpha.tobytes()
    assert back.spec.bandwidths.tobytes() == m.spec.bandwidths.tobytes()
    Z = np.random.default_rng(9).uniform(-2, 2, (11, 4))
    assert back.predict(Z).tobytes() == m.predict(Z).tobytes()
    assert math.isclose(back.train_mse, m.train_mse)
