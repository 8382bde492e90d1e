import numpy as np
import pytest

from shapaudit.exceptions import ConfigError, UsageError
from shapaudit.explain import explain_model
from shapaudit.models.linear import LinearRegression
from shapaudit.reliability import rank_features
from shapaudit.synth import SynthSpec, ground_truth_ranking, make_synthetic


def test_copy_construction():
    ds = make_synthetic(SynthSpec(n=20, weights=(1.0, 0.0)))
    assert np.array_equal(ds.y, ds.X[:, 0])
    assert ds.feature_names == ("x0", "x1")


def test_features_are_uniform_on_unit_box():
    ds = make_synthetic(SynthSpec(n=5000, weights=(1.0, 1.0, 1.0), seed=2))
    assert ds.X.min() >= -1.0 and ds.X.max() <= 1.0
    np.testing.assert_allclose(ds.X.mean(0), 0.0, atol=0.05)


def test_interaction_term():
    ds = make_synthetic(SynthSpec(n=30, weights=(0.0, 0.0), interactions=((0, 1, 2.0),)))
    np.testing.assert_allclose(ds.y, 2.0 * ds.X[:, 0] * ds.X[:, 1])


def test_determinism():
    spec = SynthSpec(n=96, weights=(5, 0.5, 0, 0), noise_std=0.1, seed=3)
    a, b = make_synthetic(spec), make_synthetic(spec)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SynthSpec(n=1, weights=(1.0,))
    with pytest.raises(ConfigError):
        SynthSpec(n=10, weights=(1.0,), noise_std=-1.0)
    with pytest.raises(ConfigError):
        SynthSpec(n=10, weights=(1.0,), interactions=((0, 3, 1.0),))


def test_ground_truth_examples():
    assert list(ground_truth_ranking(SynthSpec(10, (5, 0.5)))) == [1, 2]
    assert list(ground_truth_ranking(SynthSpec(10, (1, 1)))) == [1.5, 1.5]
    assert list(ground_truth_ranking(SynthSpec(10, (0, 2, 1)))) == [3, 1, 2]
    assert list(ground_truth_ranking(SynthSpec(10, (0, -2, 1)))) == [3, 1, 2]
    with pytest.raises(UsageError):
        ground_truth_ranking(SynthSpec(10, (1, 1), interactions=((0, 1, 1.0),)))


def test_noise_does_not_change_ground_truth():
    a = ground_truth_ranking(SynthSpec(10, (3, 1, 2), noise_std=0.0))
    b = ground_truth_ranking(SynthSpec(10, (3, 1, 2), noise_std=5.0))
    assert np.array_equal(a, b)


def test_ols_recovers_weights_and_ranking():
    spec = SynthSpec(n=96, weights=(0.3, -2.0, 1.1, 0.05), seed=11)
    ds = make_synthetic(spec)
    model = LinearRegression().fit(ds.X, ds.y)
    np.testing.assert_allclose(model.coef_, spec.weights, atol=1e-8)
    _, gi = explain_model(model, ds, engine="exact")
    assert np.array_equal(rank_features(gi), ground_truth_ranking(spec))
