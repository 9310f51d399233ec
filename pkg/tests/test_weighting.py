import numpy as np
import pytest

from ctrlalloc import (ActuatorLimits, ActuatorState, DegenerateLimitsError, DragModel, WeightingConfig,
                       compute_weights, magnitude_weights, rate_weights)


def test_magnitude_weights_at_rest_are_epsilon():
    W = magnitude_weights(np.zeros(4), np.full(4, 20.0), DragModel(), 1e-3)
    np.testing.assert_allclose(np.diag(W), 1e-3)


def test_magnitude_weights_grow_towards_limit_and_with_drag():
    d = DragModel()
    W = np.diag(magnitude_weights([10.0, 20.0, 10.0, 20.0], np.full(4, 20.0), d, 1e-3))
    assert W[1] > W[0] and W[3] > W[2]
    # Lower flaps carry the larger drag slope, so equal deflection weighs more.
    assert W[2] > W[0]
    assert W.max() == pytest.approx(1.0 + 1e-3)


def test_magnitude_weights_zero_limit_pinned_and_negative_limit_rejected():
    W = np.diag(magnitude_weights([0.0, 5.0], [0.0, 10.0], DragModel([0.001] * 2, [0.004] * 2), 1e-3))
    assert W[0] == pytest.approx(1.0 + 1e-3)
    with pytest.raises(DegenerateLimitsError):
        magnitude_weights([0.0], [-1.0], DragModel([0.001], [0.004]))


def test_rate_weights_direction_dependent():
    lim = ActuatorLimits(np.zeros(2), np.full(2, 20.0), [-30.0, -30.0], [10.0, 10.0])
    st = ActuatorState([0.1, -0.1], [0.0, 0.0], 0.01)
    W = np.diag(rate_weights(st, lim, 1e-3))
    np.testing.assert_allclose(W, [10 / 10 + 1e-3, 10 / 30 + 1e-3])


def test_rate_weights_reject_zero_rate_bound():
    lim = ActuatorLimits(np.zeros(1), [1.0], [0.0], [1.0])
    with pytest.raises(DegenerateLimitsError):
        rate_weights(ActuatorState.at_rest([0.0]), lim)


def test_compute_weights_strictly_positive():
    lim = ActuatorLimits(np.zeros(4), np.full(4, 20.0), np.full(4, -20.0), np.full(4, 20.0))
    w = compute_weights(lim, ActuatorState([5.0, 0, 19, 2], [4.9, 0, 19, 2.1]), WeightingConfig())
    assert np.all(np.diag(w.W_m) > 0) and np.all(np.diag(w.W_r) > 0)
    with pytest.raises(ValueError):
        WeightingConfig(epsilon=0.0)
