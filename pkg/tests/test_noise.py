import math

import numpy as np
import pytest

from gflattice.errors import ValidationError
from gflattice.master import CorrelationMode
from gflattice.noise import (NoiseKind, NoiseModel, NoiseStream, ou_coefficients, sample_ou_initial, sample_ou_step,
                             sample_white_step)


def ou_path(model, dt, steps, seed=1):
    stream = NoiseStream(seed, 0, 1, CorrelationMode.UNCORRELATED)
    decay, kick = ou_coefficients(model, dt)
    xi = stream.normals(steps)[:, 0]
    w = np.empty(steps)
    w[0] = math.sqrt(model.stationary_variance) * xi[0]
    for i in range(1, steps):
        w[i] = decay * w[i - 1] + kick * xi[i]
    return w


def test_ou_stationary_moments():
    model = NoiseModel(NoiseKind.OU, gamma=2.0, lam=4.0)
    w = ou_path(model, 0.125, 200_000)
    assert np.var(w) == pytest.approx(model.stationary_variance, rel=0.03)
    lag = 2  # tau = 0.25, lam tau = 1
    cov = np.mean(w[:-lag] * w[lag:])
    assert cov == pytest.approx(model.stationary_variance * math.exp(-1.0), rel=0.06)


def test_helpers_match_loop():
    model = NoiseModel(NoiseKind.OU, gamma=1.0, lam=2.0)
    s1 = NoiseStream(5, 3, 4, CorrelationMode.UNCORRELATED)
    w = sample_ou_initial(model, s1)
    w = sample_ou_step(w, 0.1, model, s1)
    s2 = NoiseStream(5, 3, 4, CorrelationMode.UNCORRELATED)
    xi = s2.normals(2)
    decay, kick = ou_coefficients(model, 0.1)
    assert np.allclose(w, decay * math.sqrt(1.0) * xi[0] + kick * xi[1])


def test_white_step_variance():
    model = NoiseModel(NoiseKind.WHITE, gamma=0.3)
    stream = NoiseStream(0, 0, 50_000, CorrelationMode.UNCORRELATED)
    x = sample_white_step(0.01, model, stream)
    assert np.var(x) == pytest.approx(0.3 / 0.01, rel=0.03)


def test_streams_are_reproducible_and_independent():
    a = NoiseStream(42, 7, 3, CorrelationMode.UNCORRELATED).normals(5)
    b = NoiseStream(42, 7, 3, CorrelationMode.UNCORRELATED).normals(5)
    c = NoiseStream(42, 8, 3, CorrelationMode.UNCORRELATED).normals(5)
    assert np.array_equal(a, b) and not np.allclose(a, c)
    assert not np.allclose(a[:, 0], a[:, 1])


def test_block_draws_equal_single_draw():
    s1 = NoiseStream(1, 0, 2, CorrelationMode.UNCORRELATED)
    s2 = NoiseStream(1, 0, 2, CorrelationMode.UNCORRELATED)
    assert np.array_equal(np.vstack([s1.normals(3), s1.normals(4)]), s2.normals(7))


def test_correlated_rows_are_identical():
    x = NoiseStream(1, 0, 6, CorrelationMode.CORRELATED).normals(4)
    assert np.all(x == x[:, :1])


def test_validation():
    with pytest.raises(ValidationError):
        NoiseModel(NoiseKind.OU, 1.0, 0.0)
    with pytest.raises(ValidationError):
        NoiseModel(NoiseKind.WHITE, -1.0)
    with pytest.raises(ValidationError):
        NoiseModel(NoiseKind.WHITE, 1.0).stationary_variance
    with pytest.raises(ValidationError):
        NoiseStream(-1, 0, 2, CorrelationMode.CORRELATED)
