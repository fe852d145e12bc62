import math

import numpy as np
import pytest

from evframes import (CubeConfig, EventStream, LambdaConfig, LambdaField,
                      SensorGeometry, build_cube, compute_lambda, lambda_scalar)
from evframes.cube import DataCube
from evframes.regularize import MODES


def test_sigmoid_values():
    cfg = LambdaConfig(mode="sigmoid")
    assert lambda_scalar(0, cfg) == 0.5
    assert abs(lambda_scalar(2, cfg) - 1.0 / (1.0 + math.exp(-2))) < 1e-15
    assert abs(lambda_scalar(2, cfg) - 0.8807970779778823) < 1e-12


def test_max_abs_values():
    cfg = LambdaConfig(mode="max_abs", epsilon=0.1)
    assert lambda_scalar(0, cfg) == 0.1
    assert lambda_scalar(-3, cfg) == 3.0


def test_exponential_values():
    cfg = LambdaConfig(mode="exponential")
    assert abs(lambda_scalar(2, cfg) - 7.38905609893065) < 1e-12
    assert lambda_scalar(-1, cfg) == lambda_scalar(1, cfg)


def test_exponential_saturates():
    cfg = LambdaConfig(mode="exponential")
    v = lambda_scalar(10_000, cfg)
    assert math.isfinite(v)
    assert v == np.finfo(np.float64).max


def test_config_validation():
    with pytest.raises(ValueError):
        LambdaConfig(mode="linear")
    with pytest.raises(ValueError):
        LambdaConfig(epsilon=0.0)


def _cube(slices, k=3):
    r, h, w = slices.shape
    return DataCube(SensorGeometry(w, h), k=k, slices=slices.astype(np.int16),
                    boundary_times=np.linspace(0, 1, r + 1))


def test_zero_cube_sigmoid():
    cube = _cube(np.zeros((4, 2, 2), dtype=np.int16))
    field = compute_lambda(cube, LambdaConfig(mode="sigmoid"))
    assert field.n_frames == 5
    assert np.all(field.dense() == 0.5)


def test_boundary_replication_max_abs():
    geom = SensorGeometry(2, 1)
    stream = EventStream.from_events(
        geom, [(0.1, 0, 0, 1), (0.2, 1, 0, 1), (0.3, 0, 0, -1), (0.4, 0, 0, 1)])
    cube = build_cube(stream, CubeConfig(k=2, nu=4))
    field = compute_lambda(cube, LambdaConfig(mode="max_abs", epsilon=0.25))
    np.testing.assert_allclose(field.pixel(0, 0), [1.0, 0.25, 0.25])


def test_monotone_in_magnitude():
    for mode in MODES:
        cfg = LambdaConfig(mode=mode, epsilon=0.5)
        values = [lambda_scalar(d, cfg) for d in range(0, 20)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        # sign does not matter
        assert lambda_scalar(-7, cfg) == lambda_scalar(7, cfg)


def test_positivity_random_cubes():
    rng = np.random.default_rng(19)
    for mode in MODES:
        for _ in range(10):
            k = int(rng.integers(1, 12))
            slices = rng.integers(-k, k + 1, (5, 3, 4)).astype(np.int16)
            field = compute_lambda(_cube(slices, k=k), LambdaConfig(mode=mode))
            dense = field.dense()
            assert np.all(dense > 0)
            assert np.all(np.isfinite(dense))


def test_value_ranges():
    k = 6
    rng = np.random.default_rng(29)
    slices = rng.integers(-k, k + 1, (4, 3, 3)).astype(np.int16)
    cube = _cube(slices, k=k)
    eps = 0.3
    sig = compute_lambda(cube, LambdaConfig(mode="sigmoid")).dense()
    assert np.all((sig >= 0.5) & (sig < 1.0))
    mx = compute_lambda(cube, LambdaConfig(mode="max_abs", epsilon=eps)).dense()
    assert np.all((mx >= eps) & (mx <= k))
    ex = compute_lambda(cube, LambdaConfig(mode="exponential")).dense()
    assert np.all((ex >= 1.0) & (ex <= math.exp(k)))


def test_uniform_field():
    geom = SensorGeometry(3, 2)
    field = LambdaField.uniform(1e-3, geom, 7)
    assert field.n_frames == 7
    assert np.all(field.dense() == 1e-3)
    assert field.pixel(2, 1).shape == (7,)


def test_field_rejects_nonpositive_values():
    geom = SensorGeometry(1, 1)
    with pytest.raises(ValueError):
        LambdaField(geometry=geom, n_frames=2, table=np.array([0.0]),
                    magnitudes=np.zeros((1, 1, 2), dtype=np.uint8))
