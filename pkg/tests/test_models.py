import numpy as np
import pytest

from aquacast import models
from aquacast.errors import ShapeError
from aquacast.nn import param_count


@pytest.mark.parametrize("spec,k", [
    (models.ModelSpec("bgru"), 3366),
    (models.ModelSpec("dcgru", 4), 4187),
    (models.ModelSpec("dcgru", 2), 4087),
    (models.ModelSpec("edcgru", 4, 1), 4187),
    (models.ModelSpec("edcgru", 4, 3), 4187),
    (models.ModelSpec("grun"), 23753),
])
def test_param_counts(spec, k):
    assert param_count(models.build(spec, seed=0)) == k
    assert models.expected_param_count(spec) == k


def test_correction_layer_count_and_identity():
    c = models.build_grun_correction(seed=0)
    assert param_count(c) == 96 * 97
    x = np.linspace(0, 1, 96)[None]
    assert np.array_equal(c.forward(x), x)


def test_edcgru_shares_parameters_with_dcgru():
    a = models.build(models.ModelSpec("dcgru", 4), seed=11)
    b = models.build(models.ModelSpec("edcgru", 4, 2), seed=11)
    assert np.array_equal(a.get_flat(), b.get_flat())
    assert b.input_shape == (288, 5)


def test_zero_parameters_give_zero_output():
    net = models.build(models.ModelSpec("dcgru", 4), seed=0)
    net.set_flat(np.zeros(net.param_count))
    x = np.random.default_rng(0).normal(size=(3, 96, 5))
    assert np.all(net.forward(x) == 0.0)


def test_shapes_rejected():
    net = models.build(models.ModelSpec("dcgru", 4), seed=0)
    assert net.forward(np.zeros((2, 96, 5))).shape == (2, 1)
    with pytest.raises(ShapeError):
        net.forward(np.zeros((2, 96, 4)))
    with pytest.raises(ShapeError):
        models.build(models.ModelSpec("grun"), seed=0).forward(np.zeros((1, 96, 1)))


def test_spec_validation():
    with pytest.raises(ValueError):
        models.ModelSpec("dcgru", 1)
    with pytest.raises(ValueError):
        models.ModelSpec("lstm")
    with pytest.raises(ValueError):
        models.ModelSpec("edcgru", 4, -1)
    assert models.ModelSpec("grun").input_shape == (3, 5)
    assert models.ModelSpec("edcgru", 4, 1).window == 192


def test_build_is_seed_deterministic():
    a = models.build(models.ModelSpec("grun"), seed=3).get_flat()
    b = models.build(models.ModelSpec("grun"), seed=3).get_flat()
    c = models.build(models.ModelSpec("grun"), seed=4).get_flat()
    assert np.array_equal(a, b) and not np.array_equal(a, c)
