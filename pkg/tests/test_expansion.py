import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aquacast.errors import DataError
from aquacast.expansion import ExpandedSeries, collapse, expand, expand_rows, local_linearity

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
series = arrays(np.float64, st.integers(2, 60), elements=finite)


def test_expand_examples():
    assert expand([10, 20, 30], 1).values.tolist() == [10, 15, 20, 25, 30]
    assert expand([0, 4], 3).values.tolist() == [0, 1, 2, 3, 4]
    assert expand([3.0, 1.0, 2.0], 0).values.tolist() == [3.0, 1.0, 2.0]
    with pytest.raises(DataError):
        expand([1.0], 1)


def test_collapse_examples():
    assert collapse(expand([10, 20, 30], 1)).tolist() == [10, 20, 30]
    manual = ExpandedSeries(np.array([1.0, 9.0, 2.0]), 1, np.array([True, False, True]))
    assert collapse(manual).tolist() == [1.0, 2.0]


def test_local_linearity_examples():
    assert local_linearity([0, 1, 2, 3]) == 0.0
    assert local_linearity([0, 1, 0]) == 2.0
    with pytest.raises(DataError):
        local_linearity([1, 2])


@given(series, st.integers(0, 4))
def test_expand_shape_mask_and_round_trip(s, rho):
    ex = expand(s, rho)
    n = s.size
    assert ex.values.size == n + (n - 1) * rho
    assert np.array_equal(np.flatnonzero(ex.origin_mask), np.arange(0, ex.values.size, rho + 1))
    assert np.array_equal(collapse(ex), s)


@given(series, st.integers(0, 4))
def test_expand_creates_no_new_extrema(s, rho):
    v = expand(s, rho).values
    assert v.max() == s.max() and v.min() == s.min()


@given(arrays(np.float64, st.integers(3, 60), elements=st.floats(-1e3, 1e3)))
def test_expansion_raises_linearity(s):
    if local_linearity(s) == 0:
        return
    assert local_linearity(expand(s, 1).values) < local_linearity(s)


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(2, 30)), elements=finite),
       st.integers(0, 3))
def test_expand_rows_matches_expand(X, rho):
    out = expand_rows(X, rho)
    for row, got in zip(X, out):
        assert np.array_equal(expand(row, rho).values, got)
