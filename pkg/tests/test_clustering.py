import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquacast import clustering
from aquacast.errors import DataError


def blobs(seed, centers=(0.0, 50.0, 100.0, 150.0), n=250, sigma=1.0):
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.normal(c, sigma, n) for c in centers])


def exhaustive_sse(x, m):
    """Optimal SSE over every labelling of the points into at most m groups."""
    labels = np.array(list(itertools.product(range(m), repeat=x.size)), dtype=np.int64)
    total = np.zeros(labels.shape[0])
    for j in range(m):
        mask = labels == j
        cnt = mask.sum(axis=1)
        s1 = (mask * x).sum(axis=1)
        s2 = (mask * x**2).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            total += np.where(cnt > 0, s2 - s1**2 / np.maximum(cnt, 1), 0.0)
    return float(total.min())


def test_init_centers_formula_and_determinism():
    a = clustering.init_centers(50.0, 1e-4, 3, seed=1)
    assert np.all(np.abs(a - 50.0) < 1e-3)
    assert np.array_equal(clustering.init_centers(81.4, 24.4, 4, 9), clustering.init_centers(81.4, 24.4, 4, 9))
    draws = np.concatenate([clustering.init_centers(81.4, 24.4, 4, s) for s in range(1000)])
    assert abs(draws.mean() - 81.4) < 3.0
    expected = np.random.default_rng(7).standard_normal(4) * 2.0 + 3.0
    assert np.array_equal(clustering.init_centers(3.0, 2.0, 4, 7), expected)


@pytest.mark.parametrize("value,centers,idx", [
    (86.0, [40, 70, 100, 130], 2),
    (85.0, [70, 100], 0),
    (500.0, [40, 130], 1),
])
def test_assign_examples(value, centers, idx):
    a = clustering.assign(value, centers)
    assert a.class_index == idx
    assert sum(a.indicator) == 1 and a.indicator[idx] == 1


@given(st.floats(-1e3, 1e3), st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=6),
       st.floats(0.1, 100))
def test_assign_scale_consistent(value, centers, c):
    base = clustering.assign(value, centers).class_index
    dists = np.abs(value - np.asarray(centers))
    # skip near-ties where rescaling can flip the rounding
    close = np.sort(dists)
    if close.size > 1 and close[1] - close[0] < 1e-6 * (1 + close[1]):
        return
    assert clustering.assign(value * c, [x * c for x in centers]).class_index == base


def test_lloyd_examples():
    km = clustering.lloyd([0, 0, 0, 10, 10, 10], 2, seed=0)
    assert km.centers == (0.0, 10.0) and km.sse == 0.0
    flat = clustering.lloyd([7.0] * 5, 2, seed=0)
    assert flat.sse == 0.0 and flat.centers == (7.0, 7.0)
    with pytest.raises(DataError):
        clustering.lloyd([1.0], 2)


def test_lloyd_recovers_blob_centers():
    km = clustering.lloyd(blobs(0), 4, seed=0)
    assert np.all(np.diff(km.centers) > 0)
    assert np.all(np.abs(np.array(km.centers) - [0, 50, 100, 150]) < 1.5)
    assert km.sse == pytest.approx(clustering.sse(blobs(0), km), rel=1e-12)


def test_sse_examples(rng):
    assert clustering.sse([1.0], clustering.KMeansModel((1.0,), 0.0)) == 0.0
    assert clustering.sse([0.0, 2.0], [1.0]) == 2.0
    x = rng.normal(size=100)
    c = np.array([-1.0, 0.2, 1.5])
    oracle = sum(min((xi - cj) ** 2 for cj in c) for xi in x)
    assert clustering.sse(x, c) == pytest.approx(oracle, abs=1e-9)


def test_lloyd_matches_exhaustive_optimum_small(rng):
    for _ in range(15):
        n = int(rng.integers(3, 9))
        m = int(rng.integers(2, 4))
        x = np.round(rng.normal(0, 5, n), 3)
        trace = []
        km = clustering.lloyd(x, m, seed=int(rng.integers(1000)), restarts=20, trace=trace)
        assert km.sse == pytest.approx(exhaustive_sse(x, m), abs=1e-9)
        for hist in trace:
            assert np.all(np.diff(hist) <= 1e-9)


def test_one_hot_rows():
    km = clustering.KMeansModel((40.0, 70.0, 100.0, 130.0), 0.0)
    oh = km.one_hot([86.0, 10.0])
    assert oh.tolist() == [[0, 0, 1, 0], [1, 0, 0, 0]]


def test_elbow_blob_counts():
    assert clustering.elbow(blobs(1), 2, 10, seed=0).chosen_m == 4
    two = blobs(2, centers=(0.0, 100.0))
    assert clustering.elbow(two, 2, 8, seed=0).chosen_m == 2


def test_elbow_curve_non_increasing_and_csv(tmp_path):
    curve = clustering.elbow(blobs(3), 2, 8, seed=0)
    assert len(curve.m_values) == len(curve.distortions) == 7
    assert np.all(np.diff(curve.distortions) <= 1e-9)
    curve.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "m,distortion" and len(lines) == 8


def test_elbow_on_structureless_data_decreases_smoothly():
    curve = clustering.elbow(np.linspace(0, 1, 200), 2, 8, seed=0)
    d = np.asarray(curve.distortions)
    assert np.all(np.diff(d) < 0)
    assert 2 <= curve.chosen_m <= 8


def test_knee_flags_curve_without_bend():
    ms = list(range(2, 9))
    m, dist, length = clustering.knee(ms, [10.0 - m for m in ms], log_scale=False)
    assert dist < clustering.LOW_CONFIDENCE_FRACTION * length
    # geometric decay is a straight line on the log scale
    m, dist, length = clustering.knee(ms, [2.0 ** -m for m in ms])
    assert dist < 1e-12


def test_elbow_preconditions():
    with pytest.raises(ValueError):
        clustering.elbow(blobs(0), 5, 5)
    with pytest.raises(DataError):
        clustering.elbow([1.0, 2.0, 3.0], 2, 8)


def test_knee_oracle_on_hand_curve():
    # points (1,10) (2,4) (3,3) (4,2.5): normalized, (2,4) is farthest from the chord
    m, dist, length = clustering.knee([2, 3, 4], [4.0, 3.0, 2.5], anchor=(1, 10.0), log_scale=False)
    assert m == 2
    x = np.array([0, 1 / 3, 2 / 3, 1.0])
    y = (np.array([10, 4, 3, 2.5]) - 2.5) / 7.5
    d = np.abs(-1 * x + -1 * (y - 1)) / np.sqrt(2)
    assert dist == pytest.approx(d[1])


def test_transfer_refinement_escapes_lloyd_fixed_point():
    x = np.array([-14.6, -5.96, -3.21, 2.25, 5.75, 13.7])
    stuck = np.array([-14.6, -4.585, 7.233333333333333])
    plain, hist_plain = clustering.lloyd_run(x, stuck, refine=False)
    refined, hist = clustering.lloyd_run(x, stuck)
    assert hist_plain[-1] == pytest.approx(72.63291666666666)
    assert hist[-1] == pytest.approx(exhaustive_sse(x, 3), abs=1e-9)
    assert np.all(np.diff(hist) <= 0)
