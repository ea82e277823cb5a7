from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquacast import data
from aquacast.errors import DataError

T0 = datetime(2016, 1, 1, 0, 15)


def _write(path, rows):
    path.write_text("timestamp,demand\n" + "".join(f"{t},{v}\n" for t, v in rows))
    return path


def test_load_csv_three_rows(tmp_path):
    rows = [(T0, 30), (T0 + timedelta(minutes=15), 86), (T0 + timedelta(minutes=30), 157)]
    s = data.load_csv(_write(tmp_path / "a.csv", rows))
    assert s.values.tolist() == [30.0, 86.0, 157.0]
    assert s.start_time == T0


def test_load_csv_sorts_rows(tmp_path):
    rows = [(T0 + timedelta(minutes=15), 2), (T0, 1)]
    s = data.load_csv(_write(tmp_path / "a.csv", rows))
    assert s.values.tolist() == [1.0, 2.0]


@pytest.mark.parametrize("rows", [
    [(T0, 1), (T0 + timedelta(minutes=30), 2)],
    [(T0, -1), (T0 + timedelta(minutes=15), 2)],
    [(T0, 1), (T0, 2)],
    [(T0, "abc")],
])
def test_load_csv_rejects_bad_files(tmp_path, rows):
    with pytest.raises(DataError):
        data.load_csv(_write(tmp_path / "a.csv", rows))


def test_write_then_load_round_trip(tmp_path, rng):
    s = data.DemandSeries(T0, rng.uniform(30, 150, 50))
    data.write_csv(s, tmp_path / "s.csv")
    back = data.load_csv(tmp_path / "s.csv")
    assert np.array_equal(back.values, s.values)
    assert back.start_time == s.start_time


def test_series_invariants():
    with pytest.raises(DataError):
        data.DemandSeries(T0, [])
    with pytest.raises(DataError):
        data.DemandSeries(T0, [1.0, -2.0])
    s = data.DemandSeries(T0, [1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    assert s.timestamp(4) == T0 + timedelta(hours=1)
    assert s.index_of(T0 + timedelta(hours=1)) == 4


@pytest.mark.parametrize("n,train_n,test_n,frac,sizes", [
    (25000, 22500, 2500, 0.15, (19125, 3375, 2500)),
    (100, 80, 20, 0.5, (40, 40, 20)),
])
def test_split_sizes(n, train_n, test_n, frac, sizes):
    s = data.DemandSeries(T0, np.arange(n, dtype=float))
    sp = data.split(s, train_n, test_n, frac)
    assert (len(sp.train), len(sp.validation), len(sp.test)) == sizes
    assert sp.train.values[-1] + 1 == sp.validation.values[0]
    assert sp.test.values[-1] == n - 1


def test_split_insufficient_data():
    s = data.DemandSeries(T0, np.ones(50))
    with pytest.raises(DataError):
        data.split(s, 60, 0)


@given(st.integers(11, 400), st.data())
def test_split_partitions_are_ordered_and_disjoint(n, draw):
    train_n = draw.draw(st.integers(10, n - 1))
    test_n = draw.draw(st.integers(1, n - train_n))
    frac = draw.draw(st.floats(0.1, 0.9))
    s = data.DemandSeries(T0, np.arange(n, dtype=float))
    sp = data.split(s, train_n, test_n, frac)
    parts = [sp.train.values, sp.validation.values, sp.test.values]
    joined = np.concatenate(parts)
    assert joined.size == train_n + test_n
    assert np.all(np.diff(joined[:train_n]) == 1)
    assert sp.test.values[0] == n - test_n
    assert sp.test.values[0] > sp.validation.values[-1]


def test_stats_small_cases():
    st3 = data.compute_stats(data.DemandSeries(T0, [1.0, 2.0, 3.0]))
    assert (st3.mean, st3.median, st3.std) == (2.0, 2.0, 1.0)
    flat = data.compute_stats(data.DemandSeries(T0, [5.0] * 4))
    assert (flat.std, flat.skewness, flat.excess_kurtosis) == (0.0, 0.0, 0.0)
    with pytest.raises(DataError):
        data.compute_stats(data.DemandSeries(T0, [1.0]))


def test_stats_moments_against_direct_formulas(rng):
    x = rng.gamma(2.0, 3.0, 5000)
    s = data.compute_stats(data.DemandSeries(T0, x))
    d = x - x.mean()
    m2, m3, m4 = (d**2).mean(), (d**3).mean(), (d**4).mean()
    assert s.skewness == pytest.approx(m3 / m2**1.5, rel=1e-10)
    assert s.excess_kurtosis == pytest.approx(m4 / m2**2 - 3.0, rel=1e-10)
    assert s.min <= s.q25 <= s.median <= s.q75 <= s.max


def test_stats_normal_sample_mean_converges():
    x = np.random.default_rng(3).normal(100.0, 10.0, 100000)
    s = data.compute_stats(data.DemandSeries(T0, x))
    assert abs(s.mean - 100.0) < 3 * 10.0 / np.sqrt(x.size)


def test_synthetic_default_matches_reference_stats():
    s = data.generate_synthetic(data.SyntheticConfig(seed=0))
    st_ = data.compute_stats(s)
    assert len(s) == 25000
    assert abs(st_.mean - 81.4) <= 2.0
    assert abs(st_.std - 24.4) <= 2.0
    assert st_.min >= 30.0


def test_synthetic_deterministic_and_periodic():
    cfg = data.SyntheticConfig(seed=5, spike_rate=0.01)
    assert np.array_equal(data.generate_synthetic(cfg).values, data.generate_synthetic(cfg).values)
    flat = data.generate_synthetic(data.SyntheticConfig(n_samples=1000, noise_std=0, weekly_amplitude=0))
    assert np.array_equal(flat.values[96:], flat.values[:-96])


def test_synthetic_weekly_period():
    s = data.generate_synthetic(data.SyntheticConfig(n_samples=3000, noise_std=0))
    assert np.array_equal(s.values[672:], s.values[:-672])
    assert not np.array_equal(s.values[96:], s.values[:-96])


def test_spike_indices_match_injected_spikes():
    base = data.SyntheticConfig(n_samples=5000, seed=2)
    spiky = data.SyntheticConfig(n_samples=5000, seed=2, spike_rate=0.02)
    diff = data.generate_synthetic(spiky).values - data.generate_synthetic(base).values
    idx = data.spike_indices(spiky)
    assert idx.size > 0
    assert np.all(np.abs(diff[idx]) > 0)
    mask = np.ones(diff.size, bool)
    mask[idx] = False
    assert np.all(diff[mask] == 0)


def test_synthetic_config_validation():
    with pytest.raises(DataError):
        data.SyntheticConfig(n_samples=100)
    with pytest.raises(DataError):
        data.SyntheticConfig(spike_rate=0.05)


def test_scaler_examples():
    sc = data.fit_scaler(data.DemandSeries(T0, [30.0, 86.0, 157.0]))
    assert data.transform(sc, 30.0) == 0.0
    assert data.transform(sc, 157.0) == 1.0
    assert data.invert(sc, data.transform(sc, 86.0)) == pytest.approx(86.0, rel=1e-12)
    with pytest.raises(DataError):
        data.fit_scaler(data.DemandSeries(T0, [4.0, 4.0]))


@given(st.floats(0, 1e4), st.floats(1e-3, 1e4), st.floats(0, 1))
def test_scaler_round_trip(lo, width, u):
    sc = data.Scaler(lo, lo + width)
    x = lo + u * width
    back = float(sc.invert(sc.transform(x)))
    assert abs(back - x) <= 1e-12 * max(abs(x), abs(lo) + width)
