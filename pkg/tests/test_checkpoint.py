import numpy as np
import pytest

from aquacast.errors import DataError
from aquacast.nn import checkpoint


def test_round_trip_preserves_header_and_arrays(tmp_path, rng):
    arrays = {"a": rng.normal(size=(3, 4)), "b": np.arange(5.0), "s": np.array(2.5)}
    header = {"kind": "dcgru", "nested": {"x": [1, 2]}}
    checkpoint.save(tmp_path / "m.ckpt", header, arrays)
    h2, a2 = checkpoint.load(tmp_path / "m.ckpt")
    assert h2["kind"] == "dcgru" and h2["nested"] == {"x": [1, 2]}
    for k, v in arrays.items():
        assert a2[k].shape == v.shape
        assert np.array_equal(a2[k], v)


def test_bytes_are_deterministic(rng):
    arrays = {"w": rng.normal(size=7)}
    assert checkpoint.dumps({"b": 1, "a": 2}, arrays) == checkpoint.dumps({"a": 2, "b": 1}, arrays)


@pytest.mark.parametrize("mutate", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:-3],
    lambda b: b + b"\0",
    lambda b: b[:4] + (99).to_bytes(4, "little") + b[8:],
])
def test_corrupt_blobs_rejected(mutate):
    blob = checkpoint.dumps({"k": 1}, {"w": np.ones(4)})
    with pytest.raises(DataError):
        checkpoint.loads(mutate(blob))
