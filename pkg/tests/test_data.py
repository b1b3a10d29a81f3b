import numpy as np
import pytest

from sacsp.data import ContinuousRecording, Epoch, EpochSet, Marker
from sacsp.errors import DimensionError, EpochingError
from sacsp.parallel import parallel_map, worker_count


def test_epoch_set_basics():
    data = np.arange(3 * 2 * 4, dtype=float).reshape(3, 2, 4)
    ep = EpochSet(data, [1, 2, 1], 50.0)
    assert len(ep) == 3 and ep.n_channels == 2 and ep.n_samples == 4
    assert ep.class_counts() == (2, 1)
    assert ep[1].label == 2 and np.array_equal(ep[1].data, data[1])
    assert [e.label for e in ep] == [1, 2, 1]
    assert ep.subset([2, 0]).labels.tolist() == [1, 1]
    again = EpochSet.from_epochs(list(ep))
    np.testing.assert_array_equal(again.data, data)


def test_epoch_set_validation():
    with pytest.raises(DimensionError):
        EpochSet(np.zeros((2, 4)), [1, 2], 100.0)
    with pytest.raises(DimensionError):
        EpochSet(np.zeros((2, 1, 4)), [1], 100.0)
    with pytest.raises(ValueError):
        EpochSet(np.zeros((2, 1, 4)), [1, 3], 100.0)
    with pytest.raises(DimensionError):
        EpochSet.from_epochs([Epoch(np.zeros((1, 4)), 1, 100.0), Epoch(np.zeros((1, 4)), 2, 50.0)])


def test_recording_validation():
    with pytest.raises(EpochingError):
        ContinuousRecording(np.zeros((2, 10)), 100.0, (Marker(5, 1), Marker(5, 2)))
    with pytest.raises(EpochingError):
        ContinuousRecording(np.zeros((2, 10)), 100.0, (Marker(10, 1),))
    with pytest.raises(DimensionError):
        ContinuousRecording(np.zeros(10), 100.0)


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("SACSP_THREADS", "3")
    assert worker_count() == 3
    assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    monkeypatch.setenv("SACSP_THREADS", "junk")
    assert worker_count() == 1
