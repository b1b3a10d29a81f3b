import json

import numpy as np
import pytest

from sacsp.classify import fit_model
from sacsp.data import EpochSet
from sacsp.errors import FormatError
from sacsp.io import HEADER, load_model, model_to_dict, read_epochs, save_model, write_epochs

from conftest import random_epochs


def test_epoch_file_round_trip(tmp_path):
    ep = random_epochs(0, n_channels=5, per_class=7)
    path = tmp_path / "x.epd"
    write_epochs(path, ep)
    back = read_epochs(path)
    np.testing.assert_array_equal(back.data, ep.data)
    np.testing.assert_array_equal(back.labels, ep.labels)
    assert back.fs == 100.0
    raw = path.read_bytes()
    assert raw[:4] == b"EPD1"
    assert HEADER.unpack_from(raw)[1:] == (5, 100, 14, 100)
    assert len(raw) == HEADER.size + 14 + 8 * 14 * 5 * 100


def test_epoch_file_layout_is_epoch_major(tmp_path):
    data = np.arange(2 * 3 * 4, dtype=float).reshape(2, 3, 4)
    write_epochs(tmp_path / "y.epd", EpochSet(data, np.array([1, 2]), 4.0))
    payload = np.frombuffer((tmp_path / "y.epd").read_bytes()[HEADER.size + 2:], "<f8")
    np.testing.assert_array_equal(payload, np.arange(24.0))


@pytest.mark.parametrize("mutate", ["magic", "truncate", "label"])
def test_epoch_file_rejects_damage(tmp_path, mutate):
    path = tmp_path / "z.epd"
    write_epochs(path, random_epochs(1, n_channels=2, per_class=2))
    raw = bytearray(path.read_bytes())
    if mutate == "magic":
        raw[:4] = b"EPD2"
    elif mutate == "truncate":
        raw = raw[:-8]
    else:
        raw[HEADER.size] = 3
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_epochs(path)


def test_epoch_file_needs_integer_rate(tmp_path):
    with pytest.raises(FormatError):
        write_epochs(tmp_path / "r.epd", EpochSet(np.zeros((2, 2, 4)), np.array([1, 2]), 99.5))


@pytest.mark.parametrize("algo", ["csp", "ccacsp", "sacsp"])
def test_model_round_trip_is_prediction_exact(tmp_path, algo):
    ep = random_epochs(2, n_channels=5, per_class=15)
    model = fit_model(ep, algo)
    save_model(tmp_path / "m.json", model)
    back = load_model(tmp_path / "m.json")
    test = random_epochs(3, n_channels=5, per_class=10)
    drift = np.abs(back.decision_function(test) - model.decision_function(test)).max()
    assert drift <= 1e-12
    np.testing.assert_array_equal(back.predict_set(test), model.predict_set(test))
    for p, q in zip(model.bank.pairs, back.bank.pairs):
        np.testing.assert_array_equal(p.spatial, q.spatial)
        np.testing.assert_array_equal(p.spectral.weights, q.spectral.weights)
    assert back.bank.trace == model.bank.trace


def test_model_file_contents(tmp_path):
    model = fit_model(random_epochs(4, n_channels=4, per_class=10), "sacsp")
    doc = model_to_dict(model)
    assert doc["format"] == "sacsp-model" and doc["version"] == 1
    assert len(doc["pairs"]) == 6 and len(doc["pairs"][0]["spectral"]) == 100
    assert doc["fingerprint"]["n_channels"] == 4
    json.dumps(doc)


def test_model_file_rejects_garbage(tmp_path):
    (tmp_path / "a.json").write_text("{not json")
    with pytest.raises(FormatError):
        load_model(tmp_path / "a.json")
    (tmp_path / "b.json").write_text(json.dumps({"format": "sacsp-model", "version": 99}))
    with pytest.raises(FormatError):
        load_model(tmp_path / "b.json")
    (tmp_path / "c.json").write_text(json.dumps({"format": "sacsp-model", "version": 1, "fs": 100}))
    with pytest.raises(FormatError):
        load_model(tmp_path / "c.json")
