import csv
import json
import re

import numpy as np
import pytest

from sacsp.cli import main
from sacsp.io import load_model, read_epochs, write_epochs

from conftest import random_epochs


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(out), "--seed", "3"]) == 0
    return out


@pytest.fixture(scope="module")
def models(synth_dir):
    paths = {}
    for algo in ("csp", "sacsp"):
        paths[algo] = synth_dir / f"{algo}.json"
        assert main(["train", str(synth_dir / "calib.epd"), "--algo", algo, "--out", str(paths[algo])]) == 0
    return paths


def test_synth_default_sizes(synth_dir, capsys):
    calib, online = read_epochs(synth_dir / "calib.epd"), read_epochs(synth_dir / "online.epd")
    assert len(calib) == 136 and calib.class_counts() == (68, 68)
    assert len(online) == 272
    assert calib.n_channels == 16 and calib.n_samples == 100


def test_synth_is_byte_identical(synth_dir, tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "--seed", "3"]) == 0
    assert "source 0: 10 Hz" in capsys.readouterr().out
    for name in ("calib.epd", "online.epd"):
        assert (tmp_path / name).read_bytes() == (synth_dir / name).read_bytes()


def test_synth_invalid_band(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"synth": {"sources": [
        {"center_hz": 1, "bandwidth_hz": 4, "class1_amp": 1, "class2_amp": 0}]}}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "sources[0].center_hz" in capsys.readouterr().err


def test_train_prints_trace(synth_dir, tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["train", str(synth_dir / "calib.epd"), "--out", str(out)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.strip().startswith("filter")]
    assert len(lines) == 6
    assert all(re.search(r"objective \S+ iterations \d+", l) for l in lines)


def test_trained_models_predict(models, synth_dir):
    online = read_epochs(synth_dir / "online.epd")
    for path in models.values():
        model = load_model(path)
        assert model.fingerprint["preprocess"]["band"] == [7.0, 30.0]
        assert set(np.unique(model.predict_set(online))) <= {1, 2}


def test_train_r_zero_is_config_error(synth_dir, tmp_path, capsys):
    cfg = tmp_path / "r0.json"
    cfg.write_text(json.dumps({"sacsp": {"r_filters": 0}}))
    assert main(["train", str(synth_dir / "calib.epd"), "--config", str(cfg), "--out", str(tmp_path / "m")]) == 2
    assert "sacsp.r_filters" in capsys.readouterr().err


def test_train_failure_exit_3(tmp_path, capsys):
    write_epochs(tmp_path / "small.epd", random_epochs(0, n_channels=3, per_class=10))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sacsp": {"r_filters": 3}}))
    # CAR leaves rank 2 on three channels, too few for 3 filters per class
    assert main(["train", str(tmp_path / "small.epd"), "--config", str(cfg), "--out", str(tmp_path / "m")]) == 3
    assert "StatsError" in capsys.readouterr().err


def test_missing_file_exit_5(tmp_path):
    assert main(["train", str(tmp_path / "nope.epd"), "--out", str(tmp_path / "m")]) == 5
    assert main(["export", str(tmp_path / "nope.json"), "--out", str(tmp_path / "e")]) == 5


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_eval_reports(synth_dir, tmp_path, capsys):
    calib, online = str(synth_dir / "calib.epd"), str(synth_dir / "online.epd")
    digests = {}
    for algo in ("csp", "sacsp"):
        out = tmp_path / algo
        assert main(["eval", calib, online, "--algo", algo, "--repeats", "10", "--seed", "1", "--out", str(out)]) == 0
        assert re.fullmatch(rf"{algo} transfer: \d\.\d\d/\d\.\d\d\d", capsys.readouterr().out.strip())
        rows = _rows(out / "report.csv")
        assert len(rows) == 10
        report = json.loads((out / "report.json").read_text())
        assert report["protocol"] == "transfer" and len(report["per_repeat_accuracy"]) == 10
        digests[algo] = [r["subset_digest"] for r in rows]
    assert digests["csp"] == digests["sacsp"]
    out = tmp_path / "kf"
    assert main(["eval", calib, online, "--algo", "csp", "--protocol", "kfold", "--repeats", "2",
                 "--out", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["protocol"] == "kfold"


def test_eval_with_model(models, synth_dir, tmp_path, capsys):
    out = tmp_path / "m"
    args = ["eval", str(synth_dir / "calib.epd"), str(synth_dir / "online.epd"), "--model", str(models["sacsp"]),
            "--repeats", "3", "--out", str(out)]
    assert main(args) == 0
    assert len(_rows(out / "report.csv")) == 3
    assert main(args[:-2] + ["--protocol", "kfold", "--out", str(out)]) == 4


def test_eval_protocol_error_exit_4(synth_dir, tmp_path):
    cfg = tmp_path / "k.json"
    cfg.write_text(json.dumps({"eval": {"k": 500}}))
    args = ["eval", str(synth_dir / "calib.epd"), str(synth_dir / "online.epd"), "--algo", "csp",
            "--protocol", "kfold", "--config", str(cfg), "--out", str(tmp_path / "o")]
    assert main(args) == 4


def test_export(models, tmp_path):
    out = tmp_path / "exp"
    assert main(["export", str(models["sacsp"]), "--out", str(out)]) == 0
    rows = _rows(out / "spectral_filters.csv")
    assert len(rows) == 51
    assert [float(r["frequency_hz"]) for r in rows] == list(range(51))
    cols = [c for c in rows[0] if c != "frequency_hz"]
    assert len(cols) == 6
    weights = np.array([[float(r[c]) for c in cols] for r in rows])
    assert np.all(np.argmax(weights, axis=0) == 10)
    pats = _rows(out / "spatial_patterns.csv")
    assert len(pats) == 16 and len(pats[0]) == 7
    assert (out / "spectral_filters.svg").read_text().startswith("<svg")


def test_export_uniform_filter_is_flat(models, tmp_path):
    out = tmp_path / "flat"
    assert main(["export", str(models["csp"]), "--out", str(out)]) == 0
    svg = (out / "spectral_filters.svg").read_text()
    lines = re.findall(r'points="([^"]+)"', svg)
    assert len(lines) == 6
    for pts in lines:
        ys = {p.split(",")[1] for p in pts.split()}
        assert len(ys) == 1
    xs = [float(p.split(",")[0]) for p in lines[0].split()]
    assert xs[0] == 60.0 and xs[-1] == 620.0
