"""Binary epoch files and JSON model files.

Epoch file layout (all little-endian)::

    b"EPD1"
    u32 n_channels, u32 n_samples, u32 n_epochs, u32 fs_hz
    u8  label[n_epochs]                       # 1 or 2
    f64 data[n_epochs][n_channels][n_samples]
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .algorithms import FilterPair, TraceRecord, TrainedFilterBank
from .classify import LdaModel, SacspModel
from .data import EpochSet
from .errors import FormatError
from .linalg import WhiteningProjector
from .spectral import SpectralWeights

MAGIC = b"EPD1"
HEADER = struct.Struct("<4s4I")
MODEL_FORMAT = "sacsp-model"
MODEL_VERSION = 1


def write_epochs(path, epochs: EpochSet) -> None:
    fs = int(round(epochs.fs))
    if fs != epochs.fs:
        raise FormatError(f"epoch files store integer sampling rates, got {epochs.fs}")
    n_epochs, n_channels, n_samples = epochs.data.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, n_channels, n_samples, n_epochs, fs))
        fh.write(epochs.labels.astype(np.uint8).tobytes())
        fh.write(np.ascontiguousarray(epochs.data, dtype="<f8").tobytes())


def read_epochs(path) -> EpochSet:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n_channels, n_samples, n_epochs, fs = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = HEADER.size + n_epochs + 8 * n_epochs * n_channels * n_samples
    if len(raw) != expected:
        raise FormatError(f"{path}: payload is {len(raw)} bytes, header implies {expected}")
    labels = np.frombuffer(raw, np.uint8, n_epochs, HEADER.size).astype(np.int64)
    if not np.isin(labels, (1, 2)).all():
        raise FormatError(f"{path}: labels must be 1 or 2")
    data = np.frombuffer(raw, "<f8", offset=HEADER.size + n_epochs).reshape(n_epochs, n_channels, n_samples)
    return EpochSet(data.astype(float), labels, float(fs))


def _arr(x) -> list:
    return np.asarray(x, dtype=float).tolist()


def model_to_dict(model: SacspModel) -> dict:
    bank, lda = model.bank, model.lda
    proj = bank.projector
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algo": bank.algo,
        "config": bank.config,
        "t": bank.t,
        "fs": bank.fs,
        "pairs": [
            {
                "class_id": p.class_id,
                "spatial": _arr(p.spatial),
                "spectral": _arr(p.spectral.weights),
                "objective": p.objective,
                "init_index": p.init_index,
                "filter_index": p.filter_index,
                "iterations": p.iterations,
            }
            for p in bank.pairs
        ],
        "patterns": _arr(bank.patterns),
        "projector": {
            "q": _arr(proj.q),
            "rank": proj.rank,
            "retained_eigenvalues": _arr(proj.retained_eigenvalues),
            "basis": _arr(proj.basis),
        },
        "lda": {
            "weights": _arr(lda.weights),
            "bias": lda.bias,
            "shrinkage": lda.shrinkage_used,
            "class_means": [_arr(m) for m in lda.class_means],
        },
        "fingerprint": model.fingerprint,
        "trace": [
            {
                "class_id": r.class_id,
                "init_index": r.init_index,
                "filter_index": r.filter_index,
                "objectives": list(r.objectives),
                "hit_max_iters": r.hit_max_iters,
            }
            for r in bank.trace
        ],
    }


def model_from_dict(doc: dict) -> SacspModel:
    if doc.get("format") != MODEL_FORMAT:
        raise FormatError("not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')}")
    fs = float(doc["fs"])
    try:
        pairs = tuple(
            FilterPair(np.array(p["spatial"]), SpectralWeights(np.array(p["spectral"]), fs), p["class_id"],
                       p["objective"], p["init_index"], p["filter_index"], p["iterations"])
            for p in doc["pairs"]
        )
        pj = doc["projector"]
        projector = WhiteningProjector(np.array(pj["q"]), pj["rank"], np.array(pj["retained_eigenvalues"]),
                                       np.array(pj["basis"]))
        trace = tuple(TraceRecord(r["class_id"], r["init_index"], r["filter_index"], tuple(r["objectives"]),
                                  r["hit_max_iters"]) for r in doc.get("trace", []))
        bank = TrainedFilterBank(pairs, projector, np.array(doc["patterns"]), doc["algo"], int(doc["t"]), fs,
                                 trace, doc.get("config", {}))
        ld = doc["lda"]
        lda = LdaModel(np.array(ld["weights"]), ld["bias"], ld["shrinkage"],
                       tuple(np.array(m) for m in ld["class_means"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model file: {exc}") from exc
    return SacspModel(bank, lda, doc.get("fingerprint", {}))


def save_model(path, model: SacspModel) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def load_model(path) -> SacspModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return model_from_dict(doc)
