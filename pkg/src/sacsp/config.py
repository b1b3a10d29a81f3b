"""JSON run configuration with sections ``preprocess``, ``sacsp``, ``synth`` and ``eval``.

Every section and key is optional. Validation errors are ``ConfigError``
instances whose ``path`` names the offending field, e.g.
``synth.sources[0].center_hz``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .algorithms import SacspConfig
from .errors import ConfigError, GenerationError
from .evaluation import SplitPlan
from .preprocess import PreprocessConfig
from .spectral import INIT_KINDS
from .synth import Source, SynthSpec, default_spec

SECTIONS = ("preprocess", "sacsp", "synth", "eval")


@dataclass
class SynthSettings:
    spec: SynthSpec
    n_online_per_class: int = 136


@dataclass
class RunConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    apply_preprocess: bool = True
    sacsp: SacspConfig = field(default_factory=SacspConfig)
    synth: SynthSettings = field(default_factory=lambda: SynthSettings(default_spec(0)))
    eval: SplitPlan = field(default_factory=SplitPlan)


def _get(section: dict, key: str, path: str, kind, default, check=None, why: str = ""):
    if key not in section:
        return default
    value = section[key]
    ok_type = isinstance(value, kind) and not (kind in (int, float, (int, float)) and isinstance(value, bool))
    if not ok_type:
        raise ConfigError(f"{path}.{key}", f"expected {getattr(kind, '__name__', 'number')}, got {value!r}")
    if check is not None and not check(value):
        raise ConfigError(f"{path}.{key}", why or f"invalid value {value!r}")
    return value


NUM = (int, float)


def _preprocess(sec: dict) -> tuple[PreprocessConfig, bool]:
    p = "preprocess"
    band = _get(sec, "band", p, list, [7.0, 30.0],
                lambda b: len(b) == 2 and all(isinstance(x, NUM) for x in b) and 0 < b[0] < b[1],
                "band must be [low, high] with 0 < low < high")
    cfg = PreprocessConfig(
        target_fs=float(_get(sec, "target_fs", p, NUM, 100.0, lambda v: v > 0, "must be positive")),
        window_s=float(_get(sec, "window_s", p, NUM, 1.0, lambda v: v > 0, "must be positive")),
        band=(float(band[0]), float(band[1])),
        filter_order=_get(sec, "filter_order", p, int, 6, lambda v: v > 0 and v % 2 == 0, "must be a positive even integer"),
        car=_get(sec, "car", p, bool, True),
        drop_trial_end=_get(sec, "drop_trial_end", p, bool, True),
        filter_first=_get(sec, "filter_first", p, bool, False),
    )
    return cfg, _get(sec, "apply", p, bool, True)


def _sacsp(sec: dict) -> SacspConfig:
    p = "sacsp"
    kinds = _get(sec, "init_kinds", p, list, ["uniform", "mu_band", "beta_band"],
                 lambda v: len(v) > 0 and all(k in INIT_KINDS for k in v),
                 f"must be a non-empty list drawn from {list(INIT_KINDS)}")
    m_inits = _get(sec, "m_inits", p, int, len(kinds), lambda v: v == len(kinds), "must equal len(init_kinds)")
    return SacspConfig(
        r_filters=_get(sec, "r_filters", p, int, 3, lambda v: v >= 1, "r_filters must be >= 1"),
        epsilon=float(_get(sec, "epsilon", p, NUM, 1e-6, lambda v: v > 0, "must be positive")),
        max_iters=_get(sec, "max_iters", p, int, 100, lambda v: v >= 1, "must be >= 1"),
        init_kinds=tuple(kinds),
        m_inits=m_inits,
        whiten_threshold=float(_get(sec, "whiten_threshold", p, NUM, 1e-9, lambda v: 0 < v < 1, "must lie in (0, 1)")),
        spectral_updates=_get(sec, "spectral_updates", p, bool, True),
        seed=_get(sec, "seed", p, int, 0),
    )


def _source(src: dict, path: str, n_channels: int, fs: float) -> Source:
    if not isinstance(src, dict):
        raise ConfigError(path, "expected an object")
    for key in ("center_hz", "bandwidth_hz", "class1_amp", "class2_amp"):
        if key not in src:
            raise ConfigError(f"{path}.{key}", "required")
    center = _get(src, "center_hz", path, NUM, None)
    bw = _get(src, "bandwidth_hz", path, NUM, None, lambda v: v > 0, "must be positive")
    if not (0 < center - bw / 2 and center + bw / 2 < fs / 2):
        raise ConfigError(f"{path}.center_hz", f"band {center - bw / 2}-{center + bw / 2} Hz must lie inside (0, {fs / 2})")
    nonneg = lambda v: v >= 0
    col = _get(src, "mixing_column", path, list, None,
               lambda v: len(v) == n_channels and all(isinstance(x, NUM) for x in v) and any(v),
               f"must be a non-zero list of {n_channels} numbers")
    opt = lambda key: None if src.get(key) is None else float(_get(src, key, path, NUM, None, nonneg, "must be >= 0"))
    return Source(
        tuple(float(x) for x in col) if col else None,
        float(center), float(bw),
        float(_get(src, "class1_amp", path, NUM, None, nonneg, "must be >= 0")),
        float(_get(src, "class2_amp", path, NUM, None, nonneg, "must be >= 0")),
        opt("online_class1_amp"), opt("online_class2_amp"),
    )


def _synth(sec: dict) -> SynthSettings:
    p = "synth"
    seed = _get(sec, "seed", p, int, 0)
    n = _get(sec, "n_channels", p, int, 16, lambda v: v >= 2, "must be >= 2")
    n_cal = _get(sec, "n_calib_per_class", p, int, 68, lambda v: v >= 1, "must be >= 1")
    base = default_spec(seed, n, n_cal)
    fs = float(_get(sec, "fs", p, NUM, 100.0, lambda v: v > 0, "must be positive"))
    sources = base.sources
    if "sources" in sec:
        raw = _get(sec, "sources", p, list, None)
        sources = tuple(_source(s, f"{p}.sources[{i}]", n, fs) for i, s in enumerate(raw))
    elif fs != base.fs:
        raise ConfigError(f"{p}.sources", "custom fs requires explicit sources")
    spec = SynthSpec(
        n_channels=n,
        fs=fs,
        epoch_seconds=float(_get(sec, "epoch_seconds", p, NUM, 1.0, lambda v: v > 0, "must be positive")),
        n_epochs_per_class=n_cal,
        sources=sources,
        noise_sigma=float(_get(sec, "noise_sigma", p, NUM, base.noise_sigma, lambda v: v >= 0, "must be >= 0")),
        seed=seed,
    )
    try:
        spec = spec.validate()
    except GenerationError as exc:
        raise ConfigError(f"{p}", str(exc)) from exc
    n_on = _get(sec, "n_online_per_class", p, int, 136, lambda v: v >= 1, "must be >= 1")
    return SynthSettings(spec, n_on)


def _eval(sec: dict) -> SplitPlan:
    p = "eval"
    return SplitPlan(
        protocol=_get(sec, "protocol", p, str, "transfer", lambda v: v in ("transfer", "kfold"), "must be 'transfer' or 'kfold'"),
        k=_get(sec, "k", p, int, 5, lambda v: v >= 2, "must be >= 2"),
        n_repeats=_get(sec, "repeats", p, int, 10, lambda v: v >= 1, "must be >= 1"),
        seed=_get(sec, "seed", p, int, 0),
    )


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be an object")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown section; expected one of {list(SECTIONS)}")
    for name in SECTIONS:
        if name in doc and not isinstance(doc[name], dict):
            raise ConfigError(name, "section must be an object")
    pre, apply = _preprocess(doc.get("preprocess", {}))
    return RunConfig(pre, apply, _sacsp(doc.get("sacsp", {})), _synth(doc.get("synth", {})), _eval(doc.get("eval", {})))


def load_config(path) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return parse_config(doc)


def default_config_dict() -> dict:
    """The built-in defaults written out as a config document."""
    spec = default_spec(0)
    return {
        "preprocess": {"apply": True, "band": [7.0, 30.0], "filter_order": 6, "car": True},
        "sacsp": {"r_filters": 3, "epsilon": 1e-6, "max_iters": 100,
                  "init_kinds": ["uniform", "mu_band", "beta_band"], "whiten_threshold": 1e-9},
        "synth": {
            "n_channels": spec.n_channels, "fs": spec.fs, "epoch_seconds": spec.epoch_seconds,
            "n_calib_per_class": 68, "n_online_per_class": 136, "noise_sigma": spec.noise_sigma, "seed": 0,
            "sources": [
                {k: v for k, v in {
                    "center_hz": s.center_hz, "bandwidth_hz": s.bandwidth_hz,
                    "class1_amp": s.class1_amp, "class2_amp": s.class2_amp,
                    "online_class1_amp": s.online_class1_amp, "online_class2_amp": s.online_class2_amp,
                }.items() if v is not None}
                for s in spec.sources
            ],
        },
        "eval": {"protocol": "transfer", "k": 5, "repeats": 10, "seed": 0},
    }
