"""Synthetic two-class epochs with planted, band-limited spatial sources."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .algorithms import TrainedFilterBank
from .data import EpochSet
from .errors import GenerationError
from .preprocess import design_butter_bandpass, filtfilt

SOURCE_FILTER_ORDER = 4


@dataclass(frozen=True)
class Source:
    """One planted source; ``online_*_amp`` override the amplitudes in a drifted copy."""

    mixing_column: tuple[float, ...] | None
    center_hz: float
    bandwidth_hz: float
    class1_amp: float
    class2_amp: float
    online_class1_amp: float | None = None
    online_class2_amp: float | None = None


@dataclass(frozen=True)
class SynthSpec:
    n_channels: int = 16
    fs: float = 100.0
    epoch_seconds: float = 1.0
    n_epochs_per_class: int = 68
    sources: tuple[Source, ...] = ()
    noise_sigma: float = 1.0
    seed: int = 0

    @property
    def n_samples(self) -> int:
        return int(round(self.epoch_seconds * self.fs))

    def validate(self) -> "SynthSpec":
        """Return a copy with unit-norm mixing columns, or raise ``GenerationError``."""
        if self.n_channels < 1 or self.n_epochs_per_class < 1 or self.n_samples < 2:
            raise GenerationError("n_channels, n_epochs_per_class and epoch length must be positive")
        if self.noise_sigma < 0:
            raise GenerationError("noise_sigma must be >= 0")
        rng = np.random.default_rng([self.seed, 7919])
        fixed = []
        for i, s in enumerate(self.sources):
            lo, hi = s.center_hz - s.bandwidth_hz / 2, s.center_hz + s.bandwidth_hz / 2
            if not (s.bandwidth_hz > 0 and 0 < lo and hi < self.fs / 2):
                raise GenerationError(f"sources[{i}].center_hz: band {lo}-{hi} Hz outside (0, {self.fs / 2})")
            amps = [s.class1_amp, s.class2_amp, s.online_class1_amp, s.online_class2_amp]
            if any(a is not None and a < 0 for a in amps):
                raise GenerationError(f"sources[{i}]: amplitudes must be >= 0")
            col = rng.standard_normal(self.n_channels) if s.mixing_column is None else np.asarray(s.mixing_column, float)
            if col.shape != (self.n_channels,) or not np.linalg.norm(col) > 0:
                raise GenerationError(f"sources[{i}].mixing_column must be a non-zero vector of length {self.n_channels}")
            fixed.append(replace(s, mixing_column=tuple(col / np.linalg.norm(col))))
        return replace(self, sources=tuple(fixed))

    def mixing(self) -> np.ndarray:
        spec = self.validate()
        return np.array([s.mixing_column for s in spec.sources]).T.reshape(self.n_channels, -1)

    def online(self, n_epochs_per_class: int | None = None, seed_offset: int = 1_000_003) -> "SynthSpec":
        """Same mixing, drifted amplitudes and fresh noise for the online session."""
        spec = self.validate()
        sources = tuple(
            replace(
                s,
                class1_amp=s.class1_amp if s.online_class1_amp is None else s.online_class1_amp,
                class2_amp=s.class2_amp if s.online_class2_amp is None else s.online_class2_amp,
                online_class1_amp=None,
                online_class2_amp=None,
            )
            for s in spec.sources
        )
        n = spec.n_epochs_per_class if n_epochs_per_class is None else n_epochs_per_class
        return replace(spec, sources=sources, n_epochs_per_class=n, seed=spec.seed + seed_offset)


@lru_cache(maxsize=256)
def _source_filter(center: float, bandwidth: float, fs: float):
    filt = design_butter_bandpass(SOURCE_FILTER_ORDER, center - bandwidth / 2, center + bandwidth / 2, fs)
    # output variance of zero-phase filtering unit white noise is the mean of |H|^4
    grid = np.linspace(0, fs / 2, 8193)
    gain = np.mean(np.abs(filt.response(grid)) ** 4)
    return filt, float(np.sqrt(gain))


def _pad(n_samples: int, fs: float) -> int:
    return max(n_samples, int(2 * fs))


def band_limit(raw: np.ndarray, center: float, bandwidth: float, fs: float, n_samples: int) -> np.ndarray:
    """Filter padded white noise ``raw`` (last axis) to unit-variance band-limited noise."""
    filt, rms = _source_filter(center, bandwidth, fs)
    pad = _pad(n_samples, fs)
    return filtfilt(filt, raw)[..., pad:pad + n_samples] / rms


def band_limited_noise(rng: np.random.Generator, n_epochs: int, n_samples: int, center: float,
                       bandwidth: float, fs: float) -> np.ndarray:
    """Unit-variance band-limited Gaussian noise, shape ``(n_epochs, n_samples)``."""
    raw = rng.standard_normal((n_epochs, n_samples + 2 * _pad(n_samples, fs)))
    return band_limit(raw, center, bandwidth, fs, n_samples)


def generate(spec: SynthSpec) -> tuple[EpochSet, SynthSpec]:
    """Class-1 epochs first, then class-2.

    Every epoch draws its sensor noise and raw source noise from its own
    stream seeded by ``(seed, class, index)``, so epochs are reproducible
    independently of how many are generated.
    """
    spec = spec.validate()
    n, t, fs = spec.n_channels, spec.n_samples, spec.fs
    length = t + 2 * _pad(t, fs)
    n_src = len(spec.sources)
    labels = np.repeat([1, 2], spec.n_epochs_per_class)
    noise = np.empty((labels.size, n, t))
    raw = np.empty((n_src, labels.size, length))
    for e, (class_id, i) in enumerate(zip(labels, np.tile(np.arange(spec.n_epochs_per_class), 2))):
        rng = np.random.default_rng([spec.seed, int(class_id), int(i)])
        noise[e] = rng.standard_normal((n, t))
        raw[:, e] = rng.standard_normal((n_src, length))
    data = spec.noise_sigma * noise
    for k, s in enumerate(spec.sources):
        amp = np.where(labels == 1, s.class1_amp, s.class2_amp)
        if not amp.any():
            continue
        sig = band_limit(raw[k], s.center_hz, s.bandwidth_hz, fs, t) * amp[:, None]
        data += np.asarray(s.mixing_column)[None, :, None] * sig[:, None, :]
    return EpochSet(data, labels, fs, {"synth_seed": spec.seed}), spec


def discriminative_source(spec: SynthSpec, class_id: int) -> int | None:
    """Index of the source with the largest power ratio in favour of ``class_id``."""
    best, best_ratio = None, 1.0
    for i, s in enumerate(spec.sources):
        mine, other = (s.class1_amp, s.class2_amp) if class_id == 1 else (s.class2_amp, s.class1_amp)
        ratio = np.inf if other == 0 and mine > 0 else (mine / other if other else 0.0)
        if ratio > best_ratio:
            best, best_ratio = i, ratio
    return best


@dataclass
class RecoveryScore:
    pattern_cosines: dict = field(default_factory=dict)
    peak_bin_errors: dict = field(default_factory=dict)
    applicable: bool = True


def reference_recovery_score(bank: TrainedFilterBank, spec: SynthSpec, common_average: bool = False) -> RecoveryScore:
    """Compare selected patterns and spectral peaks with the planted sources.

    ``common_average`` re-references the mixing columns the same way the
    training data were re-referenced.
    """
    spec = spec.validate()
    score = RecoveryScore()
    for c in (1, 2):
        idx = discriminative_source(spec, c)
        if idx is None:
            score.applicable = False
            score.pattern_cosines[c] = float("nan")
            score.peak_bin_errors[c] = []
            continue
        src = spec.sources[idx]
        a = np.asarray(src.mixing_column)
        if common_average:
            a = a - a.mean()
        cols = [j for j, p in enumerate(bank.pairs) if p.class_id == c]
        pats = bank.patterns[:, cols]
        cos = np.abs(a @ pats) / (np.linalg.norm(a) * np.linalg.norm(pats, axis=0))
        score.pattern_cosines[c] = float(cos.max())
        score.peak_bin_errors[c] = [abs(bank.pairs[j].spectral.peak_frequency() - src.center_hz) for j in cols]
    return score


def default_spec(seed: int = 0, n_channels: int = 16, n_epochs_per_class: int = 68) -> SynthSpec:
    """Acceptance scenario: a 10 Hz source per class plus a broadband distractor.

    Each class has its own 10 Hz, 2 Hz-wide source with three times the
    amplitude of the other class. A 10-26 Hz distractor is also
    class-dependent during calibration, and its amplitudes swap in the
    ``online()`` copy. Mixing columns are random unit vectors drawn from
    ``seed``.
    """
    sources = (
        Source(None, 10.0, 2.0, 1.5, 0.5),
        Source(None, 10.0, 2.0, 0.5, 1.5),
        Source(None, 18.0, 16.0, 1.2, 0.6, online_class1_amp=0.6, online_class2_amp=1.2),
    )
    return SynthSpec(n_channels, 100.0, 1.0, n_epochs_per_class, sources, 1.5, seed).validate()
