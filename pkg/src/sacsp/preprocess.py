"""Resampling, referencing, zero-phase bandpass filtering and epoching."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .data import ContinuousRecording, Epoch, EpochSet, Marker
from .errors import (
    BalanceError,
    CommonReferenceError,
    DesignError,
    EpochingError,
    LengthError,
    ResampleError,
)

ANTI_ALIAS_ORDER = 8
ANTI_ALIAS_FRACTION = 0.45


@dataclass(frozen=True)
class BiquadCascade:
    """Second-order sections, one row ``(b0, b1, b2, 1, a1, a2)`` each.

    ``order`` and the band edges describe the design (``high_hz`` is ``None``
    for lowpass designs). ``order`` is the prototype order, so a bandpass has
    ``2 * order`` poles.
    """

    sos: np.ndarray
    order: int
    low_hz: float | None
    high_hz: float | None
    fs: float

    @property
    def sections(self) -> list[dict[str, float]]:
        return [
            dict(b0=r[0], b1=r[1], b2=r[2], a1=r[4], a2=r[5]) for r in self.sos
        ]

    @property
    def total_order(self) -> int:
        return 2 * self.sos.shape[0]

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots([1.0, r[4], r[5]]) for r in self.sos])

    def response(self, freqs_hz) -> np.ndarray:
        """Complex single-pass frequency response evaluated section by section."""
        z = np.exp(1j * 2 * np.pi * np.asarray(freqs_hz, dtype=float) / self.fs)
        zi = 1.0 / z
        h = np.ones_like(z)
        for b0, b1, b2, _, a1, a2 in self.sos:
            h = h * (b0 + b1 * zi + b2 * zi**2) / (1.0 + a1 * zi + a2 * zi**2)
        return h


def design_butter_bandpass(order: int, low: float, high: float, fs: float) -> BiquadCascade:
    """Butterworth bandpass via analog prototype and bilinear transform."""
    if order <= 0 or order % 2:
        raise DesignError(f"order must be a positive even number, got {order}")
    if not 0 < low < high < fs / 2:
        raise DesignError(f"need 0 < low < high < fs/2, got low={low}, high={high}, fs={fs}")
    sos = signal.butter(order, [low, high], btype="bandpass", fs=fs, output="sos")
    return BiquadCascade(sos, order, float(low), float(high), float(fs))


def design_butter_lowpass(order: int, cutoff: float, fs: float) -> BiquadCascade:
    if order <= 0:
        raise DesignError(f"order must be positive, got {order}")
    if not 0 < cutoff < fs / 2:
        raise DesignError(f"need 0 < cutoff < fs/2, got cutoff={cutoff}, fs={fs}")
    sos = signal.butter(order, cutoff, btype="lowpass", fs=fs, output="sos")
    return BiquadCascade(sos, order, float(cutoff), None, float(fs))


def filtfilt(filt: BiquadCascade, x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Forward-backward filtering with odd reflection of ``3 * total_order`` samples."""
    x = np.asarray(x, dtype=float)
    padlen = 3 * filt.total_order
    if x.shape[axis] <= padlen:
        raise LengthError(
            f"signal of length {x.shape[axis]} too short for zero-phase filtering; "
            f"need more than {padlen} samples"
        )
    return signal.sosfiltfilt(filt.sos, x, axis=axis, padtype="odd", padlen=padlen)


def decimate(recording: ContinuousRecording, target_fs: float) -> ContinuousRecording:
    """Zero-phase anti-alias lowpass, then keep every ``fs / target_fs``-th sample."""
    ratio = recording.fs / target_fs
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise ResampleError(f"fs={recording.fs} is not an integer multiple of target_fs={target_fs}")
    if factor == 1:
        return recording
    lowpass = design_butter_lowpass(ANTI_ALIAS_ORDER, ANTI_ALIAS_FRACTION * target_fs, recording.fs)
    smoothed = filtfilt(lowpass, recording.samples, axis=-1)
    markers = tuple(Marker(m.sample // factor, m.label, m.is_trial_end) for m in recording.markers)
    return ContinuousRecording(smoothed[:, ::factor], float(target_fs), markers)


def common_average_reference(x: np.ndarray) -> np.ndarray:
    """Subtract the across-channel mean at each sample (channel axis is -2)."""
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[-2] < 2:
        raise CommonReferenceError("common average reference needs at least two channels")
    return x - x.mean(axis=-2, keepdims=True)


def epoch_stream(recording: ContinuousRecording, window_s: float, drop_trial_end: bool = True) -> EpochSet:
    """Cut one window per marker starting at the marker sample."""
    width = int(round(window_s * recording.fs))
    total = recording.samples.shape[1]
    epochs = []
    for i, m in enumerate(recording.markers):
        if drop_trial_end and m.is_trial_end:
            continue
        if m.sample + width > total:
            raise EpochingError(
                f"marker {i} at sample {m.sample} needs {width} samples but recording ends at {total}"
            )
        epochs.append(Epoch(recording.samples[:, m.sample:m.sample + width].copy(), m.label, recording.fs))
    if not epochs:
        return EpochSet(np.zeros((0, recording.n_channels, width)), np.zeros(0, dtype=np.int64), recording.fs)
    return EpochSet.from_epochs(epochs, recording.fs)


def balance_indices(labels: np.ndarray, seed: int) -> np.ndarray:
    """Sorted indices of a class-balanced subset; the majority class is subsampled."""
    labels = np.asarray(labels)
    idx1 = np.flatnonzero(labels == 1)
    idx2 = np.flatnonzero(labels == 2)
    if idx1.size == 0 or idx2.size == 0:
        raise BalanceError(f"cannot balance: class counts are ({idx1.size}, {idx2.size})")
    rng = np.random.default_rng(seed)
    n = min(idx1.size, idx2.size)
    keep1 = rng.choice(idx1, n, replace=False) if idx1.size > n else idx1
    keep2 = rng.choice(idx2, n, replace=False) if idx2.size > n else idx2
    return np.sort(np.concatenate([keep1, keep2]))


def balance_classes(epochs: EpochSet, seed: int) -> EpochSet:
    """Equalize class counts by seeded subsampling without replacement."""
    return epochs.subset(balance_indices(epochs.labels, seed))


@dataclass(frozen=True)
class PreprocessConfig:
    target_fs: float = 100.0
    window_s: float = 1.0
    band: tuple[float, float] = (7.0, 30.0)
    filter_order: int = 6
    car: bool = True
    drop_trial_end: bool = True
    # filter the continuous signal before epoching instead of each epoch
    filter_first: bool = False


def bandpass_epochs(epochs: EpochSet, cfg: PreprocessConfig = PreprocessConfig()) -> EpochSet:
    """Optional CAR, then per-epoch zero-phase bandpass and residual-mean removal."""
    data = epochs.data
    if cfg.car:
        data = common_average_reference(data)
    bp = design_butter_bandpass(cfg.filter_order, *cfg.band, epochs.fs)
    data = filtfilt(bp, data, axis=-1)
    data = data - data.mean(axis=-1, keepdims=True)
    return epochs.with_data(data)


def preprocess_recording(recording: ContinuousRecording, cfg: PreprocessConfig = PreprocessConfig()) -> EpochSet:
    """Decimate, epoch, re-reference and bandpass a continuous recording."""
    rec = decimate(recording, cfg.target_fs)
    if not cfg.filter_first:
        return bandpass_epochs(epoch_stream(rec, cfg.window_s, cfg.drop_trial_end), cfg)
    samples = rec.samples
    if cfg.car:
        samples = common_average_reference(samples)
    bp = design_butter_bandpass(cfg.filter_order, *cfg.band, rec.fs)
    filtered = ContinuousRecording(filtfilt(bp, samples), rec.fs, rec.markers)
    ep = epoch_stream(filtered, cfg.window_s, cfg.drop_trial_end)
    return ep.with_data(ep.data - ep.data.mean(axis=-1, keepdims=True))
