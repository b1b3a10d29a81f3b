"""Spatial and spectrally-weighted covariance statistics.

All spectral quadratic forms are time averages: for an epoch ``X`` of ``t``
samples with unitary spectrum ``Xh = X F`` the weighted covariance is
``Re(Xh diag(h) Xh^H) / t``. With ``h = 1`` this is exactly the plain spatial
covariance ``X X^T / t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EpochSet
from .errors import DegenerateFilterError, DimensionError, InitError, StatsError
from .linalg import unitary_dft

SEGMENT_SECONDS = 1.0

INIT_BANDS = {
    "mu_band": (7.0, 15.0),
    "beta_band": (15.0, 30.0),
}
INIT_KINDS = ("uniform", "mu_band", "beta_band", "random")


@dataclass(frozen=True)
class SpectralWeights:
    """Per-DFT-bin weights over the full two-sided spectrum."""

    weights: np.ndarray
    fs: float

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def t(self) -> int:
        return self.weights.size

    def is_valid(self, tol: float = 1e-12) -> bool:
        w = self.weights
        sym = np.allclose(w[1:], w[1:][::-1], atol=tol, rtol=0)
        return bool((w >= 0).all() and np.linalg.norm(w) <= 1 + tol and sym)

    def one_sided(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies ``0..fs/2`` and the matching weights."""
        half = self.t // 2 + 1
        return np.arange(half) * self.fs / self.t, self.weights[:half]

    def peak_frequency(self) -> float:
        freqs, w = self.one_sided()
        return float(freqs[int(np.argmax(w))])


def bin_frequencies(t: int, fs: float) -> np.ndarray:
    """Folded frequency of each two-sided DFT bin, ``min(k, t - k) * fs / t``."""
    k = np.arange(t)
    return np.minimum(k, t - k) * fs / t


def make_init_weights(kind: str, t: int, fs: float, seed: int | None = None) -> SpectralWeights:
    """Unit-norm starting weights: flat, an indicator on a band, or random.

    Band indicators cover a bin and its mirror; bins 0 and ``t/2`` are their
    own mirrors and are counted once.
    """
    if t < 2:
        raise InitError(f"need t >= 2, got {t}")
    if kind == "uniform":
        w = np.ones(t)
    elif kind in INIT_BANDS:
        lo, hi = INIT_BANDS[kind]
        f = bin_frequencies(t, fs)
        w = ((f >= lo - 1e-9) & (f <= hi + 1e-9)).astype(float)
        if not w.any():
            raise InitError(f"band {lo}-{hi} Hz holds no DFT bin at t={t}, fs={fs}")
    elif kind == "random":
        rng = np.random.default_rng(seed)
        half = rng.random(t // 2 + 1)
        w = half[np.minimum(np.arange(t), t - np.arange(t))]
    else:
        raise InitError(f"unknown initialization kind {kind!r}")
    return SpectralWeights(w / np.linalg.norm(w), fs)


def cosine_weights(t: int, fs: float) -> SpectralWeights:
    """Raw ``cos(2 pi k / t)``; equivalent to averaging one-sample forward and backward shifts."""
    return SpectralWeights(np.cos(2 * np.pi * np.arange(t) / t), fs)


@dataclass(frozen=True)
class TrainStats:
    """Per-class spatial covariances and cached unitary spectra.

    ``spectra1``/``spectra2`` have shape ``(n_segments, n, t)``; epochs longer
    than one second contribute one entry per one-second segment.
    """

    sigma1: np.ndarray
    sigma2: np.ndarray
    spectra1: np.ndarray
    spectra2: np.ndarray
    t: int
    fs: float

    @property
    def n_channels(self) -> int:
        return self.sigma1.shape[0]

    def sigma(self, class_id: int) -> np.ndarray:
        return _pick(class_id, self.sigma1, self.sigma2)

    def spectra(self, class_id: int) -> np.ndarray:
        return _pick(class_id, self.spectra1, self.spectra2)

    @property
    def sigma_sum(self) -> np.ndarray:
        return self.sigma1 + self.sigma2

    def project(self, q: np.ndarray) -> "TrainStats":
        """Statistics of the data after mapping channels through ``q``."""
        return TrainStats(
            q @ self.sigma1 @ q.T,
            q @ self.sigma2 @ q.T,
            np.matmul(q, self.spectra1),
            np.matmul(q, self.spectra2),
            self.t,
            self.fs,
        )


def _pick(class_id, a, b):
    if class_id == 1:
        return a
    if class_id == 2:
        return b
    raise ValueError(f"class_id must be 1 or 2, got {class_id}")


def segment_epochs(data: np.ndarray, fs: float, seconds: float = SEGMENT_SECONDS) -> np.ndarray:
    """Split ``(N, n, T)`` epochs into non-overlapping ``seconds``-long pieces."""
    total = data.shape[-1]
    seg = int(round(seconds * fs))
    if total <= seg:
        return data
    if total % seg:
        raise StatsError(f"epoch length {total} is not a whole number of {seg}-sample segments")
    n_seg = total // seg
    pieces = data.reshape(data.shape[0], data.shape[1], n_seg, seg)
    return pieces.transpose(0, 2, 1, 3).reshape(-1, data.shape[1], seg)


def build_train_stats(epochs: EpochSet) -> TrainStats:
    counts = epochs.class_counts()
    if min(counts) == 0:
        raise StatsError(f"both classes are required, got class counts {counts}")
    per_class = []
    for c in (1, 2):
        x = epochs.data[epochs.labels == c]
        sigma = np.einsum("eij,ekj->ik", x, x) / (x.shape[0] * x.shape[-1])
        sigma = 0.5 * (sigma + sigma.T)
        segs = segment_epochs(x, epochs.fs)
        per_class.append((sigma, unitary_dft(segs)))
    (s1, f1), (s2, f2) = per_class
    return TrainStats(s1, s2, f1, f2, f1.shape[-1], epochs.fs)


def _weights_array(h, t: int) -> np.ndarray:
    h = np.asarray(h, dtype=float).reshape(-1)
    if h.size != t:
        raise DimensionError(f"spectral weights have length {h.size}, expected {t}")
    return h


def weighted_cov(stats: TrainStats, class_id: int, h) -> np.ndarray:
    """Segment average of ``Re(Xh diag(h) Xh^H) / t``, symmetrized."""
    h = _weights_array(h, stats.t)
    spec = stats.spectra(class_id)
    n_seg, n, t = spec.shape
    flat = spec.transpose(1, 0, 2).reshape(n, n_seg * t)
    gamma = ((flat * np.tile(h, n_seg)) @ flat.conj().T).real / (n_seg * t)
    return 0.5 * (gamma + gamma.T)


def bin_power(stats: TrainStats, class_id: int, w) -> np.ndarray:
    """Per-bin power ``E|w^T Xh[:, k]|^2 / t`` of the spatially filtered signal."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != stats.n_channels:
        raise DimensionError(f"spatial filter has length {w.size}, expected {stats.n_channels}")
    z = np.einsum("n,snk->sk", w, stats.spectra(class_id))
    return (z.real**2 + z.imag**2).mean(axis=0) / stats.t


def update_weights(power, fs: float = 100.0) -> SpectralWeights:
    """Unit-norm maximizer of ``<h, power>``: ``power / ||power||``."""
    p = np.asarray(power, dtype=float)
    norm = np.linalg.norm(p)
    if not norm > 0:
        raise DegenerateFilterError("bin power is identically zero; spectral weights undefined")
    return SpectralWeights(p / norm, fs)
