"""Log-power features, Ledoit-Wolf shrinkage and linear discriminant analysis."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import SacspConfig, TrainedFilterBank, train
from .data import Epoch, EpochSet
from .errors import CompatibilityError, EstimationError, FeatureError, TrainingError
from .linalg import unitary_dft
from .spectral import segment_epochs

POWER_FLOOR = 1e-300


def _filtered_power(bank: TrainedFilterBank, data: np.ndarray, fs: float) -> np.ndarray:
    """Spectrally weighted power of every filter on ``(N, n, T)`` epochs, shape ``(N, 2R)``."""
    if data.shape[1] != bank.spatial.shape[1]:
        raise CompatibilityError(f"epochs have {data.shape[1]} channels, bank expects {bank.spatial.shape[1]}")
    n_epochs, _, total = data.shape
    segs = segment_epochs(data, fs)
    t = segs.shape[-1]
    if t != bank.t:
        raise CompatibilityError(f"segment length {t} does not match the bank's {bank.t}")
    z = np.matmul(bank.spatial, unitary_dft(segs))
    power = z.real**2 + z.imag**2
    q = np.einsum("srk,rk->sr", power, bank.spectral) / t
    return q.reshape(n_epochs, -1, q.shape[-1]).mean(axis=1)


def extract_features_array(bank: TrainedFilterBank, data: np.ndarray, fs: float) -> np.ndarray:
    q = _filtered_power(bank, np.asarray(data, dtype=float), fs)
    feats = np.log(np.maximum(q, POWER_FLOOR))
    bad = np.argwhere(~np.isfinite(feats))
    if bad.size:
        raise FeatureError(f"filter {int(bad[0, 1])} yields non-positive power {q[tuple(bad[0])]:.3g}")
    return feats


def extract_features(bank: TrainedFilterBank, epoch: Epoch) -> np.ndarray:
    """Natural log of ``w^T Re(x_hat diag(h) x_hat^H) w / t`` per filter pair."""
    return extract_features_array(bank, epoch.data[None], epoch.fs)[0]


def ledoit_wolf_covariance(samples: np.ndarray, assume_centered: bool = False) -> tuple[np.ndarray, float]:
    """Ledoit-Wolf shrinkage towards ``tr(S)/d * I``.

    Returns the shrunk covariance and the coefficient in ``[0, 1]``. Zero
    scatter gives coefficient 1 and a single feature gives 0.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if n < 2:
        raise EstimationError(f"need at least 2 samples, got {n}")
    if not assume_centered:
        x = x - x.mean(axis=0)
    s = x.T @ x / n
    mu = np.trace(s) / d
    if d == 1:
        return s, 0.0
    target = mu * np.eye(d)
    delta = np.sum((s - target) ** 2) / d
    if delta <= 0:
        return target, 1.0
    # mean over samples of ||x x^T - S||_F^2, expanded to avoid n d x d temporaries
    sq = np.einsum("ij,ij->i", x, x)
    beta_bar = (np.sum(sq**2) / n - np.sum(s**2)) / (n * d)
    gamma = float(np.clip(min(beta_bar, delta) / delta, 0.0, 1.0))
    return (1 - gamma) * s + gamma * target, gamma


@dataclass(frozen=True)
class LdaModel:
    weights: np.ndarray
    bias: float
    shrinkage_used: float
    class_means: tuple[np.ndarray, np.ndarray]

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features) @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.where(self.decision_function(features) > 0, 1, 2)


def lda_train(features: np.ndarray, labels, shrinkage: float | None = None) -> LdaModel:
    """Two-class LDA with equal priors on a pooled, shrunk covariance.

    ``shrinkage=None`` picks the Ledoit-Wolf coefficient; a number forces it.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels).reshape(-1)
    if x.ndim == 1:
        x = x[:, None]
    x1, x2 = x[y == 1], x[y == 2]
    if len(x1) < 2 or len(x2) < 2:
        raise TrainingError(f"LDA needs >= 2 samples per class, got ({len(x1)}, {len(x2)})")
    mu1, mu2 = x1.mean(axis=0), x2.mean(axis=0)
    centered = np.vstack([x1 - mu1, x2 - mu2])
    cov, gamma = ledoit_wolf_covariance(centered, assume_centered=True)
    if shrinkage is not None:
        s = centered.T @ centered / len(centered)
        gamma = float(shrinkage)
        cov = (1 - gamma) * s + gamma * np.trace(s) / s.shape[0] * np.eye(s.shape[0])
    try:
        weights = np.linalg.solve(cov, mu1 - mu2)
    except np.linalg.LinAlgError as exc:
        raise TrainingError("pooled covariance is singular after shrinkage") from exc
    if not np.all(np.isfinite(weights)) or np.linalg.cond(cov) > 1e14:
        raise TrainingError("pooled covariance is singular after shrinkage")
    bias = float(-weights @ (mu1 + mu2) / 2)
    return LdaModel(weights, bias, gamma, (mu1, mu2))


@dataclass(frozen=True)
class SacspModel:
    """A trained filter bank plus its classifier and the data layout it expects."""

    bank: TrainedFilterBank
    lda: LdaModel
    fingerprint: dict = field(default_factory=dict)

    def check(self, n_channels: int, n_samples: int, fs: float) -> None:
        fp = self.fingerprint
        got = {"n_channels": n_channels, "n_samples": n_samples, "fs": float(fs)}
        bad = {k: (fp[k], v) for k, v in got.items() if k in fp and fp[k] != v}
        if bad:
            raise CompatibilityError(f"epoch does not match model: {bad} (expected, got)")

    def decision_function(self, epochs: EpochSet) -> np.ndarray:
        self.check(epochs.n_channels, epochs.n_samples, epochs.fs)
        return self.lda.decision_function(extract_features_array(self.bank, epochs.data, epochs.fs))

    def predict_set(self, epochs: EpochSet) -> np.ndarray:
        return np.where(self.decision_function(epochs) > 0, 1, 2)


def predict(model: SacspModel, epoch: Epoch) -> tuple[int, float]:
    """Class 1 iff the decision value is strictly positive."""
    model.check(epoch.data.shape[0], epoch.data.shape[1], epoch.fs)
    value = float(model.lda.decision_function(extract_features(model.bank, epoch)))
    return (1 if value > 0 else 2), value


def fit_model(epochs: EpochSet, algo: str, config: SacspConfig = SacspConfig(),
              band: tuple[float, float] | None = None) -> SacspModel:
    bank = train(epochs, algo, config)
    feats = extract_features_array(bank, epochs.data, epochs.fs)
    lda = lda_train(feats, epochs.labels)
    fp = {"n_channels": epochs.n_channels, "n_samples": epochs.n_samples, "fs": float(epochs.fs), "t": bank.t}
    if band is not None:
        fp["band"] = [float(band[0]), float(band[1])]
    return SacspModel(bank, lda, fp)


def accuracy(model: SacspModel, epochs: EpochSet) -> float:
    return float(np.mean(model.predict_set(epochs) == epochs.labels))
