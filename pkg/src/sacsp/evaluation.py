"""Calibration-to-online transfer, stratified k-fold and the signed-rank test."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .algorithms import SacspConfig
from .classify import accuracy, fit_model
from .data import EpochSet
from .errors import CompatibilityError, SplitError, TestError
from .parallel import parallel_map
from .preprocess import balance_indices

EXACT_MAX_N = 25


@dataclass(frozen=True)
class SplitPlan:
    protocol: str = "transfer"
    k: int = 5
    n_repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.protocol not in ("transfer", "kfold"):
            raise SplitError(f"unknown protocol {self.protocol!r}")
        if self.protocol == "kfold" and self.k < 2:
            raise SplitError(f"k must be >= 2, got {self.k}")
        if self.n_repeats < 1:
            raise SplitError(f"n_repeats must be >= 1, got {self.n_repeats}")

    def repeat_seed(self, repeat: int, stream: int = 0) -> int:
        """Seed for one repeat; identical across algorithms for paired comparisons."""
        return int(np.random.SeedSequence([self.seed, repeat, stream]).generate_state(1)[0])


@dataclass
class EvalReport:
    per_repeat_accuracy: list[float]
    algo: str
    protocol: str
    subset_digests: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_repeat_accuracy))

    @property
    def dispersion(self) -> float:
        """Standard deviation over repeats."""
        return float(np.std(self.per_repeat_accuracy))

    def summary(self) -> str:
        return f"{self.algo} {self.protocol}: {self.mean:.2f}/{self.dispersion:.3f}"

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "protocol": self.protocol,
            "per_repeat_accuracy": list(map(float, self.per_repeat_accuracy)),
            "mean": self.mean,
            "dispersion": self.dispersion,
            "dispersion_kind": "std_over_repeats",
            "subset_digests": list(self.subset_digests),
        }


def _digest(*arrays) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
        h.update(b"|")
    return h.hexdigest()[:16]


def transfer_subsets(calib: EpochSet, online: EpochSet, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Balanced (calibration, online) index sets for each repeat."""
    return [(balance_indices(calib.labels, plan.repeat_seed(r, 0)), balance_indices(online.labels, plan.repeat_seed(r, 1)))
            for r in range(plan.n_repeats)]


def run_transfer(calib: EpochSet, online: EpochSet, algo: str, config: SacspConfig = SacspConfig(),
                 plan: SplitPlan = SplitPlan()) -> EvalReport:
    """Train on balanced calibration data and score on balanced online data, per repeat."""
    if plan.protocol != "transfer":
        raise SplitError(f"run_transfer needs a transfer plan, got {plan.protocol!r}")
    if (calib.n_channels, calib.n_samples, calib.fs) != (online.n_channels, online.n_samples, online.fs):
        raise CompatibilityError(
            f"calibration {calib.data.shape[1:]}@{calib.fs} Hz and online "
            f"{online.data.shape[1:]}@{online.fs} Hz epochs differ"
        )
    subsets = transfer_subsets(calib, online, plan)
    digests = [_digest(ci, oi) for ci, oi in subsets]
    # already-balanced sets yield the same subsets every repeat; train each distinct one once
    unique = list(dict(zip(digests, subsets)).items())

    def one(item):
        _, (ci, oi) = item
        return accuracy(fit_model(calib.subset(ci), algo, config), online.subset(oi))

    by_digest = dict(zip((d for d, _ in unique), parallel_map(one, unique)))
    return EvalReport([by_digest[d] for d in digests], algo, "transfer", digests)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Test-index arrays for ``k`` folds with per-class round-robin assignment."""
    labels = np.asarray(labels)
    counts = [(labels == c).sum() for c in (1, 2)]
    if k > min(counts):
        raise SplitError(f"k={k} exceeds the smallest class count {min(counts)}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for c in (1, 2):
        idx = rng.permutation(np.flatnonzero(labels == c))
        for f, part in enumerate(np.array_split(idx, k)):
            folds[f].extend(part.tolist())
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def run_kfold(epochs: EpochSet, algo: str, config: SacspConfig = SacspConfig(),
              plan: SplitPlan = SplitPlan(protocol="kfold")) -> EvalReport:
    """Balanced, stratified k-fold cross-validation; accuracy pooled over folds."""
    if plan.protocol != "kfold":
        raise SplitError(f"run_kfold needs a kfold plan, got {plan.protocol!r}")

    def one(r):
        keep = balance_indices(epochs.labels, plan.repeat_seed(r, 0))
        sub = epochs.subset(keep)
        folds = stratified_folds(sub.labels, plan.k, plan.repeat_seed(r, 2))
        correct = 0
        for test in folds:
            train = np.setdiff1d(np.arange(len(sub)), test)
            model = fit_model(sub.subset(train), algo, config)
            correct += int((model.predict_set(sub.subset(test)) == sub.labels[test]).sum())
        return correct / len(sub), _digest(keep, *folds)

    out = parallel_map(one, range(plan.n_repeats))
    return EvalReport([a for a, _ in out], algo, "kfold", [d for _, d in out])


def _signed_rank_null(ranks: np.ndarray) -> np.ndarray:
    """Exact null distribution of twice ``W+`` for the given (possibly tied) ranks."""
    doubled = np.rint(2 * ranks).astype(np.int64)
    dist = np.zeros(int(doubled.sum()) + 1)
    dist[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[:-r] if r else dist
        dist = 0.5 * (dist + shifted)
    return dist


def wilcoxon_signed_rank(a, b) -> tuple[float, float]:
    """Paired two-sided signed-rank test; returns ``(min(W+, W-), p)``.

    Zero differences are dropped and tied magnitudes get average ranks. The
    p-value is exact for up to 25 pairs and uses the tie-corrected normal
    approximation above that.
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if d.ndim != 1:
        raise TestError("inputs must be 1-D sequences of equal length")
    d = d[d != 0]
    n = d.size
    if n < 5:
        raise TestError(f"need at least 5 non-zero differences, got {n}")
    ranks = sps.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    stat = min(w_plus, w_minus)
    if n <= EXACT_MAX_N:
        dist = _signed_rank_null(ranks)
        k = int(round(2 * stat))
        p = 2.0 * dist[: k + 1].sum()
    else:
        mean = n * (n + 1) / 4
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(tie_counts**3 - tie_counts) / 48
        z = (stat - mean) / math.sqrt(var)
        p = 2.0 * sps.norm.cdf(z)
    return stat, float(min(1.0, p))
