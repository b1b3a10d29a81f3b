"""CSP, CCACSP and SACSP trainers.

Every trainer works in the whitened subspace ``Y = Q X`` where
``Q (sigma1 + sigma2) Q^T = I``; spatial filters are mapped back with
``Q^T`` and patterns with the pseudo-inverse of ``Q``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import EpochSet
from .errors import DegenerateFilterError, OptimizationError, PatternError, StatsError
from .linalg import DEFAULT_WHITEN_THRESHOLD, EigenPairs, WhiteningProjector, sym_eig, whitening_projector
from .parallel import parallel_map
from .spectral import (
    SpectralWeights,
    TrainStats,
    bin_power,
    build_train_stats,
    cosine_weights,
    make_init_weights,
    update_weights,
    weighted_cov,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("csp", "ccacsp", "sacsp")
MONOTONE_TOL = 1e-10


@dataclass(frozen=True)
class SacspConfig:
    r_filters: int = 3
    epsilon: float = 1e-6
    max_iters: int = 100
    init_kinds: tuple[str, ...] = ("uniform", "mu_band", "beta_band")
    whiten_threshold: float = DEFAULT_WHITEN_THRESHOLD
    m_inits: int | None = None
    # diagnostic switch: keep the initial spectral weights fixed
    spectral_updates: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init_kinds", tuple(self.init_kinds))
        if self.m_inits is None:
            object.__setattr__(self, "m_inits", len(self.init_kinds))
        if self.r_filters < 1:
            raise ValueError(f"r_filters must be >= 1, got {self.r_filters}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.m_inits != len(self.init_kinds) or not self.init_kinds:
            raise ValueError(f"m_inits={self.m_inits} does not match init_kinds={self.init_kinds}")
        if not 0 < self.whiten_threshold < 1:
            raise ValueError(f"whiten_threshold must lie in (0, 1), got {self.whiten_threshold}")


@dataclass(frozen=True)
class FilterPair:
    spatial: np.ndarray
    spectral: SpectralWeights
    class_id: int
    objective: float
    init_index: int = 0
    filter_index: int = 0
    iterations: int = 0


@dataclass(frozen=True)
class TraceRecord:
    """Objective sequence of one inner loop, indexed by (class, init, filter)."""

    class_id: int
    init_index: int
    filter_index: int
    objectives: tuple[float, ...]
    hit_max_iters: bool = False

    @property
    def iterations(self) -> int:
        return len(self.objectives) - 1


@dataclass(frozen=True)
class TrainedFilterBank:
    pairs: tuple[FilterPair, ...]
    projector: WhiteningProjector
    patterns: np.ndarray
    algo: str
    t: int
    fs: float
    trace: tuple[TraceRecord, ...] = ()
    config: dict = field(default_factory=dict)

    @property
    def spatial(self) -> np.ndarray:
        """Spatial filters as rows, shape ``(2R, n)``."""
        return np.stack([p.spatial for p in self.pairs])

    @property
    def spectral(self) -> np.ndarray:
        return np.stack([p.spectral.weights for p in self.pairs])

    def class_pairs(self, class_id: int) -> list[FilterPair]:
        return [p for p in self.pairs if p.class_id == class_id]


def objective(stats: TrainStats, class_id: int, w, h) -> float:
    """Rayleigh quotient ``w^T Gamma_c(h) w / w^T (sigma1 + sigma2) w``."""
    w = np.asarray(w, dtype=float).reshape(-1)
    denom = w @ stats.sigma_sum @ w
    if not denom > 0:
        raise DegenerateFilterError("spatial filter has zero power in sigma1 + sigma2")
    return float(w @ weighted_cov(stats, class_id, h) @ w / denom)


def compute_patterns(eigvecs_full, projector: WhiteningProjector) -> np.ndarray:
    """Channel-space patterns: columns of ``(A^{-1})^T`` mapped through ``pinv(Q)``.

    The columns of ``A`` are whitened-space filters. Patterns satisfy
    ``w_i^T a_j = delta_ij`` with ``w = Q^T A``.
    """
    a = eigvecs_full.vectors if isinstance(eigvecs_full, EigenPairs) else np.asarray(eigvecs_full, float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != projector.rank:
        raise PatternError(f"eigenvector matrix must be {projector.rank}x{projector.rank}, got {a.shape}")
    try:
        a_inv_t = np.linalg.inv(a).T
    except np.linalg.LinAlgError as exc:
        raise PatternError("eigenvector matrix is singular") from exc
    if not np.all(np.isfinite(a_inv_t)) or np.linalg.cond(a) > 1e12:
        raise PatternError("eigenvector matrix is numerically singular")
    return projector.q_pinv @ a_inv_t


def _sign(u: np.ndarray, projector: WhiteningProjector) -> float:
    """+1 or -1 so that the channel-space filter's largest entry is positive."""
    w = projector.q.T @ u
    return -1.0 if w[np.argmax(np.abs(w))] < 0 else 1.0


def _prepare(epochs: EpochSet, whiten_threshold: float, r_filters: int):
    stats = build_train_stats(epochs)
    try:
        projector = whitening_projector(stats.sigma_sum, whiten_threshold)
    except Exception as exc:
        raise StatsError(f"degenerate covariance: {exc}") from exc
    if r_filters > projector.rank:
        raise StatsError(f"r_filters={r_filters} exceeds the data rank {projector.rank}")
    return stats, projector, stats.project(projector.q)


def _pairs_from_eig(
    stats: TrainStats,
    white: TrainStats,
    projector: WhiteningProjector,
    eig: EigenPairs,
    columns: Sequence[int],
    class_id: int,
    h: SpectralWeights,
):
    pairs, pats = [], []
    full_patterns = compute_patterns(eig, projector)
    for rank_idx, col in enumerate(columns):
        sign = _sign(eig.vectors[:, col], projector)
        w = sign * (projector.q.T @ eig.vectors[:, col])
        pairs.append(FilterPair(w, h, class_id, objective(stats, class_id, w, h), 0, rank_idx, 0))
        pats.append(sign * full_patterns[:, col])
    return pairs, pats


def _fixed_weight_bank(epochs: EpochSet, r_filters: int, whiten_threshold: float, algo: str, make_h, per_class: bool):
    stats, projector, white = _prepare(epochs, whiten_threshold, r_filters)
    h = make_h(stats.t, stats.fs)
    pairs, pats = [], []
    if per_class:
        for c in (1, 2):
            eig = sym_eig(weighted_cov(white, c, h))
            p, a = _pairs_from_eig(stats, white, projector, eig, range(r_filters), c, h)
            pairs += p
            pats += a
    else:
        eig = sym_eig(white.sigma1)
        rank = projector.rank
        p1, a1 = _pairs_from_eig(stats, white, projector, eig, range(r_filters), 1, h)
        p2, a2 = _pairs_from_eig(stats, white, projector, eig, range(rank - 1, rank - 1 - r_filters, -1), 2, h)
        pairs, pats = p1 + p2, a1 + a2
    return TrainedFilterBank(
        tuple(pairs), projector, np.column_stack(pats), algo, stats.t, stats.fs,
        config={"r_filters": r_filters, "whiten_threshold": whiten_threshold},
    )


def train_csp(epochs: EpochSet, r_filters: int = 3, whiten_threshold: float = DEFAULT_WHITEN_THRESHOLD) -> TrainedFilterBank:
    """Classic CSP: top ``r`` and bottom ``r`` eigenvectors of ``(sigma1, sigma1 + sigma2)``."""
    flat = lambda t, fs: make_init_weights("uniform", t, fs)
    return _fixed_weight_bank(epochs, r_filters, whiten_threshold, "csp", flat, per_class=False)


def train_ccacsp(epochs: EpochSet, r_filters: int = 3, whiten_threshold: float = DEFAULT_WHITEN_THRESHOLD) -> TrainedFilterBank:
    """CSP with each class numerator replaced by its lag-one (cosine-weighted) covariance."""
    return _fixed_weight_bank(epochs, r_filters, whiten_threshold, "ccacsp", cosine_weights, per_class=True)


@dataclass(frozen=True)
class _Candidate:
    objective: float
    init_index: int
    filter_index: int
    u: np.ndarray
    h: SpectralWeights
    eig: EigenPairs
    column: int
    trace: TraceRecord


def _optimize_filter(white: TrainStats, class_id: int, m: int, r: int, h0: SpectralWeights,
                     eig0: EigenPairs, cfg: SacspConfig) -> _Candidate:
    u = eig0.vectors[:, r]
    h = h0
    eig, column = eig0, r
    gamma = weighted_cov(white, class_id, h)
    obj = float(u @ gamma @ u)
    objectives = [obj]
    hit_cap = False
    if cfg.spectral_updates:
        for it in range(cfg.max_iters):
            try:
                h = update_weights(bin_power(white, class_id, u), white.fs)
            except DegenerateFilterError as exc:
                raise OptimizationError(f"class {class_id}, init {m}, filter {r}: {exc}") from exc
            eig = sym_eig(weighted_cov(white, class_id, h))
            u, column = eig.vectors[:, 0], 0
            new = float(eig.values[0])
            objectives.append(new)
            if new < obj - MONOTONE_TOL * max(1.0, abs(obj)):
                raise OptimizationError(
                    f"objective decreased from {obj:.12g} to {new:.12g} "
                    f"(class {class_id}, init {m}, filter {r}, step {it})"
                )
            if new - obj <= cfg.epsilon:
                break
            obj = new
        else:
            hit_cap = True
            warnings.warn(f"class {class_id}, init {m}, filter {r}: reached max_iters={cfg.max_iters}")
    trace = TraceRecord(class_id, m, r, tuple(objectives), hit_cap)
    return _Candidate(objectives[-1], m, r, u, h, eig, column, trace)


def _run_init(args):
    white, class_id, m, kind, cfg = args
    h0 = make_init_weights(kind, white.t, white.fs, seed=cfg.seed + m)
    eig0 = sym_eig(weighted_cov(white, class_id, h0))
    return [_optimize_filter(white, class_id, m, r, h0, eig0, cfg) for r in range(cfg.r_filters)]


def select_candidates(candidates: Sequence[_Candidate], r_filters: int) -> list[_Candidate]:
    """Top ``r_filters`` by objective; ties broken by (init, filter) index."""
    ordered = sorted(candidates, key=lambda c: (-c.objective, c.init_index, c.filter_index))
    return ordered[:r_filters]


def train_sacsp(epochs: EpochSet, config: SacspConfig = SacspConfig()) -> TrainedFilterBank:
    """Alternate closed-form spectral updates with leading-eigenvector spatial updates.

    For each initial spectral weighting and each class, the top ``R``
    eigenvectors seed ``R`` independent inner loops that run until the class
    objective improves by no more than ``epsilon``. The best ``R`` of the
    ``M x R`` candidates per class are kept.
    """
    stats, projector, white = _prepare(epochs, config.whiten_threshold, config.r_filters)
    jobs = [(white, c, m, kind, config) for c in (1, 2) for m, kind in enumerate(config.init_kinds)]
    results = parallel_map(_run_init, jobs)

    pairs, pats, trace = [], [], []
    for c in (1, 2):
        cands = [cand for (job, res) in zip(jobs, results) if job[1] == c for cand in res]
        trace += [cand.trace for cand in cands]
        for cand in select_candidates(cands, config.r_filters):
            sign = _sign(cand.u, projector)
            w = sign * (projector.q.T @ cand.u)
            pattern = sign * compute_patterns(cand.eig, projector)[:, cand.column]
            obj = objective(stats, c, w, cand.h)
            pairs.append(FilterPair(w, cand.h, c, obj, cand.init_index, cand.filter_index, cand.trace.iterations))
            pats.append(pattern)
    cfg = {k: (list(v) if isinstance(v, tuple) else v) for k, v in config.__dict__.items()}
    return TrainedFilterBank(tuple(pairs), projector, np.column_stack(pats), "sacsp", stats.t, stats.fs,
                             tuple(trace), cfg)


def train(epochs: EpochSet, algo: str, config: SacspConfig = SacspConfig()) -> TrainedFilterBank:
    if algo == "csp":
        return train_csp(epochs, config.r_filters, config.whiten_threshold)
    if algo == "ccacsp":
        return train_ccacsp(epochs, config.r_filters, config.whiten_threshold)
    if algo == "sacsp":
        return train_sacsp(epochs, config)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
