"""Dense linear-algebra primitives shared by every trainer.

All routines operate on real ``numpy`` arrays and return new arrays; nothing
is mutated in place.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DefinitenessError, DimensionError, NumericError

DEFAULT_WHITEN_THRESHOLD = 1e-9


class EigenPairs(NamedTuple):
    """Eigenvalues in descending order with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class WhiteningProjector:
    """Map onto the full-rank subspace of ``sigma1 + sigma2``.

    ``q`` has shape ``(rank, n)`` and satisfies ``q @ S @ q.T == I``. The
    pseudo-inverse ``q_pinv`` (shape ``(n, rank)``) maps whitened-space
    patterns back to channel space.
    """

    q: np.ndarray
    rank: int
    retained_eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def n_channels(self) -> int:
        return self.q.shape[1]

    @property
    def q_pinv(self) -> np.ndarray:
        return self.basis * np.sqrt(self.retained_eigenvalues)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Apply ``q`` along the channel axis (second to last)."""
        return np.matmul(self.q, x)

    def filters_to_channels(self, u: np.ndarray) -> np.ndarray:
        """Back-project whitened-space filters (columns) via ``q.T``."""
        return self.q.T @ u

    @classmethod
    def identity(cls, n: int) -> "WhiteningProjector":
        eye = np.eye(n)
        return cls(q=eye, rank=n, retained_eigenvalues=np.ones(n), basis=eye)


def _check_square(s: np.ndarray, name: str = "matrix") -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise NumericError(f"{name} has non-finite entries")
    return s


def _check_symmetric(s: np.ndarray, name: str = "matrix", rtol: float = 1e-10) -> None:
    scale = max(np.abs(s).max(), np.finfo(float).tiny)
    asym = np.abs(s - s.T).max() / scale
    if asym > rtol:
        raise DimensionError(f"{name} is not symmetric (relative asymmetry {asym:.3g})")


def sym_eig(s: np.ndarray) -> EigenPairs:
    """Eigendecomposition of a real symmetric matrix, values descending."""
    s = _check_square(s)
    _check_symmetric(s)
    sym = 0.5 * (s + s.T)
    try:
        values, vectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition of {s.shape[0]}x{s.shape[0]} matrix did not converge") from exc
    order = np.argsort(values)[::-1]
    return EigenPairs(values[order], vectors[:, order])


def whitening_projector(
    sigma_sum: np.ndarray, rel_threshold: float = DEFAULT_WHITEN_THRESHOLD
) -> WhiteningProjector:
    """Build ``Q = Psi^{-1/2} L^T`` from the retained eigenpairs of ``sigma_sum``.

    Eigenvalues at or below ``rel_threshold * max_eigenvalue`` are dropped,
    which absorbs rank deficiency such as the one introduced by a common
    average reference.
    """
    if not 0.0 < rel_threshold < 1.0:
        raise ValueError(f"rel_threshold must lie in (0, 1), got {rel_threshold}")
    values, vectors = sym_eig(sigma_sum)
    top = values[0] if values.size else 0.0
    if not top > 0.0:
        raise DefinitenessError("degenerate covariance: no positive eigenvalues to whiten")
    keep = values > rel_threshold * top
    kept_values = values[keep]
    basis = vectors[:, keep]
    q = (basis / np.sqrt(kept_values)).T
    return WhiteningProjector(q=q, rank=int(keep.sum()), retained_eigenvalues=kept_values, basis=basis)


def generalized_eig(a: np.ndarray, b: np.ndarray) -> EigenPairs:
    """Solve ``a v = lambda b v`` for symmetric ``a`` and SPD ``b``.

    ``b`` is whitened first; the symmetric problem is solved there and the
    eigenvectors are mapped back, so ``v.T @ b @ v == I``. ``a`` may be
    indefinite.
    """
    a = _check_square(a, "a")
    b = _check_square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"a and b differ in shape: {a.shape} vs {b.shape}")
    _check_symmetric(a, "a")
    _check_symmetric(b, "b")
    b_vals, b_vecs = sym_eig(b)
    if not (b_vals[-1] > 1e-12 * b_vals[0] and b_vals[0] > 0):
        raise DefinitenessError(
            "b is not positive definite; project onto its full-rank subspace "
            "with whitening_projector first"
        )
    inv_sqrt = b_vecs / np.sqrt(b_vals)
    white = inv_sqrt.T @ a @ inv_sqrt
    values, u = sym_eig(0.5 * (white + white.T))
    return EigenPairs(values, inv_sqrt @ u)


def dft_matrix(t: int) -> np.ndarray:
    """Unitary DFT matrix ``F[j, k] = exp(-2 pi i j k / t) / sqrt(t)``."""
    idx = np.arange(t)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / t) / np.sqrt(t)


def unitary_dft(x: np.ndarray, fast: bool = True) -> np.ndarray:
    """Row-wise unitary DFT of real data along the last axis.

    Bin ``k`` corresponds to ``k * fs / t`` Hz. ``fast=False`` uses an explicit
    DFT-matrix product; the FFT path agrees with it to rounding error.
    """
    x = np.asarray(x, dtype=float)
    t = x.shape[-1]
    if t < 2:
        raise DimensionError(f"need at least 2 time samples, got {t}")
    if fast:
        return np.fft.fft(x, axis=-1, norm="ortho")
    return x @ dft_matrix(t)
