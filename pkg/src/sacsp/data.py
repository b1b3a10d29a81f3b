"""Containers for continuous recordings and labelled epochs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionError, EpochingError


@dataclass(frozen=True)
class Marker:
    sample: int
    label: int
    is_trial_end: bool = False


@dataclass(frozen=True)
class ContinuousRecording:
    """``samples`` has shape ``(n_channels, T)`` in microvolts."""

    samples: np.ndarray
    fs: float
    markers: tuple[Marker, ...] = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise DimensionError(f"samples must be 2-D (channels, time), got {samples.shape}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "markers", tuple(self.markers))
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        idx = [m.sample for m in self.markers]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise EpochingError("marker indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= samples.shape[1]):
            raise EpochingError("marker index outside the recording")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class Epoch:
    data: np.ndarray
    label: int
    fs: float


@dataclass(frozen=True)
class EpochSet:
    """A labelled stack of equally sized epochs.

    ``data`` has shape ``(n_epochs, n_channels, n_samples)``; ``labels`` holds
    class ids 1 or 2.
    """

    data: np.ndarray
    labels: np.ndarray
    fs: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if data.ndim != 3:
            if data.size == 0:
                data = data.reshape(0, 0, 0)
            else:
                raise DimensionError(f"epoch data must be 3-D, got {data.shape}")
        if data.shape[0] != labels.shape[0]:
            raise DimensionError(f"{data.shape[0]} epochs but {labels.shape[0]} labels")
        if labels.size and not np.isin(labels, (1, 2)).all():
            raise ValueError("labels must be 1 or 2")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_epochs(cls, epochs: Sequence[Epoch], fs: float | None = None) -> "EpochSet":
        if not epochs:
            return cls(np.zeros((0, 0, 0)), np.zeros(0, dtype=np.int64), fs or 1.0)
        fs = epochs[0].fs if fs is None else fs
        if any(e.fs != fs for e in epochs):
            raise DimensionError("epochs disagree on sampling rate")
        return cls(np.stack([e.data for e in epochs]), np.array([e.label for e in epochs]), fs)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Epoch]:
        for x, y in zip(self.data, self.labels):
            yield Epoch(x, int(y), self.fs)

    def __getitem__(self, i: int) -> Epoch:
        return Epoch(self.data[i], int(self.labels[i]), self.fs)

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def class_counts(self) -> tuple[int, int]:
        return int((self.labels == 1).sum()), int((self.labels == 2).sum())

    def subset(self, index) -> "EpochSet":
        index = np.asarray(index)
        return EpochSet(self.data[index], self.labels[index], self.fs, dict(self.meta))

    def with_data(self, data: np.ndarray) -> "EpochSet":
        return EpochSet(data, self.labels, self.fs, dict(self.meta))

    def with_labels(self, labels: np.ndarray) -> "EpochSet":
        return EpochSet(self.data, labels, self.fs, dict(self.meta))
