"""Multichannel physical-unit recordings and their seizure annotations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class Annotation:
    """One annotated event, in seconds from the start of the recording."""

    onset: float
    duration: float
    label: str = "seizure"

    @property
    def end(self) -> float:
        return self.onset + self.duration


@dataclass
class Recording:
    """Equal-length multichannel signal in physical units.

    ``samples`` is a ``(n_channels, n_samples)`` float64 array; channel k
    carries the label ``channel_labels[k]``.
    """

    channel_labels: list[str]
    sample_rate: float
    samples: np.ndarray
    annotations: list[Annotation] = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise DataError(f"samples must be 2-D (channels, samples), got ndim={self.samples.ndim}")
        if len(self.channel_labels) != self.samples.shape[0]:
            raise DataError(
                f"{len(self.channel_labels)} labels for {self.samples.shape[0]} channels"
            )
        if not self.sample_rate > 0:
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        for ann in self.annotations:
            if ann.onset < 0 or ann.end > self.duration + 1e-9:
                raise DataError(
                    f"annotation [{ann.onset}, {ann.end}) outside recording [0, {self.duration})"
                )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.shape[1] / self.sample_rate

    def channel(self, label: str) -> np.ndarray:
        """Samples of the channel with the given label."""
        try:
            idx = self.channel_labels.index(label)
        except ValueError:
            raise DataError(f"no channel labeled {label!r}") from None
        return self.samples[idx]
