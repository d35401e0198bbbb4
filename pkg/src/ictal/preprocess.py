"""Raw recordings to model inputs: bipolar montage, 60 Hz notch, trimming
around seizures, and per-second labeled blocks with their context windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DataError
from .recording import Annotation, Recording


@dataclass(frozen=True)
class MontagePair:
    """One bipolar derivation: anode minus cathode."""

    anode_label: str
    cathode_label: str
    output_label: str = ""

    @property
    def label(self) -> str:
        return self.output_label or f"{self.anode_label}-{self.cathode_label}"


def _pairs(*names: str) -> tuple[MontagePair, ...]:
    return tuple(MontagePair(*name.split("-")) for name in names)


# the standard 18 longitudinal-bipolar derivations used throughout
DEFAULT_MONTAGE = _pairs(
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1",
    "FP1-F3", "F3-T3", "T3-P3", "P3-O1",
    "FP2-F4", "F4-C4", "C4-P4", "P4-O2",
    "FP2-F8", "F8-T8", "T8-P8", "P8-O2",
    "FZ-CZ", "CZ-PZ",
)


def apply_montage(recording: Recording, pairs: list[MontagePair] | None = None) -> Recording:
    """Derive bipolar channels (anode minus cathode, sample-wise).

    Defaults to the 18 standard pairs; raises :class:`DataError` naming any
    electrode label missing from the source recording.
    """
    if pairs is None:
        pairs = list(DEFAULT_MONTAGE)
    index = {label: k for k, label in enumerate(recording.channel_labels)}
    for pair in pairs:
        for label in (pair.anode_label, pair.cathode_label):
            if label not in index:
                raise DataError(f"montage electrode {label!r} not present in recording")
    out = np.empty((len(pairs), recording.n_samples))
    for k, pair in enumerate(pairs):
        out[k] = recording.samples[index[pair.anode_label]] - recording.samples[index[pair.cathode_label]]
    return Recording(
        channel_labels=[p.label for p in pairs],
        sample_rate=recording.sample_rate,
        samples=out,
        annotations=list(recording.annotations),
    )


def notch_coefficients(f0: float, fs: float, q: float = 30.0) -> tuple[np.ndarray, np.ndarray]:
    """Second-order IIR notch (b, a), normalized so a[0] = 1."""
    if not 0 < f0 < fs / 2:
        raise ConfigError(f"notch frequency {f0} Hz outside (0, {fs / 2}) for fs={fs}")
    if q <= 0:
        raise ConfigError(f"notch Q must be positive, got {q}")
    w0 = 2.0 * np.pi * f0 / fs
    alpha = np.sin(w0) / (2.0 * q)
    b = np.array([1.0, -2.0 * np.cos(w0), 1.0])
    a = np.array([1.0 + alpha, -2.0 * np.cos(w0), 1.0 - alpha])
    return b / a[0], a / a[0]


def notch_response(freqs, fs: float, f0: float = 60.0, q: float = 30.0) -> np.ndarray:
    """Analytic magnitude response |H(e^{j2*pi*f/fs})| of the notch biquad."""
    b, a = notch_coefficients(f0, fs, q)
    z = np.exp(-1j * 2.0 * np.pi * np.asarray(freqs, dtype=np.float64) / fs)
    num = b[0] + b[1] * z + b[2] * z**2
    den = a[0] + a[1] * z + a[2] * z**2
    return np.abs(num / den)


def notch_filter(signal, fs: float, f0: float = 60.0, q: float = 30.0) -> np.ndarray:
    """Single causal forward pass of the notch biquad over one channel."""
    b, a = notch_coefficients(f0, fs, q)
    return lfilter(b, a, np.asarray(signal, dtype=np.float64))


def notch_recording(recording: Recording, f0: float = 60.0, q: float = 30.0) -> Recording:
    """Apply the notch to every channel of a recording."""
    b, a = notch_coefficients(f0, recording.sample_rate, q)
    return Recording(
        channel_labels=list(recording.channel_labels),
        sample_rate=recording.sample_rate,
        samples=lfilter(b, a, recording.samples, axis=1),
        annotations=list(recording.annotations),
    )


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def trim_around_seizures(recording: Recording, factor: float = 10.0) -> Recording:
    """Keep only the neighborhood of each seizure.

    For a seizure of duration d the window [onset - factor*d, onset + d +
    factor*d) is kept, clamped to the recording; overlapping windows merge.
    Annotations are re-offset into the trimmed timeline.
    """
    if not recording.annotations:
        raise DataError("recording has no seizure annotations; nothing to trim around")
    if factor < 0:
        raise ConfigError(f"trim factor must be non-negative, got {factor}")
    fs = recording.sample_rate
    windows = [
        (max(0.0, a.onset - factor * a.duration), min(recording.duration, a.end + factor * a.duration))
        for a in recording.annotations
    ]
    pieces = []
    annotations = []
    offset = 0.0
    for lo, hi in _merge(windows):
        i0, i1 = int(round(lo * fs)), int(round(hi * fs))
        pieces.append(recording.samples[:, i0:i1])
        start = i0 / fs
        for a in recording.annotations:
            if a.onset >= start and a.end <= hi + 1e-9:
                annotations.append(Annotation(offset + a.onset - start, a.duration, a.label))
        offset += (i1 - i0) / fs
    return Recording(
        channel_labels=list(recording.channel_labels),
        sample_rate=fs,
        samples=np.concatenate(pieces, axis=1),
        annotations=annotations,
    )


def block_label_array(
    annotations: list[Annotation], block_starts, block_duration: float = 1.0
) -> np.ndarray:
    """Binary label per block: 1 iff at least half the block overlaps a seizure.

    This is the single labeling rule shared by the segmenter and the
    synthetic-data ground truth.
    """
    starts = np.asarray(block_starts, dtype=np.float64)
    labels = np.zeros(starts.shape[0], dtype=np.int8)
    intervals = _merge([(a.onset, a.end) for a in annotations]) if annotations else []
    for lo, hi in intervals:
        overlap = np.minimum(starts + block_duration, hi) - np.maximum(starts, lo)
        labels |= (overlap >= 0.5 * block_duration).astype(np.int8)
    return labels


@dataclass
class BlockSeries:
    """One-second labeled blocks over a shared channel array.

    Context windows are zero-copy views into ``samples``: the detector
    window is the ``cnn_window`` seconds ending at each block's end, the
    dependence window the (up to) ``mi_window`` trailing seconds.
    """

    samples: np.ndarray
    sample_rate: int
    block_starts: np.ndarray
    labels: np.ndarray
    cnn_window: float = 4.0
    mi_window: float = 32.0
    block_duration: float = 1.0

    @property
    def n_blocks(self) -> int:
        return self.block_starts.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    def cnn_context(self, k: int) -> np.ndarray:
        end = int((self.block_starts[k] + self.block_duration) * self.sample_rate)
        return self.samples[:, end - int(self.cnn_window * self.sample_rate) : end]

    def mi_context(self, k: int) -> np.ndarray:
        end = int((self.block_starts[k] + self.block_duration) * self.sample_rate)
        start = max(0, end - int(self.mi_window * self.sample_rate))
        return self.samples[:, start:end]


def segment_blocks(
    recording: Recording,
    cnn_window: float = 4.0,
    mi_window: float = 32.0,
) -> BlockSeries:
    """Cut a recording into per-second blocks with trailing context windows.

    Blocks start at whole seconds from t = cnn_window (earlier seconds lack
    detector context and produce no block).
    """
    fs = int(round(recording.sample_rate))
    if abs(fs - recording.sample_rate) > 1e-9:
        raise DataError(f"block segmentation requires an integer sample rate, got {recording.sample_rate}")
    if recording.duration < cnn_window + 1.0:
        raise DataError(
            f"recording is {recording.duration:.2f}s, shorter than context + one block "
            f"({cnn_window + 1.0:.0f}s)"
        )
    first = int(cnn_window)
    last = int(np.floor(recording.duration)) - 1  # block [t, t+1) must be complete
    starts = np.arange(first, last + 1, dtype=np.float64)
    labels = block_label_array(recording.annotations, starts)
    return BlockSeries(
        samples=recording.samples,
        sample_rate=fs,
        block_starts=starts,
        labels=labels,
        cnn_window=cnn_window,
        mi_window=mi_window,
    )
