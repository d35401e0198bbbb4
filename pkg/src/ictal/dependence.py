"""Classical inter-channel dependence measures and pairwise assembly.

All measures are symmetric scalar summaries of two equal-length sample
sequences. ``pair_order`` fixes the single canonical (i, j) enumeration
shared with the neural MI features.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DataError


def pair_order(n_channels: int) -> list[tuple[int, int]]:
    """Canonical channel-pair order: (i, j) with j > i, i major, j minor."""
    return [(i, j) for i in range(n_channels) for j in range(i + 1, n_channels)]


def pearson(x, y) -> float:
    """Sample Pearson correlation in [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DataError(f"need two equal-length 1-D sequences of >= 2 samples, got {x.shape}, {y.shape}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc))
    sy = np.sqrt(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise DataError("pearson undefined for zero-variance input")
    return float(np.clip(np.dot(xc, yc) / (sx * sy), -1.0, 1.0))


def distance_correlation(x, y) -> float:
    """Distance correlation in [0, 1] (V-statistic form).

    Double-centers the pairwise absolute-difference matrices; degenerate
    (constant) inputs return 0 by convention. O(n^2) time and memory.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DataError(f"need two equal-length 1-D sequences of >= 2 samples, got {x.shape}, {y.shape}")

    def centered(v: np.ndarray) -> np.ndarray:
        d = np.abs(v[:, None] - v[None, :])
        return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()

    a = centered(x)
    b = centered(y)
    n2 = float(x.size) ** 2
    dcov2 = (a * b).sum() / n2
    dvarx = (a * a).sum() / n2
    dvary = (b * b).sum() / n2
    if dvarx <= 0.0 or dvary <= 0.0:
        return 0.0
    return float(np.sqrt(max(dcov2, 0.0) / np.sqrt(dvarx * dvary)))


def analytic_signal(x) -> np.ndarray:
    """Analytic signal via the FFT one-sided spectrum doubling."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    spectrum = np.fft.fft(x)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(spectrum * h)


def instantaneous_phase_synchrony(x, y) -> float:
    """Phase-locking value in [0, 1]: |mean_t exp(i * dphi_t)|."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 8:
        raise DataError(f"need two equal-length 1-D sequences of >= 8 samples, got {x.shape}, {y.shape}")
    dphi = np.angle(analytic_signal(x)) - np.angle(analytic_signal(y))
    return float(np.abs(np.mean(np.exp(1j * dphi))))


def pairwise_matrix(context: np.ndarray, measure: Callable[[np.ndarray, np.ndarray], float]) -> np.ndarray:
    """Apply a dependence measure to every channel pair of a context window.

    ``context`` is a (n_channels, n_samples) array; the result is the
    length N(N-1)/2 vector in canonical pair order. Measure errors are
    re-raised with the offending pair attached.
    """
    context = np.asarray(context, dtype=np.float64)
    if context.ndim != 2 or context.shape[0] < 2:
        raise DataError(f"context must be (n_channels >= 2, n_samples), got {context.shape}")
    pairs = pair_order(context.shape[0])
    values = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        try:
            values[k] = measure(context[i], context[j])
        except Exception as exc:
            raise DataError(f"pair ({i}, {j}): {exc}") from exc
    return values


MEASURES: dict[str, Callable[[np.ndarray, np.ndarray], float]] = {
    "pearson": pearson,
    "dcor": distance_correlation,
    "plv": instantaneous_phase_synchrony,
}
