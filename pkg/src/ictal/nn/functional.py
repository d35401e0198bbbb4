"""Differentiable layer kernels with exact analytic gradients.

Every ``*_forward`` returns ``(output, cache)`` and the matching
``*_backward`` consumes the upstream gradient plus that cache. All math is
64-bit. Convolutions use the cross-correlation convention (kernels are not
flipped). Dense layers accept stacked weights: with ``x (G, B, I)`` and
``w (G, I, O)`` they run G independent affine maps in one call.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DataError


def _batched(x: np.ndarray) -> tuple[np.ndarray, bool]:
    """Promote (C, L) to (1, C, L); report whether a batch axis was added."""
    if x.ndim == 2:
        return x[None], True
    if x.ndim == 3:
        return x, False
    raise DataError(f"expected (C, L) or (B, C, L) input, got shape {x.shape}")


def conv1d_forward(x, kernels, bias=None, stride: int = 1, padding: str = "valid"):
    """1-D cross-correlation over the last axis.

    ``x``: (C, L) or (B, C, L); ``kernels``: (O, C, K); ``padding``:
    "valid", or "same" (zero-padded, stride 1 only).
    """
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    xb, squeeze = _batched(x)
    if kernels.ndim != 3:
        raise DataError(f"kernels must be (out_ch, in_ch, k), got shape {kernels.shape}")
    out_ch, in_ch, k = kernels.shape
    if in_ch != xb.shape[1]:
        raise DataError(f"kernel expects {in_ch} input channels, input has {xb.shape[1]}")
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")

    if padding == "same":
        if stride != 1:
            raise DataError("'same' padding is only defined for stride 1")
        left = (k - 1) // 2
        xp = np.pad(xb, ((0, 0), (0, 0), (left, k - 1 - left)))
    elif padding == "valid":
        left = 0
        xp = xb
    else:
        raise DataError(f"unknown padding mode {padding!r}")
    if k > xp.shape[2]:
        raise DataError(f"kernel size {k} exceeds (padded) length {xp.shape[2]}")

    windows = sliding_window_view(xp, k, axis=2)[:, :, ::stride]  # (B, C, Lo, K) view
    b, _, lo, _ = windows.shape
    cols = windows.transpose(0, 2, 1, 3).reshape(b, lo, in_ch * k)
    y = cols @ kernels.reshape(out_ch, in_ch * k).T  # (B, Lo, O)
    y = y.transpose(0, 2, 1)
    if bias is not None:
        y = y + np.asarray(bias, dtype=np.float64)[:, None]
    cache = (xp, kernels, stride, left, xb.shape[2], squeeze, bias is not None)
    return (y[0] if squeeze else y), cache


def conv1d_backward(dout, cache):
    """Gradients of conv1d: returns (dx, dkernels, dbias)."""
    xp, kernels, stride, left, length, squeeze, has_bias = cache
    out_ch, in_ch, k = kernels.shape
    dout = np.asarray(dout, dtype=np.float64)
    if squeeze:
        dout = dout[None]
    b, _, lo = dout.shape

    windows = sliding_window_view(xp, k, axis=2)[:, :, ::stride]
    cols = windows.transpose(0, 2, 1, 3).reshape(b * lo, in_ch * k)
    dflat = dout.transpose(0, 2, 1).reshape(b * lo, out_ch)

    dkernels = (dflat.T @ cols).reshape(out_ch, in_ch, k)
    dbias = dout.sum(axis=(0, 2)) if has_bias else None

    dcols = (dflat @ kernels.reshape(out_ch, in_ch * k)).reshape(b, lo, in_ch, k)
    dcols = dcols.transpose(0, 2, 1, 3)  # (B, C, Lo, K)
    dxp = np.zeros_like(xp)
    for t in range(k):
        dxp[:, :, t : t + (lo - 1) * stride + 1 : stride] += dcols[:, :, :, t]
    dx = dxp[:, :, left : left + length]
    return (dx[0] if squeeze else dx), dkernels, dbias


def maxpool1d_forward(x, size: int, stride: int | None = None):
    """Max pooling over the last axis; ties go to the first index."""
    x = np.asarray(x, dtype=np.float64)
    xb, squeeze = _batched(x)
    stride = size if stride is None else stride
    if size < 1 or stride < 1:
        raise DataError(f"pool size/stride must be >= 1, got {size}/{stride}")
    if size > xb.shape[2]:
        raise DataError(f"pool size {size} exceeds length {xb.shape[2]}")
    windows = sliding_window_view(xb, size, axis=2)[:, :, ::stride]  # (B, C, Lo, S)
    idx = windows.argmax(axis=3)  # first max wins
    y = np.take_along_axis(windows, idx[..., None], axis=3)[..., 0]
    cache = (idx, xb.shape, size, stride, squeeze)
    return (y[0] if squeeze else y), cache


def maxpool1d_backward(dout, cache):
    """Routes each upstream gradient to its argmax input position."""
    idx, shape, size, stride, squeeze = cache
    dout = np.asarray(dout, dtype=np.float64)
    if squeeze:
        dout = dout[None]
    b, c, lo = dout.shape
    dx = np.zeros(shape)
    positions = idx + np.arange(lo) * stride  # (B, C, Lo) absolute indices
    flat_rows = np.repeat(np.arange(b * c), lo)
    flat_cols = positions.reshape(-1)
    if stride >= size:
        # windows are disjoint: no two outputs share an input position
        dx.reshape(b * c, -1)[flat_rows, flat_cols] = dout.reshape(-1)
    else:
        np.add.at(dx.reshape(b * c, -1), (flat_rows, flat_cols), dout.reshape(-1))
    return dx[0] if squeeze else dx


def dense_forward(x, w, b=None):
    """Affine map over the last axis; supports stacked weights."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape[-1] != w.shape[-2]:
        raise DataError(f"dense shape mismatch: input {x.shape} vs weights {w.shape}")
    y = np.matmul(x, w)
    if b is not None:
        y = y + np.expand_dims(np.asarray(b, dtype=np.float64), -2)
    return y, (x, w, b is not None)


def dense_backward(dout, cache):
    """Gradients of dense: returns (dx, dw, db)."""
    x, w, has_bias = cache
    dout = np.asarray(dout, dtype=np.float64)
    dx = np.matmul(dout, np.swapaxes(w, -1, -2))
    dw = np.matmul(np.swapaxes(x, -1, -2), dout)
    db = dout.sum(axis=-2) if has_bias else None
    return dx, dw, db


def relu_forward(x):
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0), (x > 0.0)


def relu_backward(dout, cache):
    return np.asarray(dout, dtype=np.float64) * cache


def sigmoid_forward(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out, out


def sigmoid_backward(dout, cache):
    return np.asarray(dout, dtype=np.float64) * cache * (1.0 - cache)


def dropout_forward(x, rate: float, rng: np.random.Generator, train: bool = True):
    """Inverted dropout: train-time mask / keep-prob, identity at inference."""
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 <= rate < 1.0:
        raise DataError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dout, cache):
    dout = np.asarray(dout, dtype=np.float64)
    return dout if cache is None else dout * cache


def bce_with_logits(logits, targets):
    """Mean binary cross-entropy from logits; returns (loss, dlogits)."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if z.shape != y.shape:
        raise DataError(f"logits shape {z.shape} != targets shape {y.shape}")
    loss = float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))
    p, _ = sigmoid_forward(z)
    return loss, (p - y) / z.size


def binary_cross_entropy(probs, targets, eps: float = 1e-12) -> float:
    """Mean binary cross-entropy on probabilities (reporting only)."""
    p = np.clip(np.asarray(probs, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(targets, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
