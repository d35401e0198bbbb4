"""Adam with bias correction and a reduce-on-plateau learning-rate rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError


@dataclass
class AdamState:
    """Per-parameter first/second-moment accumulators."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], **kwargs) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            **kwargs,
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> None:
    """One bias-corrected Adam update, in place."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}")
        if g.shape != params[name].shape:
            raise NumericError(
                f"gradient shape {g.shape} != parameter shape {params[name].shape} for {name!r}"
            )
    state.t += 1
    b1c = 1.0 - state.beta1**state.t
    b2c = 1.0 - state.beta2**state.t
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        params[name] -= lr * (m / b1c) / (np.sqrt(v / b2c) + state.eps)


@dataclass
class LrSchedule:
    """Reduce-on-plateau: multiply by ``factor`` after ``patience`` epochs
    without improvement, never below ``floor``."""

    initial: float = 1e-4
    factor: float = 0.5
    floor: float = 1e-5
    patience: int = 5

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise NumericError(f"factor must be in (0, 1), got {self.factor}")
        if self.floor > self.initial:
            raise NumericError(f"floor {self.floor} exceeds initial {self.initial}")


def lr_schedule_step(schedule: LrSchedule, loss_history) -> float:
    """Learning rate after the given epoch-loss history.

    The first epoch is the baseline; every epoch that fails to strictly
    improve on the best seen loss counts toward the patience window.
    """
    history = list(loss_history)
    if not history:
        raise NumericError("loss history is empty")
    lr = schedule.initial
    best = history[0]
    wait = 0
    for loss in history:
        if loss < best:
            best = loss
            wait = 0
        else:
            wait += 1
            if wait >= schedule.patience:
                lr = max(lr * schedule.factor, schedule.floor)
                wait = 0
    return lr
