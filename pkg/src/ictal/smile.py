"""Neural mutual-information estimation per channel pair.

A small two-hidden-layer ReLU critic is trained by gradient ascent on a
clipped variational lower bound: the joint term is the critic's mean over
aligned sample pairs, the normalizer its clipped exponential mean over
shuffled (marginal) pairs. Clipping the exponential into
[e^-tau, e^tau] bounds the normalizer and tames estimator variance; the
gradient flows only through the clip's interior.

Many estimation problems (channel pairs x blocks) train simultaneously as
one stacked tensor program: parameters carry a leading problem axis and
every problem owns an independent, seed-derived random stream, so results
do not depend on how problems are grouped into chunks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dependence import pair_order
from .errors import ConfigError, DataError, NumericError
from .nn.functional import dense_backward, dense_forward, relu_backward, relu_forward
from .nn.optim import AdamState, adam_step
from .preprocess import BlockSeries


def clip(v, lower, upper):
    """max(min(v, upper), lower), elementwise."""
    if np.any(lower > upper):
        raise ConfigError(f"clip bounds inverted: lower {lower} > upper {upper}")
    return np.maximum(np.minimum(v, upper), lower)


def smile_objective(t_joint, t_marginal, tau: float) -> float:
    """Clipped variational MI lower bound for given critic outputs (nats)."""
    tj = np.asarray(t_joint, dtype=np.float64)
    tm = np.asarray(t_marginal, dtype=np.float64)
    if tj.size == 0 or tm.size == 0:
        raise DataError("objective needs non-empty joint and marginal critic outputs")
    clipped = np.exp(clip(tm, -tau, tau))
    return float(np.mean(tj) - np.log(np.mean(clipped)))


@dataclass
class SmileConfig:
    """Estimator settings.

    ``steps`` is the number of gradient steps per window; the default is
    sized so the bivariate-Gaussian oracle passes at the default learning
    rate. ``ema_window`` smooths the final estimate over the last steps'
    objectives; estimates are floored at 0.
    """

    tau: float = 0.9
    batch_size: int = 256
    steps: int = 3000
    lr: float = 1e-4
    ema_window: int = 10
    hidden: tuple[int, int] = (64, 64)
    seed: int = 0
    warm_start: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.batch_size < 2 or self.batch_size % 2:
            raise ConfigError(f"batch_size must be even and >= 2, got {self.batch_size}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not 1 <= self.ema_window <= self.steps:
            raise ConfigError(f"ema_window must be in [1, steps], got {self.ema_window}")
        if len(self.hidden) != 2 or min(self.hidden) < 1:
            raise ConfigError(f"hidden must be two positive widths, got {self.hidden}")


def _init_params(rngs: list[np.random.Generator], hidden: tuple[int, int]) -> dict[str, np.ndarray]:
    """He-initialized critic parameters, stacked over problems."""
    h1, h2 = hidden
    params = {k: [] for k in ("w1", "b1", "w2", "b2", "w3", "b3")}
    for rng in rngs:
        params["w1"].append(rng.standard_normal((2, h1)) * np.sqrt(2.0 / 2.0))
        params["b1"].append(np.zeros(h1))
        params["w2"].append(rng.standard_normal((h1, h2)) * np.sqrt(2.0 / h1))
        params["b2"].append(np.zeros(h2))
        params["w3"].append(rng.standard_normal((h2, 1)) * np.sqrt(1.0 / h2))
        params["b3"].append(np.zeros(1))
    return {k: np.stack(v) for k, v in params.items()}


def _critic_forward(params, xy):
    """Stacked critic: (G, B, 2) -> outputs (G, B) plus caches."""
    z1, c1 = dense_forward(xy, params["w1"], params["b1"])
    a1, r1 = relu_forward(z1)
    z2, c2 = dense_forward(a1, params["w2"], params["b2"])
    a2, r2 = relu_forward(z2)
    t, c3 = dense_forward(a2, params["w3"], params["b3"])
    return t[..., 0], (c1, r1, c2, r2, c3)


def _critic_backward(dt, caches):
    c1, r1, c2, r2, c3 = caches
    grads = {}
    da2, grads["w3"], grads["b3"] = dense_backward(dt[..., None], c3)
    dz2 = relu_backward(da2, r2)
    da1, grads["w2"], grads["b2"] = dense_backward(dz2, c2)
    dz1 = relu_backward(da1, r1)
    _, grads["w1"], grads["b1"] = dense_backward(dz1, c1)
    return grads


def _train_stacked(
    xs: np.ndarray,
    ys: np.ndarray,
    lengths: np.ndarray,
    config: SmileConfig,
    seed_seqs: list[np.random.SeedSequence],
    initial_params: dict[str, np.ndarray] | None = None,
    return_params: bool = False,
):
    """Train G independent critics; returns the (G,) MI estimates.

    ``xs``/``ys`` are (G, L_max) arrays padded on the right; ``lengths``
    gives each problem's true window length. Problem g draws all its
    randomness from ``seed_seqs[g]``.
    """
    n_problems, _ = xs.shape
    half = config.batch_size // 2
    rngs = [np.random.default_rng(ss) for ss in seed_seqs]
    params = initial_params if initial_params is not None else _init_params(rngs, config.hidden)
    state = AdamState.for_params(params)
    trace = np.empty((config.steps, n_problems))
    e_lo, e_hi = np.exp(-config.tau), np.exp(config.tau)

    idx = np.empty((n_problems, half), dtype=np.intp)
    perm = np.empty((n_problems, half), dtype=np.intp)
    for step in range(config.steps):
        for g, rng in enumerate(rngs):
            idx[g] = rng.integers(0, lengths[g], half)
            perm[g] = rng.permutation(half)
        xj = np.take_along_axis(xs, idx, axis=1)
        yj = np.take_along_axis(ys, idx, axis=1)
        ym = np.take_along_axis(yj, perm, axis=1)
        batch = np.concatenate(
            [np.stack([xj, yj], axis=-1), np.stack([xj, ym], axis=-1)], axis=1
        )  # (G, 2*half, 2): joint pairs then marginal pairs

        t, caches = _critic_forward(params, batch)
        tj, tm = t[:, :half], t[:, half:]
        clipped = np.exp(clip(tm, -config.tau, config.tau))
        denom = clipped.mean(axis=1)
        objective = tj.mean(axis=1) - np.log(denom)
        if not np.all(np.isfinite(objective)):
            bad = int(np.flatnonzero(~np.isfinite(objective))[0])
            raise NumericError(f"MI objective diverged at step {step} (problem {bad})")
        trace[step] = objective

        # maximize: d(-objective)/dt
        dt = np.empty_like(t)
        dt[:, :half] = -1.0 / half
        interior = (tm > -config.tau) & (tm < config.tau)
        dt[:, half:] = (clipped * interior) / (denom[:, None] * half)
        grads = _critic_backward(dt, caches)
        adam_step(params, grads, state, config.lr)

    estimates = np.maximum(trace[-config.ema_window :].mean(axis=0), 0.0)
    if return_params:
        return estimates, params
    return estimates


def estimate_mi(x, y, config: SmileConfig | None = None) -> float:
    """MI estimate (nats) between two equal-length sample sequences."""
    config = config or SmileConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError(f"need equal-length 1-D sequences, got {x.shape} and {y.shape}")
    if x.size < 8:
        raise DataError(f"window of {x.size} samples is too short to estimate MI")
    seeds = [np.random.SeedSequence([config.seed])]
    return float(_train_stacked(x[None], y[None], np.array([x.size]), config, seeds)[0])


def estimate_mi_batch(xs, ys, config: SmileConfig, seeds: list[int]) -> np.ndarray:
    """Estimate MI for many (x, y) problems in one stacked training run.

    ``xs``/``ys`` are sequences of equal-length-per-problem 1-D arrays;
    ``seeds[g]`` scopes problem g's randomness. Equivalent to (but much
    faster than) calling :func:`estimate_mi` per problem with those seeds.
    """
    if not (len(xs) == len(ys) == len(seeds)):
        raise DataError("xs, ys, and seeds must have equal lengths")
    lengths = np.array([len(x) for x in xs])
    if np.any(lengths < 8):
        raise DataError("every window needs at least 8 samples")
    l_max = int(lengths.max())
    xpad = np.zeros((len(xs), l_max))
    ypad = np.zeros((len(ys), l_max))
    for g, (x, y) in enumerate(zip(xs, ys)):
        if len(x) != len(y):
            raise DataError(f"problem {g}: windows differ in length ({len(x)} vs {len(y)})")
        xpad[g, : lengths[g]] = x
        ypad[g, : lengths[g]] = y
    seed_seqs = [np.random.SeedSequence([s]) for s in seeds]
    return _train_stacked(xpad, ypad, lengths, config, seed_seqs)


def _pair_seed_seq(seed: int, block_key: int, i: int, j: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, block_key, i, j])


def mi_feature_vector(context, config: SmileConfig | None = None, block_key: int = 0) -> np.ndarray:
    """MI estimates for every channel pair of one context window.

    ``context`` is (n_channels, n_samples); the result follows the
    canonical pair order. Deterministic per (seed, block_key, pair).
    """
    config = config or SmileConfig()
    context = np.asarray(context, dtype=np.float64)
    if context.ndim != 2 or context.shape[0] < 2:
        raise DataError(f"context must be (n_channels >= 2, n_samples), got {context.shape}")
    pairs = pair_order(context.shape[0])
    lengths = np.full(len(pairs), context.shape[1])
    xs = np.empty((len(pairs), context.shape[1]))
    ys = np.empty_like(xs)
    for g, (i, j) in enumerate(pairs):
        xs[g] = context[i]
        ys[g] = context[j]
    seed_seqs = [_pair_seed_seq(config.seed, block_key, i, j) for i, j in pairs]
    try:
        return _train_stacked(xs, ys, lengths, config, seed_seqs)
    except NumericError as exc:
        raise NumericError(f"MI features for block {block_key}: {exc}") from exc


def compute_mi_features(
    blocks: BlockSeries,
    config: SmileConfig | None = None,
    chunk_size: int = 128,
) -> np.ndarray:
    """Per-block pairwise MI features, shape (n_blocks, n_pairs).

    Blocks are processed in chunks, each chunk training its (block, pair)
    problems as one stacked run; per-problem seeding keeps the result
    independent of the chunking. With ``config.warm_start``每 blocks run
    sequentially and each pair's critic starts from the previous block's.
    """
    config = config or SmileConfig()
    pairs = pair_order(blocks.n_channels)
    out = np.empty((blocks.n_blocks, len(pairs)))

    if config.warm_start:
        params = None
        for k in range(blocks.n_blocks):
            ctx = blocks.mi_context(k)
            key = int(blocks.block_starts[k])
            xs = np.stack([ctx[i] for i, _ in pairs])
            ys = np.stack([ctx[j] for _, j in pairs])
            seed_seqs = [_pair_seed_seq(config.seed, key, i, j) for i, j in pairs]
            lengths = np.full(len(pairs), ctx.shape[1])
            out[k], params = _train_stacked(
                xs, ys, lengths, config, seed_seqs, initial_params=params, return_params=True
            )
        return out

    for start in range(0, blocks.n_blocks, chunk_size):
        block_ids = range(start, min(start + chunk_size, blocks.n_blocks))
        contexts = [blocks.mi_context(k) for k in block_ids]
        lengths_b = [c.shape[1] for c in contexts]
        l_max = max(lengths_b)
        g = len(contexts) * len(pairs)
        xs = np.zeros((g, l_max))
        ys = np.zeros((g, l_max))
        lengths = np.empty(g, dtype=np.intp)
        seed_seqs = []
        row = 0
        for ctx, k in zip(contexts, block_ids):
            key = int(blocks.block_starts[k])
            for i, j in pairs:
                xs[row, : ctx.shape[1]] = ctx[i]
                ys[row, : ctx.shape[1]] = ctx[j]
                lengths[row] = ctx.shape[1]
                seed_seqs.append(_pair_seed_seq(config.seed, key, i, j))
                row += 1
        estimates = _train_stacked(xs, ys, lengths, config, seed_seqs)
        out[list(block_ids)] = estimates.reshape(len(contexts), len(pairs))
    return out


def smile_config_hash(config: SmileConfig, extra: dict | None = None) -> str:
    """Stable hash of the estimator settings (cache invalidation key)."""
    payload = {
        "tau": config.tau,
        "batch_size": config.batch_size,
        "steps": config.steps,
        "lr": config.lr,
        "ema_window": config.ema_window,
        "hidden": list(config.hidden),
        "warm_start": config.warm_start,
    }
    if extra:
        payload["extra"] = extra
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class MiCache:
    """Binary feature cache: (n_blocks, n_pairs) float64 records plus a
    JSON sidecar carrying the seed and config hash."""

    features: np.ndarray
    seed: int
    config_hash: str
    meta: dict = field(default_factory=dict)


def save_mi_cache(path: str | Path, cache: MiCache) -> None:
    path = Path(path)
    np.ascontiguousarray(cache.features, dtype="<f8").tofile(path)
    sidecar = {
        "seed": cache.seed,
        "config_hash": cache.config_hash,
        "n_blocks": int(cache.features.shape[0]),
        "n_pairs": int(cache.features.shape[1]),
        **cache.meta,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_mi_cache(path: str | Path, expect_hash: str | None = None, expect_seed: int | None = None) -> MiCache | None:
    """Load a cache if present and consistent with the expected key."""
    path = Path(path)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    if not path.exists() or not sidecar_path.exists():
        return None
    try:
        sidecar = json.loads(sidecar_path.read_text())
        features = np.fromfile(path, dtype="<f8").reshape(sidecar["n_blocks"], sidecar["n_pairs"])
    except (OSError, KeyError, ValueError, json.JSONDecodeError):
        return None
    if expect_hash is not None and sidecar.get("config_hash") != expect_hash:
        return None
    if expect_seed is not None and sidecar.get("seed") != expect_seed:
        return None
    meta = {k: v for k, v in sidecar.items() if k not in ("seed", "config_hash", "n_blocks", "n_pairs")}
    return MiCache(features=features, seed=sidecar["seed"], config_hash=sidecar["config_hash"], meta=meta)
