"""Labeled synthetic multichannel EEG.

Background is per-channel noise; during seizure intervals every channel
additionally receives one shared band-limited oscillation (per-channel
gain), which raises both inter-channel dependence and amplitude. Channel
amplitudes are O(1) by default because the detector consumes raw,
unnormalized signals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edf import write_recording
from .errors import ConfigError
from .preprocess import block_label_array
from .recording import Annotation, Recording


@dataclass
class SynthConfig:
    n_channels: int = 4
    duration: float = 120.0
    seizure_intervals: list[tuple[float, float]] = field(default_factory=list)
    shared_gain: float = 1.0
    seizure_band: tuple[float, float] = (2.0, 5.0)
    noise_sigma: float = 1.0
    seed: int = 0
    sample_rate: int = 256
    pink_noise: bool = False
    n_components: int = 3

    def __post_init__(self):
        if self.n_channels < 1:
            raise ConfigError(f"n_channels must be >= 1, got {self.n_channels}")
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.shared_gain < 0:
            raise ConfigError(f"shared_gain must be >= 0, got {self.shared_gain}")
        if self.noise_sigma <= 0:
            raise ConfigError(f"noise_sigma must be positive, got {self.noise_sigma}")
        if not 0 < self.seizure_band[0] < self.seizure_band[1]:
            raise ConfigError(f"bad seizure band {self.seizure_band}")
        spans = sorted((float(o), float(o) + float(d)) for o, d in self.seizure_intervals)
        for (lo, hi) in spans:
            if lo < 0 or hi > self.duration:
                raise ConfigError(f"seizure [{lo}, {hi}) outside recording [0, {self.duration})")
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ConfigError("seizure intervals overlap")


def _pink(rng: np.random.Generator, shape: tuple[int, int], fs: float) -> np.ndarray:
    white = rng.standard_normal(shape)
    spectrum = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(shape[1], d=1.0 / fs)
    spectrum /= np.sqrt(np.maximum(freqs, 1.0))
    out = np.fft.irfft(spectrum, n=shape[1], axis=1)
    return out / out.std()


def synthesize_recording(config: SynthConfig) -> tuple[Recording, np.ndarray]:
    """Generate a recording plus its ground-truth block labels.

    Labels follow the segmenter's rule (>= 50% overlap, blocks starting at
    t = 4 s), so they match ``segment_blocks`` on the returned recording.
    Deterministic for a fixed config.
    """
    rng = np.random.default_rng(config.seed)
    fs = config.sample_rate
    n = int(round(config.duration * fs))
    if config.pink_noise:
        samples = config.noise_sigma * _pink(rng, (config.n_channels, n), fs)
    else:
        samples = config.noise_sigma * rng.standard_normal((config.n_channels, n))

    lo_f, hi_f = config.seizure_band
    for onset, dur in config.seizure_intervals:
        i0, i1 = int(round(onset * fs)), int(round((onset + dur) * fs))
        t = np.arange(i1 - i0) / fs
        wave = np.zeros(i1 - i0)
        for _ in range(config.n_components):
            f = rng.uniform(lo_f, hi_f)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wave += np.sin(2.0 * np.pi * f * t + phase)
        rms = np.sqrt(np.mean(wave**2))
        if rms > 0:
            wave /= rms
        gains = rng.uniform(0.5, 1.5, size=config.n_channels)
        samples[:, i0:i1] += config.shared_gain * gains[:, None] * wave

    annotations = [Annotation(float(o), float(d)) for o, d in config.seizure_intervals]
    recording = Recording(
        channel_labels=[f"CH{k + 1}" for k in range(config.n_channels)],
        sample_rate=float(fs),
        samples=samples,
        annotations=annotations,
    )
    first = 4
    last = int(np.floor(recording.duration)) - 1
    starts = np.arange(first, last + 1, dtype=np.float64)
    labels = block_label_array(annotations, starts)
    return recording, labels


@dataclass
class DatasetSpec:
    """Layout of a multi-patient synthetic dataset."""

    n_patients: int = 8
    files_per_patient: int = 2
    file_durations: tuple[float, ...] = (112.0, 96.0)
    n_channels: int = 4
    sample_rate: int = 256
    shared_gain: float = 1.2
    noise_sigma: float = 1.0
    seed: int = 7


def make_synthetic_dataset(out_dir: str | Path, spec: DatasetSpec | None = None) -> dict:
    """Write a dataset of EDF files + manifests and its catalog.json.

    Each file carries one seizure of 8-12 s at a patient/file-specific
    position. Returns the catalog mapping.
    """
    spec = spec or DatasetSpec()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    patients: dict[str, list[dict]] = {}
    for p in range(spec.n_patients):
        pid = f"p{p + 1:02d}"
        entries = []
        for f in range(spec.files_per_patient):
            duration = float(spec.file_durations[f % len(spec.file_durations)])
            rng = np.random.default_rng(np.random.SeedSequence([spec.seed, p, f]))
            seiz_dur = float(rng.uniform(8.0, 12.0))
            onset = float(rng.uniform(30.0, duration - 30.0 - seiz_dur))
            config = SynthConfig(
                n_channels=spec.n_channels,
                duration=duration,
                seizure_intervals=[(onset, seiz_dur)],
                shared_gain=spec.shared_gain,
                noise_sigma=spec.noise_sigma,
                sample_rate=spec.sample_rate,
                seed=int(rng.integers(0, 2**31 - 1)),
            )
            recording, _ = synthesize_recording(config)
            name = f"{pid}_f{f + 1}.edf"
            write_recording(out / name, recording, {"patient_id": pid, "recording_id": name})
            entries.append({"file": name, "duration": duration})
        patients[pid] = entries
    catalog = {
        "patients": patients,
        "n_channels": spec.n_channels,
        "sample_rate": spec.sample_rate,
        "seed": spec.seed,
    }
    (out / "catalog.json").write_text(json.dumps(catalog, indent=2) + "\n")
    return catalog


__all__ = ["SynthConfig", "DatasetSpec", "synthesize_recording", "make_synthetic_dataset"]
