"""Minimal EDF (European Data Format) reader/writer.

Covers the classic EDF subset used for fixtures: a 256-byte fixed header,
256 bytes of per-signal header fields per signal, and data records of
16-bit little-endian two's-complement samples. Digital values map to
physical units through the per-signal linear range fields.

Seizure annotations live in a sibling JSON manifest
(``{"file": ..., "seizures": [{"onset": ..., "duration": ...}]}``), not in
EDF+ annotation signals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import DataError, EdfError
from .recording import Annotation, Recording

HEADER_FIXED_BYTES = 256
HEADER_PER_SIGNAL_BYTES = 256

# (name, bytes) in file order; per-signal fields are stored field-major,
# i.e. all labels, then all transducers, and so on.
_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dim", 8),
    ("phys_min", 8),
    ("phys_max", 8),
    ("dig_min", 8),
    ("dig_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)


@dataclass
class EdfHeader:
    """Parsed EDF header; per-signal lists all have length ``n_signals``."""

    version: str
    patient_id: str
    recording_id: str
    start_datetime: datetime
    header_bytes: int
    n_records: int
    record_duration: float
    n_signals: int
    labels: list[str] = field(default_factory=list)
    transducers: list[str] = field(default_factory=list)
    physical_dims: list[str] = field(default_factory=list)
    phys_min: list[float] = field(default_factory=list)
    phys_max: list[float] = field(default_factory=list)
    dig_min: list[int] = field(default_factory=list)
    dig_max: list[int] = field(default_factory=list)
    prefiltering: list[str] = field(default_factory=list)
    samples_per_record: list[int] = field(default_factory=list)

    @property
    def duration(self) -> float:
        """Total recorded time in seconds."""
        return self.n_records * self.record_duration


def _ascii(data: bytes, offset: int, size: int) -> str:
    if offset + size > len(data):
        raise EdfError(f"truncated file: need {offset + size} bytes, have {len(data)}", offset)
    return data[offset : offset + size].decode("ascii", errors="replace").strip()


def _int_field(data: bytes, offset: int, size: int, name: str) -> int:
    text = _ascii(data, offset, size)
    try:
        return int(text)
    except ValueError:
        raise EdfError(f"non-numeric {name} field {text!r}", offset) from None


def _float_field(data: bytes, offset: int, size: int, name: str) -> float:
    text = _ascii(data, offset, size)
    try:
        return float(text)
    except ValueError:
        raise EdfError(f"non-numeric {name} field {text!r}", offset) from None


def _parse_start(date_text: str, time_text: str, offset: int) -> datetime:
    try:
        day, month, yy = (int(p) for p in date_text.split("."))
        hour, minute, second = (int(p) for p in time_text.split("."))
    except ValueError:
        raise EdfError(f"malformed start date/time {date_text!r} {time_text!r}", offset) from None
    year = 1900 + yy if yy >= 85 else 2000 + yy
    return datetime(year, month, day, hour, minute, second)


def parse_edf_header(data: bytes) -> EdfHeader:
    """Parse the header region, validating layout invariants."""
    if len(data) < HEADER_FIXED_BYTES:
        raise EdfError(f"truncated file: {len(data)} bytes is shorter than the fixed header", len(data))

    version = _ascii(data, 0, 8)
    patient_id = _ascii(data, 8, 80)
    recording_id = _ascii(data, 88, 80)
    start = _parse_start(_ascii(data, 168, 8), _ascii(data, 176, 8), 168)
    header_bytes = _int_field(data, 184, 8, "header_bytes")
    n_records = _int_field(data, 236, 8, "n_records")
    record_duration = _float_field(data, 244, 8, "record_duration")
    n_signals = _int_field(data, 252, 4, "n_signals")

    if n_signals <= 0:
        raise EdfError(f"n_signals must be positive, got {n_signals}", 252)
    expected_header = HEADER_FIXED_BYTES + HEADER_PER_SIGNAL_BYTES * n_signals
    if header_bytes != expected_header:
        raise EdfError(
            f"header_bytes={header_bytes} but 256*(n_signals+1)={expected_header}", 184
        )
    if len(data) < expected_header:
        raise EdfError(f"truncated file: header needs {expected_header} bytes", len(data))

    header = EdfHeader(
        version=version,
        patient_id=patient_id,
        recording_id=recording_id,
        start_datetime=start,
        header_bytes=header_bytes,
        n_records=n_records,
        record_duration=record_duration,
        n_signals=n_signals,
    )

    offset = HEADER_FIXED_BYTES
    raw: dict[str, list] = {}
    for name, size in _SIGNAL_FIELDS:
        values = []
        for k in range(n_signals):
            if name in ("phys_min", "phys_max"):
                values.append(_float_field(data, offset, size, f"{name}[{k}]"))
            elif name in ("dig_min", "dig_max", "samples_per_record"):
                values.append(_int_field(data, offset, size, f"{name}[{k}]"))
            else:
                values.append(_ascii(data, offset, size))
            offset += size
        raw[name] = values

    header.labels = raw["label"]
    header.transducers = raw["transducer"]
    header.physical_dims = raw["physical_dim"]
    header.phys_min = raw["phys_min"]
    header.phys_max = raw["phys_max"]
    header.dig_min = raw["dig_min"]
    header.dig_max = raw["dig_max"]
    header.prefiltering = raw["prefiltering"]
    header.samples_per_record = raw["samples_per_record"]

    for k in range(n_signals):
        if header.dig_min[k] >= header.dig_max[k]:
            # offset of this signal's dig_min field
            base = HEADER_FIXED_BYTES + n_signals * (16 + 80 + 8 + 8 + 8)
            raise EdfError(
                f"signal {k} ({header.labels[k]!r}): dig_min {header.dig_min[k]} >= "
                f"dig_max {header.dig_max[k]}",
                base + 8 * k,
            )
        if header.phys_min[k] == header.phys_max[k]:
            base = HEADER_FIXED_BYTES + n_signals * (16 + 80 + 8)
            raise EdfError(f"signal {k}: phys_min equals phys_max", base + 8 * k)
        if header.samples_per_record[k] <= 0:
            raise EdfError(f"signal {k}: samples_per_record must be positive", 0)
    return header


def parse_edf(data: bytes) -> Recording:
    """Decode an EDF byte string into a physical-unit :class:`Recording`.

    All signals must share one sampling rate (equal ``samples_per_record``);
    annotations are left empty, see :func:`read_recording` for manifest
    attachment.
    """
    header = parse_edf_header(data)
    ns = header.n_signals
    spr = header.samples_per_record
    if len(set(spr)) != 1:
        raise DataError(f"signals have differing samples_per_record {sorted(set(spr))}")
    if header.record_duration <= 0:
        raise EdfError(f"record_duration must be positive, got {header.record_duration}", 244)
    sample_rate = spr[0] / header.record_duration

    record_values = ns * spr[0]
    expected = header.header_bytes + 2 * record_values * header.n_records
    if len(data) < expected:
        raise EdfError(
            f"truncated data: expected {expected} bytes for {header.n_records} records", len(data)
        )

    flat = np.frombuffer(
        data, dtype="<i2", count=record_values * header.n_records, offset=header.header_bytes
    )
    # records are interleaved: (record, signal, sample)
    digital = flat.reshape(header.n_records, ns, spr[0]).transpose(1, 0, 2).reshape(ns, -1)

    dig_min = np.array(header.dig_min, dtype=np.float64)[:, None]
    dig_max = np.array(header.dig_max, dtype=np.float64)[:, None]
    phys_min = np.array(header.phys_min, dtype=np.float64)[:, None]
    phys_max = np.array(header.phys_max, dtype=np.float64)[:, None]
    samples = (digital - dig_min) * (phys_max - phys_min) / (dig_max - dig_min) + phys_min

    return Recording(
        channel_labels=list(header.labels),
        sample_rate=sample_rate,
        samples=samples,
    )


def format_float_field(value: float) -> str:
    """Shortest ASCII rendering of ``value`` that fits an 8-char EDF field."""
    for precision in range(7, 0, -1):
        text = f"{value:.{precision}g}"
        if len(text) <= 8:
            return text
    raise DataError(f"cannot format {value} into 8 ASCII characters")


def _canonical_range(lo: float, hi: float) -> tuple[float, float]:
    """Widen (lo, hi) to values exactly representable in 8-char fields."""
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    lo_c = hi_c = None
    for eps in (0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1):
        if lo_c is None:
            cand = float(format_float_field(lo - span * eps))
            if cand <= lo:
                lo_c = cand
        if hi_c is None:
            cand = float(format_float_field(hi + span * eps))
            if cand >= hi:
                hi_c = cand
        if lo_c is not None and hi_c is not None:
            return lo_c, hi_c
    raise DataError(f"cannot canonicalize physical range [{lo}, {hi}]")


def _pad(text: str, size: int, offset: int) -> bytes:
    raw = text.encode("ascii")
    if len(raw) > size:
        raise EdfError(f"field {text!r} exceeds {size} ASCII bytes", offset)
    return raw.ljust(size)


def write_edf(recording: Recording, header_overrides: dict | None = None) -> bytes:
    """Encode a :class:`Recording` as EDF bytes.

    The physical range of each signal defaults to the canonicalized data
    range and the digital range to the full 16-bit span; both may be
    overridden (scalar or per-signal sequence) through ``header_overrides``,
    along with the identification/date text fields. Raises
    :class:`DataError` when a sample falls outside its declared physical
    range or the signal length is not a whole number of records.
    """
    ov = dict(header_overrides or {})
    ns = recording.n_channels
    record_duration = float(ov.pop("record_duration", 1.0))
    spr_f = recording.sample_rate * record_duration
    spr = int(round(spr_f))
    if abs(spr_f - spr) > 1e-9 or spr <= 0:
        raise DataError(
            f"sample_rate {recording.sample_rate} x record_duration {record_duration} "
            "is not a whole number of samples"
        )
    if recording.n_samples % spr != 0:
        raise DataError(
            f"{recording.n_samples} samples is not a whole number of {spr}-sample records"
        )
    n_records = recording.n_samples // spr

    def per_signal(key, default):
        value = ov.pop(key, default)
        if isinstance(value, (list, tuple, np.ndarray)):
            if len(value) != ns:
                raise DataError(f"override {key} has length {len(value)}, expected {ns}")
            return list(value)
        return [value] * ns

    dig_min = [int(v) for v in per_signal("dig_min", -32768)]
    dig_max = [int(v) for v in per_signal("dig_max", 32767)]
    phys_min_ov = ov.pop("phys_min", None)
    phys_max_ov = ov.pop("phys_max", None)

    phys_min, phys_max = [], []
    for k in range(ns):
        if phys_min_ov is None or phys_max_ov is None:
            lo, hi = _canonical_range(
                float(recording.samples[k].min()) if recording.n_samples else -1.0,
                float(recording.samples[k].max()) if recording.n_samples else 1.0,
            )
        else:
            lo = float(phys_min_ov[k] if isinstance(phys_min_ov, (list, tuple)) else phys_min_ov)
            hi = float(phys_max_ov[k] if isinstance(phys_max_ov, (list, tuple)) else phys_max_ov)
        # store exactly what the 8-char ASCII field will say
        lo, hi = float(format_float_field(lo)), float(format_float_field(hi))
        if lo == hi:
            raise DataError(f"signal {k}: physical range is degenerate")
        phys_min.append(lo)
        phys_max.append(hi)

    start: datetime = ov.pop("start_datetime", datetime(2000, 1, 1, 0, 0, 0))
    version = str(ov.pop("version", "0"))
    patient_id = str(ov.pop("patient_id", "X"))
    recording_id = str(ov.pop("recording_id", "X"))
    transducers = [str(v) for v in per_signal("transducer", "")]
    physical_dims = [str(v) for v in per_signal("physical_dim", "uV")]
    prefiltering = [str(v) for v in per_signal("prefiltering", "")]
    if ov:
        raise DataError(f"unknown header overrides: {sorted(ov)}")

    header_bytes = HEADER_FIXED_BYTES + HEADER_PER_SIGNAL_BYTES * ns
    out = bytearray()
    out += _pad(version, 8, 0)
    out += _pad(patient_id, 80, 8)
    out += _pad(recording_id, 80, 88)
    out += _pad(start.strftime("%d.%m.%y"), 8, 168)
    out += _pad(start.strftime("%H.%M.%S"), 8, 176)
    out += _pad(str(header_bytes), 8, 184)
    out += _pad("", 44, 192)
    out += _pad(str(n_records), 8, 236)
    out += _pad(format_float_field(record_duration), 8, 244)
    out += _pad(str(ns), 4, 252)

    columns = {
        "label": recording.channel_labels,
        "transducer": transducers,
        "physical_dim": physical_dims,
        "phys_min": [format_float_field(v) for v in phys_min],
        "phys_max": [format_float_field(v) for v in phys_max],
        "dig_min": [str(v) for v in dig_min],
        "dig_max": [str(v) for v in dig_max],
        "prefiltering": prefiltering,
        "samples_per_record": [str(spr)] * ns,
        "reserved": [""] * ns,
    }
    for name, size in _SIGNAL_FIELDS:
        for k in range(ns):
            out += _pad(str(columns[name][k]), size, len(out))

    # digital conversion, record-interleaved
    lo = np.array(phys_min)[:, None]
    hi = np.array(phys_max)[:, None]
    dlo = np.array(dig_min, dtype=np.float64)[:, None]
    dhi = np.array(dig_max, dtype=np.float64)[:, None]
    if recording.n_samples:
        if np.any(recording.samples < lo) or np.any(recording.samples > hi):
            bad = np.argwhere((recording.samples < lo) | (recording.samples > hi))[0]
            raise DataError(
                f"sample outside physical range: channel {bad[0]} sample {bad[1]} "
                f"value {recording.samples[bad[0], bad[1]]}"
            )
        digital = np.rint((recording.samples - lo) * (dhi - dlo) / (hi - lo) + dlo)
        digital = np.clip(digital, dlo, dhi).astype("<i2")
        out += digital.reshape(ns, n_records, spr).transpose(1, 0, 2).tobytes()
    return bytes(out)


def save_manifest(path: str | Path, edf_filename: str, annotations: list[Annotation]) -> None:
    """Write the sibling JSON annotation manifest."""
    payload = {
        "file": edf_filename,
        "seizures": [{"onset": a.onset, "duration": a.duration} for a in annotations],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_manifest(path: str | Path) -> list[Annotation]:
    """Read seizure annotations from a manifest file."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    try:
        return [
            Annotation(onset=float(s["onset"]), duration=float(s["duration"]))
            for s in payload["seizures"]
        ]
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from exc


def manifest_path_for(edf_path: str | Path) -> Path:
    return Path(edf_path).with_suffix(".json")


def read_recording(edf_path: str | Path, manifest_path: str | Path | None = None) -> Recording:
    """Parse an EDF file and attach annotations from its manifest, if any."""
    path = Path(edf_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    recording = parse_edf(data)
    manifest = Path(manifest_path) if manifest_path else manifest_path_for(path)
    if manifest.exists():
        annotations = load_manifest(manifest)
        if not math.isinf(recording.duration):
            for a in annotations:
                if a.onset < 0 or a.end > recording.duration + 1e-9:
                    raise DataError(
                        f"manifest {manifest}: seizure [{a.onset}, {a.end}) outside recording"
                    )
        recording.annotations = annotations
    return recording


def write_recording(
    edf_path: str | Path, recording: Recording, header_overrides: dict | None = None
) -> None:
    """Write an EDF file plus its annotation manifest."""
    path = Path(edf_path)
    path.write_bytes(write_edf(recording, header_overrides))
    save_manifest(manifest_path_for(path), path.name, recording.annotations)
