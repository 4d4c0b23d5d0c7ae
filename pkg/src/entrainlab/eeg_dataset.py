"""Labeled EEG segment dataset: loading, class extraction, averaging, entropy.

The expected file is a comma-separated table with 178 numeric sample columns
followed by an integer class label (1..5). An optional header row and an
optional leading row-id column (non-numeric text under a header, as in the
public chunked seizure dataset) are auto-detected.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import Waveform
from .errors import ParseError

__all__ = [
    "SEGMENT_LENGTH",
    "SEGMENT_RATE_HZ",
    "EegSegment",
    "DatasetSummary",
    "load_dataset",
    "extract_class",
    "average_waveform",
    "shannon_entropy",
    "summarize",
]

SEGMENT_LENGTH = 178
# Each chunked segment covers 1 s of recording (178 points), so segment-level
# math runs at 178 Hz even though the upstream continuous rate differs.
SEGMENT_RATE_HZ = 178.0

VALID_LABELS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class EegSegment:
    """One 178-sample EEG window (microvolts) with its class label."""

    samples: np.ndarray
    label: int
    subject_chunk_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != (SEGMENT_LENGTH,):
            raise ValueError(
                f"segment must hold exactly {SEGMENT_LENGTH} samples, "
                f"got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("segment samples must be finite")
        if self.label not in VALID_LABELS:
            raise ValueError(f"label must be in 1..5, got {self.label}")
        object.__setattr__(self, "samples", samples)

    def as_waveform(self) -> Waveform:
        return Waveform(samples=self.samples, sample_rate=SEGMENT_RATE_HZ)


@dataclass(frozen=True)
class DatasetSummary:
    counts: dict
    total_rows: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_rows:
            raise ValueError("per-label counts must sum to total_rows")


def _is_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_dataset(path) -> list[EegSegment]:
    """Parse the CSV at `path` into one EegSegment per data row, file order."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ParseError(f"{path}: empty file")

    has_header = any(not _is_numeric(field) for field in rows[0] if field != "")
    names = rows[0] if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise ParseError(f"{path}: no data rows")

    # A leading non-numeric column under a header is a row id, not a sample.
    id_offset = 1 if has_header and not _is_numeric(data_rows[0][0]) else 0
    expected = SEGMENT_LENGTH + 1 + id_offset

    for i, row in enumerate(data_rows):
        if len(row) != expected:
            row_no = i + (2 if has_header else 1)
            raise ParseError(
                f"{path}: row {row_no} has {len(row)} fields, expected {expected} "
                f"({SEGMENT_LENGTH} samples + label"
                + (" + row id)" if id_offset else ")")
            )

    ids = (
        [row[0] for row in data_rows]
        if id_offset
        else [str(i) for i in range(len(data_rows))]
    )
    try:
        values = np.array([row[id_offset:] for row in data_rows], dtype=float)
    except ValueError:
        # Slow path only to locate the offending cell for the error message.
        for i, row in enumerate(data_rows):
            for j, cell in enumerate(row[id_offset:]):
                if not _is_numeric(cell):
                    row_no = i + (2 if has_header else 1)
                    raise ParseError(
                        f"{path}: non-numeric value {cell!r} at row {row_no}, "
                        f"column {j + 1 + id_offset}"
                    ) from None
        raise

    labels = values[:, -1]
    if not np.all(labels == np.round(labels)):
        bad = int(np.argmax(labels != np.round(labels)))
        raise ValueError(f"{path}: non-integer label {labels[bad]} at data row {bad + 1}")
    labels = labels.astype(int)
    bad_mask = ~np.isin(labels, VALID_LABELS)
    if np.any(bad_mask):
        bad = int(np.argmax(bad_mask))
        raise ValueError(f"{path}: label {labels[bad]} out of range 1..5 at data row {bad + 1}")

    _ = names  # header names are not needed beyond detection
    return [
        EegSegment(samples=values[i, :-1], label=int(labels[i]), subject_chunk_id=ids[i])
        for i in range(len(data_rows))
    ]


def summarize(segments) -> DatasetSummary:
    counts: dict = {}
    for seg in segments:
        counts[seg.label] = counts.get(seg.label, 0) + 1
    return DatasetSummary(counts=counts, total_rows=len(segments))


def extract_class(segments, label: int) -> list[EegSegment]:
    """Order-preserving filter on the class label."""
    if label not in VALID_LABELS:
        raise ValueError(f"label must be in 1..5, got {label}")
    return [seg for seg in segments if seg.label == label]


def average_waveform(segments) -> Waveform:
    """Pointwise mean across segments (exact compensated column sums)."""
    segments = list(segments)
    if not segments:
        raise ValueError("cannot average zero segments")
    lengths = {len(seg.samples) for seg in segments}
    if len(lengths) != 1:
        raise ValueError(f"segments have mismatched lengths: {sorted(lengths)}")
    data = np.stack([seg.samples for seg in segments])
    m = len(segments)
    # fsum per column: exact accumulation, so segment order cannot matter.
    mean = np.array([math.fsum(data[:, j]) / m for j in range(data.shape[1])])
    return Waveform(samples=mean, sample_rate=SEGMENT_RATE_HZ)


def shannon_entropy(segment: EegSegment, n_bins: int = 32) -> float:
    """Entropy (nats) of the normalized amplitude histogram of one segment.

    Bins are n_bins uniform intervals spanning the segment's own min..max;
    a constant segment occupies a single bin and scores 0.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    samples = segment.samples
    lo, hi = float(samples.min()), float(samples.max())
    if lo == hi:
        return 0.0
    counts, _ = np.histogram(samples, bins=n_bins, range=(lo, hi))
    p = counts[counts > 0] / len(samples)
    return float(-np.sum(p * np.log(p)))
