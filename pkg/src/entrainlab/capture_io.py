"""Logic-analyzer CSV ingestion and pulse timing measurement.

Two common export styles are supported and yield identical edge lists:

dense samples (one row per sample instant)::

    Time [s],Channel 4
    0.000000,0
    0.000125,0
    0.000250,1
    ...

transitions only (a row whenever some channel changes, plus first/last row)::

    Time [s],Channel 4
    0.0,0
    0.0833333,1
    0.1666666,0
    ...
    2.0,0

The time column is any header containing "time" (case-insensitive); every
other column is a digital channel holding 0/1. "Channel N" headers keep
their number N as the channel index, other names are numbered by position.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chip_emulator import ChipTrace
from .dsp import PulseTrain
from .errors import MeasurementError, ParseError

__all__ = [
    "ChannelEdges",
    "DigitalCapture",
    "PulseStats",
    "parse_capture_csv",
    "channel_to_pulse_train",
    "pulse_stats",
    "write_dense_capture_csv",
    "write_transition_capture_csv",
    "capture_csv_from_trace",
]


@dataclass(frozen=True)
class ChannelEdges:
    """Level history of one digital channel: start level plus change points."""

    initial_level: int
    times: np.ndarray   # strictly ascending edge instants, seconds
    levels: np.ndarray  # level after each edge; alternates

    def level_at(self, t: float) -> int:
        idx = int(np.searchsorted(self.times, t, side="right"))
        return self.initial_level if idx == 0 else int(self.levels[idx - 1])


@dataclass(frozen=True)
class DigitalCapture:
    channels: dict
    start_time: float
    end_time: float

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    def channel(self, index: int) -> ChannelEdges:
        if index not in self.channels:
            raise ValueError(
                f"channel {index} not in capture (available: {sorted(self.channels)})"
            )
        return self.channels[index]


@dataclass(frozen=True)
class PulseStats:
    mean_frequency: float
    period_jitter_rms: float
    duty_cycle: float
    edge_count: int

    def __post_init__(self):
        if not (0.0 <= self.duty_cycle <= 1.0):
            raise ValueError(f"duty cycle {self.duty_cycle} outside [0, 1]")
        if self.edge_count < 0:
            raise ValueError("edge_count must be non-negative")


_CHANNEL_RE = re.compile(r"channel\s*(\d+)", re.IGNORECASE)


def _parse_bit(raw: str, path, row_no: int, col: str) -> int:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(
            f"{path}: non-binary value {raw!r} in column {col!r} at row {row_no}"
        ) from None
    if value not in (0.0, 1.0):
        raise ParseError(
            f"{path}: non-binary value {raw!r} in column {col!r} at row {row_no}"
        )
    return int(value)


def parse_capture_csv(path) -> DigitalCapture:
    """Read a dense or transition-style logic export into edge lists."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        rows = [row for row in reader if row]

    time_cols = [i for i, name in enumerate(header) if "time" in name.lower()]
    if not time_cols:
        raise ParseError(f"{path}: no time column in header {header}")
    time_col = time_cols[0]
    channel_cols = [i for i in range(len(header)) if i != time_col]
    if not channel_cols:
        raise ParseError(f"{path}: no channel columns, only time")
    if not rows:
        raise ParseError(f"{path}: no data rows")

    numbers = {}
    for pos, i in enumerate(channel_cols):
        m = _CHANNEL_RE.search(header[i])
        numbers[i] = int(m.group(1)) if m else pos
    if len(set(numbers.values())) != len(numbers):
        raise ParseError(f"{path}: duplicate channel numbers in header {header}")

    times = np.empty(len(rows))
    bits = {i: np.empty(len(rows), dtype=np.uint8) for i in channel_cols}
    for r, row in enumerate(rows):
        row_no = r + 2
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}"
            )
        try:
            times[r] = float(row[time_col])
        except ValueError:
            raise ParseError(
                f"{path}: bad time value {row[time_col]!r} at row {row_no}"
            ) from None
        for i in channel_cols:
            bits[i][r] = _parse_bit(row[i], path, row_no, header[i])
    if np.any(np.diff(times) <= 0):
        bad = int(np.argmax(np.diff(times) <= 0)) + 1
        raise ParseError(
            f"{path}: time not strictly ascending at row {bad + 2} "
            f"({times[bad - 1]!r} -> {times[bad]!r})"
        )

    channels = {}
    for i in channel_cols:
        column = bits[i]
        change = np.flatnonzero(column[1:] != column[:-1]) + 1
        channels[numbers[i]] = ChannelEdges(
            initial_level=int(column[0]),
            times=times[change],
            levels=column[change].astype(np.uint8),
        )
    return DigitalCapture(
        channels=channels, start_time=float(times[0]), end_time=float(times[-1])
    )


def channel_to_pulse_train(
    capture: DigitalCapture, channel: int, sample_rate: float
) -> PulseTrain:
    """Zero-order-hold resampling of one channel onto a uniform grid.

    A sample landing exactly on an edge takes the post-edge level.
    """
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    ch = capture.channel(channel)
    span = capture.end_time - capture.start_time
    # Both endpoints are sampled: a capture whose rows span (n-1)/rate seconds
    # resamples at the same rate back to exactly n samples.
    n = max(1, int(round(span * sample_rate)) + 1)
    t = capture.start_time + np.arange(n) / sample_rate
    idx = np.searchsorted(ch.times, t, side="right")
    levels = np.concatenate(([ch.initial_level], ch.levels))
    return PulseTrain(bits=levels[idx], sample_rate=sample_rate)


def pulse_stats(capture: DigitalCapture, channel: int) -> PulseStats:
    """Frequency, period jitter and duty of one channel from its edges."""
    ch = capture.channel(channel)
    rising = ch.times[ch.levels == 1]
    if len(rising) < 3:
        raise MeasurementError(
            f"need at least 3 rising edges for pulse stats, found {len(rising)}"
        )
    periods = np.diff(rising)
    mean_period = float(periods.mean())
    jitter = float(np.sqrt(np.mean((periods - mean_period) ** 2)))
    mean_frequency = (len(rising) - 1) / float(rising[-1] - rising[0])

    # duty over the whole periods between first and last rising edge
    high_time = 0.0
    level = 1
    t_prev = rising[0]
    inside = (ch.times > rising[0]) & (ch.times <= rising[-1])
    for t_edge, lv in zip(ch.times[inside], ch.levels[inside]):
        if level == 1:
            high_time += t_edge - t_prev
        t_prev = t_edge
        level = int(lv)
    duty = high_time / float(rising[-1] - rising[0])

    return PulseStats(
        mean_frequency=mean_frequency,
        period_jitter_rms=jitter,
        duty_cycle=duty,
        edge_count=len(ch.times),
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_dense_capture_csv(path, times, channels: dict) -> Path:
    """Write a dense export: one row per instant, all channel levels."""
    path = Path(path)
    names = {num: f"Channel {num}" for num in sorted(channels)}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Time [s]", *names.values()])
        for r, t in enumerate(times):
            w.writerow([_fmt(t), *(int(channels[num][r]) for num in sorted(channels))])
    return path


def write_transition_capture_csv(path, times, channels: dict) -> Path:
    """Write a transitions-only export of the same sampled data.

    Keeps the first and last rows so the capture span is preserved.
    """
    path = Path(path)
    times = np.asarray(times, float)
    keep = np.zeros(len(times), dtype=bool)
    keep[0] = keep[-1] = True
    for column in channels.values():
        column = np.asarray(column)
        keep[1:] |= column[1:] != column[:-1]
    names = {num: f"Channel {num}" for num in sorted(channels)}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Time [s]", *names.values()])
        for r in np.flatnonzero(keep):
            w.writerow(
                [_fmt(times[r]), *(int(channels[num][r]) for num in sorted(channels))]
            )
    return path


def capture_csv_from_trace(
    trace: ChipTrace, path, channel: int = 4, style: str = "transitions"
) -> Path:
    """Re-encode a chip trace's rhythm output as an analyzer capture file."""
    times = trace.times_s
    channels = {channel: trace.normal_signal}
    if style == "dense":
        return write_dense_capture_csv(path, times, channels)
    if style == "transitions":
        return write_transition_capture_csv(path, times, channels)
    raise ValueError(f"unknown capture style {style!r} (use 'dense' or 'transitions')")


def stats_to_json_dict(stats: PulseStats) -> dict:
    return {
        "mean_frequency_hz": stats.mean_frequency,
        "period_jitter_rms_s": stats.period_jitter_rms,
        "duty_cycle": stats.duty_cycle,
        "edge_count": stats.edge_count,
    }
