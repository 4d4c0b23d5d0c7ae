"""Cycle-deterministic behavioural model of the entrainment chip logic.

State machine: CHAOTIC (a 16-bit maximal-length LFSR feeds an 8-bit chaotic
byte and a threshold comparator) until an external trigger pulse, or the
comparator itself when auto-trigger is enabled, switches it to ENTRAINED,
where a clock divider toggles the rhythm output every half period. Reset
returns to CHAOTIC from the seed.

Inputs are registered: an input asserted at cycle c is visible in the state
at cycle c+1, as in synchronous hardware.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dsp import PulseTrain
from .errors import MeasurementError

__all__ = [
    "RESET",
    "CHAOTIC",
    "ENTRAINED",
    "ChipConfig",
    "ChipState",
    "ChipTrace",
    "half_period",
    "quantized_output_hz",
    "initial_state",
    "tick",
    "run_trace",
    "measure_output_frequency",
    "chip_to_pulse_train",
    "trace_to_csv",
    "trace_to_change_dump",
]

RESET = "RESET"
CHAOTIC = "CHAOTIC"
ENTRAINED = "ENTRAINED"

# Fibonacci LFSR, taps at bits 16,15,13,4 (left-shift form). Maximal:
# period 65535 from any nonzero seed, never reaches zero.
_LFSR_TAP_MASK = 0xD008


def _lfsr_next(state: int) -> int:
    fb = (state & _LFSR_TAP_MASK).bit_count() & 1
    return ((state << 1) | fb) & 0xFFFF


@dataclass(frozen=True)
class ChipConfig:
    clock_hz: float = 9600.0
    target_hz: float = 6.0
    threshold: int = 0b01111111  # 127
    lfsr_seed: int = 0xACE1
    auto_trigger: bool = False

    def __post_init__(self):
        if self.clock_hz < 4 * self.target_hz:
            raise ValueError(
                f"clock {self.clock_hz} Hz must be at least 4x target "
                f"{self.target_hz} Hz"
            )
        if not (0 < self.threshold < 256):
            raise ValueError(f"threshold must be an 8-bit value in 1..255, got {self.threshold}")
        if not (0 < self.lfsr_seed <= 0xFFFF):
            raise ValueError(f"lfsr_seed must be a nonzero 16-bit value, got {self.lfsr_seed}")


@dataclass(frozen=True)
class ChipState:
    mode: str = CHAOTIC
    lfsr: int = 0xACE1
    chaotic_signal: int = 0
    detect_pulse: int = 0
    normal_signal: int = 0
    divider_count: int = 0
    cycle: int = 0


def half_period(config: ChipConfig) -> int:
    """Divider count between output toggles: round(clock / (2*target)), >= 1."""
    return max(1, round(config.clock_hz / (2.0 * config.target_hz)))


def quantized_output_hz(config: ChipConfig) -> float:
    """Actual rhythm frequency after divider rounding."""
    return config.clock_hz / (2.0 * half_period(config))


def initial_state(config: ChipConfig) -> ChipState:
    """Post-power-on state: chaotic mode presenting the un-advanced seed."""
    byte = config.lfsr_seed & 0xFF
    return ChipState(
        mode=CHAOTIC,
        lfsr=config.lfsr_seed,
        chaotic_signal=byte,
        detect_pulse=int(byte > config.threshold),
        normal_signal=0,
        divider_count=0,
        cycle=0,
    )


def tick(
    state: ChipState,
    config: ChipConfig,
    reset: int = 0,
    trigger_pulse: int = 0,
) -> ChipState:
    """Advance the machine one clock cycle."""
    cycle = state.cycle + 1
    if reset:
        return ChipState(
            mode=RESET,
            lfsr=config.lfsr_seed,
            chaotic_signal=0,
            detect_pulse=0,
            normal_signal=0,
            divider_count=0,
            cycle=cycle,
        )

    if state.mode == ENTRAINED:
        count = state.divider_count + 1
        normal = state.normal_signal
        if count >= half_period(config):
            normal ^= 1
            count = 0
        return replace(
            state,
            chaotic_signal=0,
            detect_pulse=0,
            normal_signal=normal,
            divider_count=count,
            cycle=cycle,
        )

    # RESET releases into a chaotic cycle presenting the seed; a running
    # chaotic cycle advances the register first.
    lfsr = state.lfsr if state.mode == RESET else _lfsr_next(state.lfsr)
    byte = lfsr & 0xFF
    detect = int(byte > config.threshold)
    if trigger_pulse or (config.auto_trigger and detect):
        # Entry edge: the rhythm output is set high and the chaotic byte and
        # detect pulse are cleared, consumed by the transition.
        return ChipState(
            mode=ENTRAINED,
            lfsr=lfsr,
            chaotic_signal=0,
            detect_pulse=0,
            normal_signal=1,
            divider_count=0,
            cycle=cycle,
        )
    return ChipState(
        mode=CHAOTIC,
        lfsr=lfsr,
        chaotic_signal=byte,
        detect_pulse=detect,
        normal_signal=0,
        divider_count=0,
        cycle=cycle,
    )


@dataclass(frozen=True)
class ChipTrace:
    """Column-oriented per-cycle record of a run."""

    config: ChipConfig
    cycles: np.ndarray
    mode: list
    chaotic_signal: np.ndarray
    detect_pulse: np.ndarray
    normal_signal: np.ndarray

    def __len__(self):
        return len(self.cycles)

    @property
    def times_s(self) -> np.ndarray:
        return self.cycles / self.config.clock_hz


def run_trace(
    config: ChipConfig,
    n_cycles: int,
    trigger_at: int | None = None,
    reset_at: int | None = None,
) -> ChipTrace:
    """Deterministic trace of n_cycles rows from repeated tick().

    Row 0 is the power-on state; an input scheduled at cycle c is sampled by
    the tick producing row c+1. trigger_at asserts trigger_pulse for exactly
    one cycle.
    """
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    for name, at in (("trigger_at", trigger_at), ("reset_at", reset_at)):
        if at is not None and not (0 <= at < n_cycles):
            raise ValueError(f"{name}={at} outside the traced range 0..{n_cycles - 1}")

    state = initial_state(config)
    modes = [state.mode]
    chaotic = np.empty(n_cycles, dtype=np.int64)
    detect = np.empty(n_cycles, dtype=np.uint8)
    normal = np.empty(n_cycles, dtype=np.uint8)
    chaotic[0] = state.chaotic_signal
    detect[0] = state.detect_pulse
    normal[0] = state.normal_signal
    for k in range(1, n_cycles):
        state = tick(
            state,
            config,
            reset=int(reset_at == k - 1),
            trigger_pulse=int(trigger_at == k - 1),
        )
        modes.append(state.mode)
        chaotic[k] = state.chaotic_signal
        detect[k] = state.detect_pulse
        normal[k] = state.normal_signal
    return ChipTrace(
        config=config,
        cycles=np.arange(n_cycles, dtype=np.int64),
        mode=modes,
        chaotic_signal=chaotic,
        detect_pulse=detect,
        normal_signal=normal,
    )


def _rising_edges(bits: np.ndarray) -> np.ndarray:
    return np.flatnonzero((bits[1:] == 1) & (bits[:-1] == 0)) + 1


def measure_output_frequency(trace: ChipTrace, config: ChipConfig | None = None) -> float:
    """Rhythm frequency from rising edges of normal_signal."""
    config = config or trace.config
    edges = _rising_edges(trace.normal_signal)
    if len(edges) < 2:
        raise MeasurementError(
            f"need at least 2 rising edges to measure frequency, found {len(edges)}"
        )
    span_s = (edges[-1] - edges[0]) / config.clock_hz
    return (len(edges) - 1) / span_s


def chip_to_pulse_train(trace: ChipTrace, sample_rate: float) -> PulseTrain:
    """normal_signal sampled at uniform instants (nearest cycle)."""
    clock = trace.config.clock_hz
    if sample_rate > clock:
        raise ValueError(
            f"sample_rate {sample_rate} Hz exceeds the chip clock {clock} Hz"
        )
    n_out = int(round(len(trace) * sample_rate / clock))
    k = np.arange(n_out)
    idx = np.minimum(np.rint(k * clock / sample_rate).astype(int), len(trace) - 1)
    return PulseTrain(bits=trace.normal_signal[idx], sample_rate=sample_rate)


def trace_to_csv(trace: ChipTrace, path) -> Path:
    """Full per-cycle dump: cycle, time_s, mode, chaotic_signal, detect_pulse, normal_signal."""
    path = Path(path)
    times = trace.times_s
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cycle", "time_s", "mode", "chaotic_signal", "detect_pulse", "normal_signal"])
        for i in range(len(trace)):
            w.writerow(
                [
                    int(trace.cycles[i]),
                    repr(float(times[i])),
                    trace.mode[i],
                    int(trace.chaotic_signal[i]),
                    int(trace.detect_pulse[i]),
                    int(trace.normal_signal[i]),
                ]
            )
    return path


def trace_to_change_dump(trace: ChipTrace, path=None):
    """Compact change log: (cycle, signal, new_value) rows, initial values at cycle 0.

    Returns the row list; also writes CSV when a path is given.
    """
    signals = {
        "mode": trace.mode,
        "chaotic_signal": trace.chaotic_signal,
        "detect_pulse": trace.detect_pulse,
        "normal_signal": trace.normal_signal,
    }
    rows = []
    for name, column in signals.items():
        rows.append((0, name, column[0]))
        for i in range(1, len(trace)):
            if column[i] != column[i - 1]:
                rows.append((int(trace.cycles[i]), name, column[i]))
    rows.sort(key=lambda r: (r[0], r[1]))
    if path is not None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cycle", "signal", "new_value"])
            for cycle, name, value in rows:
                w.writerow([cycle, name, value])
    return rows
