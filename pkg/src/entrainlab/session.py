"""Live entrainment session: a single authoritative simulation loop that
streams telemetry frames to subscribers and applies operator commands.

The deterministic core (`SessionEngine`) is synchronous: commands are queued,
`process_commands()` applies them in arrival order, `tick()` advances the
simulation by one telemetry interval and broadcasts one frame. `LiveSession`
adds the wall-clock-paced thread used by the network service; scripted runs
and the replay path drive the engine directly, which is what makes sessions
reproducible modulo pacing.

Wire protocol (JSON):

    frame  {"type":"frame","seq":u64,"t_sim":f64,"mode":"CHAOTIC"|"ENTRAINED"|"RESET",
            "raw":f64,"out":0|1,"recon":f64,"events":[{"ev":str,"t_sim":f64}]}
    cmd    {"type":"cmd","id":str,"kind":"trigger"|"reset"|"set_frequency"|"pause"|"resume",
            "value":f64?}
    ack    {"type":"ack","id":str,"ok":bool,"applied_at_seq":u64?,"err":str?}

plus {"type":"start"|"stop"} session-log records and a {"type":"close","reason":str}
terminal message on subscriber streams.
"""

from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import signal as sps

from . import chip_emulator as chip
from .eeg_dataset import EegSegment, SEGMENT_RATE_HZ

__all__ = [
    "SourceSpec",
    "SessionConfig",
    "SessionCommand",
    "CommandAck",
    "TelemetryFrame",
    "SessionError",
    "Subscription",
    "SessionEngine",
    "LiveSession",
    "start_session",
    "handle_command",
    "subscribe",
    "export_session_log",
    "run_scripted",
    "replay_log_records",
    "frame_to_wire",
    "ack_to_wire",
    "command_from_wire",
]

FREQ_MIN_HZ = 1.0
FREQ_MAX_HZ = 40.0
DEFAULT_BUFFER_FRAMES = 256
COMMAND_KINDS = ("trigger", "reset", "set_frequency", "pause", "resume")


class SessionError(RuntimeError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    """What the session streams as its raw signal."""

    kind: str = "chaotic_emulator"  # or "dataset_replay" / "noise"
    seed: int = 0
    segment: Optional[EegSegment] = None
    replay_rate_hz: float = SEGMENT_RATE_HZ

    def __post_init__(self):
        if self.kind not in ("chaotic_emulator", "dataset_replay", "noise"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "dataset_replay" and self.segment is None:
            raise ValueError("dataset_replay source needs a segment")


@dataclass(frozen=True)
class SessionConfig:
    source: SourceSpec = field(default_factory=SourceSpec)
    chip: chip.ChipConfig = field(default_factory=chip.ChipConfig)
    telemetry_hz: float = 30.0
    time_scale: float = 1.0
    log_path: Optional[str] = None

    def __post_init__(self):
        if not (1.0 <= self.telemetry_hz <= 240.0):
            raise ValueError(f"telemetry_hz must be in [1, 240], got {self.telemetry_hz}")
        if self.time_scale <= 0:
            raise ValueError(f"time_scale must be positive, got {self.time_scale}")

    @property
    def dt_sim(self) -> float:
        return self.time_scale / self.telemetry_hz


@dataclass(frozen=True)
class SessionCommand:
    kind: str
    command_id: str
    value: Optional[float] = None
    client_id: str = ""


@dataclass(frozen=True)
class CommandAck:
    command_id: str
    ok: bool
    applied_at_seq: Optional[int] = None
    err: Optional[str] = None


@dataclass(frozen=True)
class TelemetryFrame:
    seq: int
    t_sim: float
    mode: str
    raw_value: float
    output_bit: int
    reconstructed_value: float
    events: tuple = ()


def frame_to_wire(frame: TelemetryFrame) -> dict:
    return {
        "type": "frame",
        "seq": frame.seq,
        "t_sim": frame.t_sim,
        "mode": frame.mode,
        "raw": frame.raw_value,
        "out": int(frame.output_bit),
        "recon": frame.reconstructed_value,
        "events": [{"ev": ev, "t_sim": t} for ev, t in frame.events],
    }


def ack_to_wire(ack: CommandAck) -> dict:
    out = {"type": "ack", "id": ack.command_id, "ok": ack.ok}
    if ack.applied_at_seq is not None:
        out["applied_at_seq"] = ack.applied_at_seq
    if ack.err is not None:
        out["err"] = ack.err
    return out


def command_from_wire(msg: dict) -> SessionCommand:
    if msg.get("type") != "cmd":
        raise ValueError(f"not a command message: {msg.get('type')!r}")
    if "id" not in msg or "kind" not in msg:
        raise ValueError("command message needs 'id' and 'kind'")
    value = msg.get("value")
    return SessionCommand(
        kind=str(msg["kind"]),
        command_id=str(msg["id"]),
        value=None if value is None else float(value),
        client_id=str(msg.get("client_id", "")),
    )


class Subscription:
    """Bounded frame buffer for one subscriber; overflow closes the stream."""

    def __init__(self, capacity: int = DEFAULT_BUFFER_FRAMES):
        self.capacity = capacity
        self._frames: deque = deque()
        self._cond = threading.Condition()
        self.close_reason: Optional[str] = None

    def _push(self, frame: TelemetryFrame):
        with self._cond:
            if self.close_reason is not None:
                return
            if len(self._frames) >= self.capacity:
                self.close_reason = "overflow"
            else:
                self._frames.append(frame)
            self._cond.notify_all()

    def _close(self, reason: str):
        with self._cond:
            if self.close_reason is None:
                self.close_reason = reason
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self.close_reason is not None and not self._frames

    def get(self, timeout: Optional[float] = None) -> Optional[TelemetryFrame]:
        """Next frame, or None once the stream has closed and drained."""
        with self._cond:
            ok = self._cond.wait_for(
                lambda: self._frames or self.close_reason is not None, timeout
            )
            if not ok:
                raise TimeoutError("no frame within timeout")
            if self._frames:
                return self._frames.popleft()
            return None

    def __iter__(self):
        while True:
            frame = self.get()
            if frame is None:
                return
            yield frame


class SessionEngine:
    """Deterministic session core. One owner advances it; subscribers only read."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self._lock = threading.RLock()
        self._chip_config = config.chip
        self._state = chip.initial_state(config.chip)
        self._seq = 0
        self._cycles_done = 0
        self._paused = False
        self._stopped = False
        self._pending: deque = deque()
        self._pending_events: list = []
        self._input_trigger = False
        self._input_reset = False
        self._subs: list[Subscription] = []
        self._noise_rng = np.random.default_rng(config.source.seed)
        # causal reconstruction filter (live streams cannot be zero-phase)
        cutoff = min(10.0, 0.4 * config.telemetry_hz)
        self._recon_sos = sps.butter(
            2, cutoff / (config.telemetry_hz / 2), btype="low", output="sos"
        )
        self._recon_zi = sps.sosfilt_zi(self._recon_sos) * 0.0
        self._records: Optional[list] = [] if config.log_path is not None else None
        self._log_fh = None
        if config.log_path is not None:
            try:
                self._log_fh = open(config.log_path, "w", buffering=1)
            except OSError as exc:
                raise SessionError(f"cannot open log path {config.log_path}: {exc}") from exc
            self._record({"type": "start", "telemetry_hz": config.telemetry_hz,
                          "time_scale": config.time_scale,
                          "source": config.source.kind,
                          "seed": config.source.seed,
                          "clock_hz": config.chip.clock_hz,
                          "target_hz": config.chip.target_hz,
                          "auto_trigger": config.chip.auto_trigger})

    # -- logging ----------------------------------------------------------

    def _record(self, obj: dict):
        if self._records is not None:
            self._records.append(obj)
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(obj) + "\n")

    # -- commands ----------------------------------------------------------

    def queue_command(self, cmd: SessionCommand, done: Optional[threading.Event] = None):
        with self._lock:
            if self._stopped:
                raise SessionError("session is stopped")
            self._pending.append((cmd, done, [None]))
            self._record({"type": "cmd", "id": cmd.command_id, "kind": cmd.kind,
                          "value": cmd.value})
            return self._pending[-1][2]

    def process_commands(self) -> list[CommandAck]:
        """Apply every queued command, in arrival order."""
        acks = []
        with self._lock:
            while self._pending:
                cmd, done, slot = self._pending.popleft()
                ack = self._apply(cmd)
                slot[0] = ack
                self._record(ack_to_wire(ack))
                acks.append(ack)
                if done is not None:
                    done.set()
        return acks

    def _apply(self, cmd: SessionCommand) -> CommandAck:
        seq = self._seq  # the next frame to be emitted reflects the effect
        if cmd.kind == "trigger":
            self._input_trigger = True
            self._pending_events.append(("trigger_applied", seq * self.config.dt_sim))
        elif cmd.kind == "reset":
            self._input_reset = True
            self._pending_events.append(("reset", seq * self.config.dt_sim))
        elif cmd.kind == "set_frequency":
            if cmd.value is None or not (FREQ_MIN_HZ <= cmd.value <= FREQ_MAX_HZ):
                return CommandAck(
                    command_id=cmd.command_id,
                    ok=False,
                    err=f"frequency must be in [{FREQ_MIN_HZ}, {FREQ_MAX_HZ}] Hz",
                )
            self._chip_config = replace(self._chip_config, target_hz=float(cmd.value))
            # divider counter restarts so it stays below the new half period
            self._state = replace(self._state, divider_count=0)
            self._pending_events.append(("frequency_changed", seq * self.config.dt_sim))
        elif cmd.kind == "pause":
            self._paused = True
        elif cmd.kind == "resume":
            self._paused = False
        else:
            return CommandAck(
                command_id=cmd.command_id, ok=False, err=f"unknown command kind {cmd.kind!r}"
            )
        return CommandAck(command_id=cmd.command_id, ok=True, applied_at_seq=seq)

    # -- simulation --------------------------------------------------------

    @property
    def paused(self) -> bool:
        with self._lock:
            return self._paused

    @property
    def seq(self) -> int:
        with self._lock:
            return self._seq

    def _advance_chip(self, target_cycles: int, t_frame: float) -> list:
        events = []
        auto_fired = False
        while self._cycles_done < target_cycles:
            before = self._state.mode
            self._state = chip.tick(
                self._state,
                self._chip_config,
                reset=int(self._input_reset),
                trigger_pulse=int(self._input_trigger),
            )
            self._input_reset = False
            self._input_trigger = False
            self._cycles_done += 1
            if (
                self._chip_config.auto_trigger
                and before == chip.CHAOTIC
                and self._state.mode == chip.ENTRAINED
                and not auto_fired
            ):
                events.append(("threshold_detect", t_frame))
                auto_fired = True
        return events

    def _raw_value(self, t_sim: float) -> float:
        src = self.config.source
        if src.kind == "chaotic_emulator":
            return self._state.chaotic_signal / 127.5 - 1.0
        if src.kind == "dataset_replay":
            samples = src.segment.samples
            # guard the floor against float residue (k/r * r landing at k-eps)
            idx = int(t_sim * src.replay_rate_hz + 1e-6) % len(samples)
            return float(samples[idx])
        return float(self._noise_rng.uniform(-1.0, 1.0))

    def tick(self) -> TelemetryFrame:
        """Advance one telemetry interval and broadcast the resulting frame."""
        with self._lock:
            if self._stopped:
                raise SessionError("session is stopped")
            seq = self._seq
            t_sim = seq * self.config.dt_sim
            target = int(round(t_sim * self._chip_config.clock_hz))
            events = list(self._pending_events)
            self._pending_events.clear()
            events += self._advance_chip(target, t_sim)

            raw = self._raw_value(t_sim)
            out_bit = int(self._state.normal_signal)
            level = 2.0 * out_bit - 1.0
            recon_arr, self._recon_zi = sps.sosfilt(
                self._recon_sos, np.array([level]), zi=self._recon_zi
            )
            frame = TelemetryFrame(
                seq=seq,
                t_sim=t_sim,
                mode=self._state.mode,
                raw_value=float(raw),
                output_bit=out_bit,
                reconstructed_value=float(recon_arr[0]),
                events=tuple(events),
            )
            self._seq += 1
            self._record(frame_to_wire(frame))
            for sub in list(self._subs):
                sub._push(frame)
                if sub.close_reason == "overflow":
                    self._subs.remove(sub)
            return frame

    def subscribe(self, capacity: int = DEFAULT_BUFFER_FRAMES) -> Subscription:
        with self._lock:
            if self._stopped:
                raise SessionError("session is stopped")
            sub = Subscription(capacity=capacity)
            self._subs.append(sub)
            return sub

    def stop(self, reason: str = "stopped"):
        with self._lock:
            if self._stopped:
                return
            self._stopped = True
            try:
                self._record({"type": "stop"})
            except OSError:
                pass  # log device already gone; subscribers still get closed
            for sub in self._subs:
                sub._close(reason)
            self._subs.clear()
            if self._log_fh is not None:
                self._log_fh.close()
                self._log_fh = None

    @property
    def stopped(self) -> bool:
        with self._lock:
            return self._stopped

    @property
    def records(self) -> list:
        if self._records is None:
            raise SessionError("session was not configured with a log path")
        return list(self._records)


class LiveSession:
    """Wall-clock-paced wrapper around the engine, for the network service."""

    def __init__(self, config: SessionConfig):
        self.engine = SessionEngine(config)
        self._stop_evt = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> "LiveSession":
        self._thread.start()
        return self

    def _run(self):
        period = 1.0 / self.engine.config.telemetry_hz
        deadline = time.monotonic()
        while not self._stop_evt.is_set():
            try:
                self.engine.process_commands()
                if not self.engine.paused:
                    self.engine.tick()
            except OSError as exc:  # e.g. the session log device failed
                self.engine.stop(reason=f"error: {exc}")
                return
            deadline += period
            now = time.monotonic()
            if deadline < now:  # fell behind; drop the backlog, keep cadence
                deadline = now
            else:
                time.sleep(deadline - now)
        self.engine.process_commands()
        self.engine.stop()

    def handle_command(self, cmd: SessionCommand, timeout: Optional[float] = None) -> CommandAck:
        done = threading.Event()
        slot = self.engine.queue_command(cmd, done)
        if timeout is None:
            timeout = max(1.0, 3.0 / self.engine.config.telemetry_hz)
        if not done.wait(timeout):
            raise SessionError(f"command {cmd.command_id} not applied within {timeout}s")
        return slot[0]

    def subscribe(self, capacity: int = DEFAULT_BUFFER_FRAMES) -> Subscription:
        return self.engine.subscribe(capacity=capacity)

    def stop(self):
        self._stop_evt.set()
        self._thread.join(timeout=5.0)


def start_session(config: SessionConfig) -> LiveSession:
    """Spin up the paced simulation loop. Caller must stop() it."""
    return LiveSession(config).start()


def handle_command(session: LiveSession, cmd: SessionCommand) -> CommandAck:
    return session.handle_command(cmd)


def subscribe(session: LiveSession) -> Subscription:
    return session.subscribe()


def export_session_log(session, path) -> Path:
    """Write the session's JSON-lines event log to `path`."""
    engine = session.engine if isinstance(session, LiveSession) else session
    records = engine.records  # raises if logging was not configured
    path = Path(path)
    with open(path, "w") as fh:
        for obj in records:
            fh.write(json.dumps(obj) + "\n")
    return path


def run_scripted(
    config: SessionConfig,
    n_ticks: int,
    schedule: Optional[dict] = None,
) -> tuple[list[TelemetryFrame], list[CommandAck], SessionEngine]:
    """Drive an engine without wall pacing: commands keyed by frame seq.

    Commands scheduled at seq k are queued just before the tick that emits
    frame k, matching their applied_at_seq in a live run.
    """
    schedule = dict(schedule or {})
    engine = SessionEngine(config)
    frames: list[TelemetryFrame] = []
    acks: list[CommandAck] = []
    while len(frames) < n_ticks:
        seq = engine.seq
        for cmd in schedule.pop(seq, []):
            engine.queue_command(cmd)
        acks += engine.process_commands()
        if engine.paused:
            # seq is frozen while paused, so a resume must share this seq key
            # (replayed logs do); otherwise nothing further can happen.
            break
        frames.append(engine.tick())
    engine.stop()
    return frames, acks, engine


def replay_log_records(records: list, config: SessionConfig):
    """Re-run the command schedule extracted from a session log.

    Returns the replayed frames; with the same config and source seed the
    t_sim/mode/output columns are bit-identical to the original.
    """
    schedule: dict = {}
    pending_cmd = None
    n_frames = 0
    for obj in records:
        if obj.get("type") == "cmd":
            pending_cmd = obj
        elif obj.get("type") == "ack" and pending_cmd is not None:
            if obj.get("ok") and "applied_at_seq" in obj:
                cmd = SessionCommand(
                    kind=pending_cmd["kind"],
                    command_id=pending_cmd["id"],
                    value=pending_cmd.get("value"),
                )
                schedule.setdefault(obj["applied_at_seq"], []).append(cmd)
            pending_cmd = None
        elif obj.get("type") == "frame":
            n_frames += 1
    frames, _, _ = run_scripted(config, n_frames, schedule)
    return frames
