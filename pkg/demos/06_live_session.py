"""Operator session, scripted: drive the telemetry loop deterministically,
exercise trigger/frequency/reset commands, and write the replayable log that
ships in demos/data/. For the real-time version run:

    entrainlab serve --source chaotic_emulator --port 8765

and open http://127.0.0.1:8765/ (after building frontend/) or speak the JSON
wire protocol on ws://127.0.0.1:8765/ws.

Run:
    python demos/06_live_session.py
"""

from pathlib import Path

from entrainlab.session import (
    SessionCommand,
    SessionConfig,
    SourceSpec,
    replay_log_records,
    run_scripted,
)

HERE = Path(__file__).parent


def main():
    log_path = HERE / "data" / "example_session.jsonl"
    log_path.parent.mkdir(exist_ok=True)
    config = SessionConfig(
        source=SourceSpec(kind="chaotic_emulator"),
        telemetry_hz=30.0,
        log_path=str(log_path),
    )
    schedule = {
        10: [SessionCommand(kind="trigger", command_id="op-trigger-1")],
        60: [SessionCommand(kind="set_frequency", command_id="op-freq-8", value=8.0)],
        110: [SessionCommand(kind="set_frequency", command_id="op-freq-55", value=55.0)],
        120: [SessionCommand(kind="reset", command_id="op-reset-1")],
    }
    frames, acks, engine = run_scripted(config, 150, schedule)

    print(f"{len(frames)} frames over {frames[-1].t_sim:.2f} sim-seconds")
    for ack in acks:
        verdict = "ok" if ack.ok else f"rejected ({ack.err})"
        print(f"  command {ack.command_id}: {verdict}")
    modes = [f.mode for f in frames]
    print(f"mode path: CHAOTIC x{modes.index('ENTRAINED')} -> ENTRAINED ... -> {modes[-1]}")
    events = [(f.seq, e[0]) for f in frames for e in f.events]
    print(f"events: {events}")

    replayed = replay_log_records(engine.records, SessionConfig(source=SourceSpec()))
    identical = [(f.t_sim, f.mode, f.output_bit) for f in frames] == [
        (f.t_sim, f.mode, f.output_bit) for f in replayed
    ]
    print(f"log replay reproduces the session: {identical}")
    print(f"log written to {log_path}")


if __name__ == "__main__":
    main()
