"""Batch entry points: reproduce the analyses as plain CSV/JSON data files
and launch the live session service.

Every flag can be overridden by an environment variable with the HILTS_
prefix (--trigger-at -> HILTS_TRIGGER_AT). Outputs are deterministic for
fixed inputs and seeds; wall time lives only in the run manifest.

Exit codes: 0 success, 1 input/processing error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import capture_io, chip_emulator, dsp, eeg_dataset, oscillator
from .session import SessionConfig, SourceSpec

__all__ = ["main", "run_subcommand"]


def _env(flag: str, default):
    return os.environ.get("HILTS_" + flag.upper().replace("-", "_"), default)


def _env_bool(flag: str) -> bool:
    return str(_env(flag, "")).strip().lower() in ("1", "true", "yes", "on")


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list, rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


class _Manifest:
    def __init__(self, subcommand: str, args: argparse.Namespace, out_dir: Path):
        self.data = {
            "subcommand": subcommand,
            "tool_version": __version__,
            "parameters": {
                k: v for k, v in sorted(vars(args).items()) if k not in ("func",)
            },
            "inputs": [],
            "outputs": [],
        }
        self.out_dir = out_dir
        self.t0 = time.time()

    def add_input(self, path):
        self.data["inputs"].append(str(path))

    def add_output(self, path: Path) -> Path:
        self.data["outputs"].append(str(path))
        return path

    def write(self):
        self.data["wall_time_s"] = time.time() - self.t0
        missing = [p for p in self.data["outputs"] if not Path(p).exists()]
        if missing:
            raise RuntimeError(f"manifest lists missing outputs: {missing}")
        _write_json(self.out_dir / "manifest.json", self.data)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- analyze ----------------------------------------------------------------

def _cmd_analyze(args) -> int:
    out = _out_dir(args)
    manifest = _Manifest("analyze", args, out)
    manifest.add_input(args.input)
    segments = eeg_dataset.load_dataset(args.input)

    band_rows = []
    for label in (1, 2, 3, 4, 5):
        cls = eeg_dataset.extract_class(segments, label)
        if not cls:
            raise ValueError(f"dataset has no class-{label} rows")
        avg = eeg_dataset.average_waveform(cls)
        path = manifest.add_output(out / f"avg_waveform_class{label}.csv")
        _write_csv(
            path,
            ["time_s", "amplitude_uv"],
            ((_fmt(t), _fmt(v)) for t, v in zip(avg.times, avg.samples)),
        )
        report = dsp.band_power_report(avg)
        band_rows.append(
            [label] + [_fmt(report.powers[b]) for b in dsp.BAND_EDGES_HZ]
        )
        if label == 1:
            epath = manifest.add_output(out / "entropy_class1.csv")
            _write_csv(
                epath,
                ["segment", "entropy_nats"],
                (
                    (seg.subject_chunk_id, _fmt(eeg_dataset.shannon_entropy(seg, args.bins)))
                    for seg in cls
                ),
            )
    bpath = manifest.add_output(out / "band_power_by_class.csv")
    _write_csv(bpath, ["class", *dsp.BAND_EDGES_HZ.keys()], band_rows)
    by_class = {
        row[0]: dict(zip(dsp.BAND_EDGES_HZ, map(float, row[1:]))) for row in band_rows
    }
    manifest.add_output(_write_json(out / "band_power_by_class.json", by_class))
    manifest.write()
    return 0


# -- benchmark ----------------------------------------------------------------

def _cmd_benchmark(args) -> int:
    out = _out_dir(args)
    manifest = _Manifest("benchmark", args, out)
    manifest.add_input(args.input)
    segments = eeg_dataset.load_dataset(args.input)
    cls1 = eeg_dataset.extract_class(segments, 1)
    if not cls1:
        raise ValueError("dataset has no class-1 rows")
    avg = eeg_dataset.average_waveform(cls1)

    apath = manifest.add_output(out / "benchmark_analog.csv")
    _write_csv(
        apath,
        ["time_s", "amplitude_uv"],
        ((_fmt(t), _fmt(v)) for t, v in zip(avg.times, avg.samples)),
    )
    digitized = dsp.digitize_mean_threshold(avg)
    dpath = manifest.add_output(out / "benchmark_digitized.csv")
    _write_csv(
        dpath,
        ["time_s", "bit"],
        ((_fmt(t), int(b)) for t, b in zip(avg.times, digitized.bits)),
    )
    spectrum = dsp.power_spectrum(avg)
    spath = manifest.add_output(out / "benchmark_log_spectrum.csv")
    floor = np.finfo(float).tiny
    _write_csv(
        spath,
        ["frequency_hz", "log10_power"],
        (
            (_fmt(f), _fmt(math.log10(max(p, floor))))
            for f, p in zip(spectrum.frequencies, spectrum.power)
        ),
    )
    manifest.write()
    return 0


# -- emulate ----------------------------------------------------------------

def _cmd_emulate(args) -> int:
    out = _out_dir(args)
    manifest = _Manifest("emulate", args, out)
    config = chip_emulator.ChipConfig(
        clock_hz=args.clock,
        target_hz=args.target,
        threshold=args.threshold,
        lfsr_seed=args.seed,
        auto_trigger=args.auto_trigger,
    )
    trace = chip_emulator.run_trace(
        config, args.cycles, trigger_at=args.trigger_at, reset_at=args.reset_at
    )
    manifest.add_output(chip_emulator.trace_to_csv(trace, out / "emulate_trace.csv"))
    manifest.add_output(out / "emulate_changes.csv")
    chip_emulator.trace_to_change_dump(trace, out / "emulate_changes.csv")

    summary = {
        "half_period_cycles": chip_emulator.half_period(config),
        "quantized_output_hz": chip_emulator.quantized_output_hz(config),
    }
    try:
        summary["measured_output_hz"] = chip_emulator.measure_output_frequency(trace)
    except Exception as exc:
        summary["measured_output_hz"] = None
        summary["measurement_note"] = str(exc)
    manifest.add_output(_write_json(out / "emulate_summary.json", summary))
    manifest.write()
    return 0


# -- entrain ----------------------------------------------------------------

def _cmd_entrain(args) -> int:
    out = _out_dir(args)
    manifest = _Manifest("entrain", args, out)
    params = oscillator.OscillatorParams(
        omega0=2 * math.pi * args.natural_hz,
        zeta=args.zeta,
        amplitude=args.amplitude,
        f_chip=args.f_chip,
    )
    result = oscillator.run_entrainment_experiment(
        params, pre_s=args.pre, post_s=args.post, seed=args.seed
    )

    series = {
        "entrain_pre.csv": result.pre,
        "entrain_response.csv": result.response,
        "entrain_forcing.csv": result.forcing,
    }
    for name, wf in series.items():
        path = manifest.add_output(out / name)
        _write_csv(
            path,
            ["time_s", "value"],
            ((_fmt(t), _fmt(v)) for t, v in zip(wf.times, wf.samples)),
        )
    if result.response_spectrum is not None:
        spath = manifest.add_output(out / "entrain_spectrum.csv")
        _write_csv(
            spath,
            ["frequency_hz", "power"],
            (
                (_fmt(f), _fmt(p))
                for f, p in zip(
                    result.response_spectrum.frequencies, result.response_spectrum.power
                )
            ),
        )

    report = {
        "params": {
            "omega0_rad_s": params.omega0,
            "natural_hz": params.omega0 / (2 * math.pi),
            "zeta": params.zeta,
            "amplitude": params.amplitude,
            "f_chip_hz": params.f_chip,
        },
        "seed": args.seed,
        "dominant_hz": result.dominant_hz,
        "locked": result.locked,
        "lock_time_s": None if result.lock is None else result.lock.lock_time,
        "residual_drift_rad_s": None if result.lock is None else result.lock.residual_drift,
        "series": sorted(series),
    }
    manifest.add_output(_write_json(out / "entrain_result.json", report))
    manifest.write()
    return 0


# -- capture ----------------------------------------------------------------

def _cmd_capture(args) -> int:
    out = _out_dir(args)
    manifest = _Manifest("capture", args, out)
    manifest.add_input(args.file)
    capture = capture_io.parse_capture_csv(args.file)
    stats = capture_io.pulse_stats(capture, args.channel)
    train = capture_io.channel_to_pulse_train(capture, args.channel, args.rate)
    recon = dsp.reconstruct_analog(train, target_rate=args.rate, cutoff=args.cutoff)
    spectrum = dsp.power_spectrum(recon)
    dominant = dsp.dominant_frequency(spectrum)

    payload = capture_io.stats_to_json_dict(stats)
    payload["reconstructed_dominant_hz"] = dominant
    payload["channel"] = args.channel
    manifest.add_output(_write_json(out / "capture_stats.json", payload))

    tpath = manifest.add_output(out / "capture_train.csv")
    _write_csv(
        tpath,
        ["time_s", "level"],
        (
            (_fmt(k / train.sample_rate), int(b))
            for k, b in enumerate(train.bits)
        ),
    )
    rpath = manifest.add_output(out / "capture_recon.csv")
    _write_csv(
        rpath,
        ["time_s", "value"],
        ((_fmt(t), _fmt(v)) for t, v in zip(recon.times, recon.samples)),
    )
    spath = manifest.add_output(out / "capture_spectrum.csv")
    _write_csv(
        spath,
        ["frequency_hz", "power"],
        ((_fmt(f), _fmt(p)) for f, p in zip(spectrum.frequencies, spectrum.power)),
    )
    manifest.write()
    return 0


# -- serve ----------------------------------------------------------------

def _cmd_serve(args) -> int:
    from . import server
    from .session import start_session

    if args.source == "dataset_replay":
        if not args.dataset:
            raise ValueError("dataset_replay source needs --dataset")
        segments = eeg_dataset.extract_class(
            eeg_dataset.load_dataset(args.dataset), args.label
        )
        if args.segment >= len(segments):
            raise ValueError(
                f"segment index {args.segment} out of range ({len(segments)} available)"
            )
        source = SourceSpec(kind="dataset_replay", segment=segments[args.segment])
    else:
        source = SourceSpec(kind=args.source, seed=args.seed)

    config = SessionConfig(
        source=source,
        chip=chip_emulator.ChipConfig(
            clock_hz=args.clock, target_hz=args.target, auto_trigger=args.auto_trigger
        ),
        telemetry_hz=args.telemetry_hz,
        time_scale=args.time_scale,
        log_path=args.log,
    )
    session = start_session(config)
    print(f"serving on ws://{args.bind}:{args.port}/ws (telemetry {args.telemetry_hz} Hz)")
    try:
        server.serve(session, bind=args.bind, port=args.port)
    finally:
        session.stop()
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrainlab",
        description="EEG seizure characterization and rhythm-entrainment workbench",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("analyze", help="per-class averages, band powers, entropies")
    p.add_argument("--input", default=_env("input", None), required=_env("input", None) is None,
                   help="dataset CSV (178 sample columns + label)")
    p.add_argument("--out", default=_env("out", "out/analyze"), help="output directory")
    p.add_argument("--bins", type=int, default=_env("bins", "32"), help="entropy histogram bins")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("benchmark", help="class-1 average: analog/digitized/log-spectrum triple")
    p.add_argument("--input", default=_env("input", None), required=_env("input", None) is None)
    p.add_argument("--out", default=_env("out", "out/benchmark"))
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("emulate", help="run the chip emulator and dump the trace")
    p.add_argument("--clock", type=float, default=_env("clock", "9600"), help="clock Hz")
    p.add_argument("--target", type=float, default=_env("target", "6"), help="rhythm Hz")
    p.add_argument("--cycles", type=int, default=_env("cycles", "9600"))
    p.add_argument("--trigger-at", type=int, default=_env("trigger-at", None))
    p.add_argument("--reset-at", type=int, default=_env("reset-at", None))
    p.add_argument("--seed", type=lambda v: int(str(v), 0), default=_env("seed", "0xACE1"),
                   help="16-bit LFSR seed")
    p.add_argument("--threshold", type=int, default=_env("threshold", "127"))
    p.add_argument("--auto-trigger", action="store_true", default=_env_bool("auto-trigger"))
    p.add_argument("--out", default=_env("out", "out/emulate"))
    p.set_defaults(func=_cmd_emulate)

    p = sub.add_parser("entrain", help="forced-oscillator entrainment experiment")
    p.add_argument("--seed", type=int, default=_env("seed", "0"))
    p.add_argument("--natural-hz", type=float, default=_env("natural-hz", "4.5"))
    p.add_argument("--zeta", type=float, default=_env("zeta", "0.3"))
    p.add_argument("--amplitude", type=float, default=_env("amplitude", "1.0"))
    p.add_argument("--f-chip", type=float, default=_env("f-chip", "6.0"))
    p.add_argument("--pre", type=float, default=_env("pre", "2.0"), help="noise seconds")
    p.add_argument("--post", type=float, default=_env("post", "8.0"), help="driven seconds")
    p.add_argument("--out", default=_env("out", "out/entrain"))
    p.set_defaults(func=_cmd_entrain)

    p = sub.add_parser("capture", help="parse an analyzer capture, measure and reconstruct")
    p.add_argument("--file", default=_env("file", None), required=_env("file", None) is None)
    p.add_argument("--channel", type=int, default=_env("channel", "4"))
    p.add_argument("--rate", type=float, default=_env("rate", "178"), help="resample Hz")
    p.add_argument("--cutoff", type=float, default=_env("cutoff", "10"), help="reconstruction low-pass Hz")
    p.add_argument("--out", default=_env("out", "out/capture"))
    p.set_defaults(func=_cmd_capture)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--bind", default=_env("bind", "127.0.0.1"))
    p.add_argument("--port", type=int, default=_env("port", "8765"))
    p.add_argument("--source", default=_env("source", "chaotic_emulator"),
                   choices=["chaotic_emulator", "dataset_replay", "noise"])
    p.add_argument("--dataset", default=_env("dataset", None), help="CSV for dataset_replay")
    p.add_argument("--label", type=int, default=_env("label", "1"))
    p.add_argument("--segment", type=int, default=_env("segment", "0"))
    p.add_argument("--seed", type=int, default=_env("seed", "0"), help="noise source seed")
    p.add_argument("--clock", type=float, default=_env("clock", "9600"))
    p.add_argument("--target", type=float, default=_env("target", "6"))
    p.add_argument("--auto-trigger", action="store_true", default=_env_bool("auto-trigger"))
    p.add_argument("--telemetry-hz", type=float, default=_env("telemetry-hz", "30"))
    p.add_argument("--time-scale", type=float, default=_env("time-scale", "1"))
    p.add_argument("--log", default=_env("log", None), help="JSON-lines session log path")
    p.set_defaults(func=_cmd_serve)

    return parser


def run_subcommand(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"entrainlab {args.subcommand}: {exc}", file=sys.stderr)
        return 1


def main():  # console entry point
    sys.exit(run_subcommand())
