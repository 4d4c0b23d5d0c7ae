"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them). Tolerances are fixed here and are
not tuned anywhere else.

Set HILTS_DATASET to run the dataset criteria against the real public CSV;
otherwise the deterministic synthetic stand-in with the same shape and class
contrasts is used (see entrainlab.synthetic).
"""

import math
import time
from dataclasses import replace

import numpy as np

from entrainlab import capture_io as cio
from entrainlab import chip_emulator as ce
from entrainlab import dsp
from entrainlab import eeg_dataset as ed
from entrainlab import oscillator as osc
from entrainlab.cli import run_subcommand


def _report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[ACCEPTANCE] {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_seizure_band_dominance(dataset_path):
    t0 = time.monotonic()
    segments = ed.load_dataset(dataset_path)
    avg = ed.average_waveform(ed.extract_class(segments, 1))
    report = dsp.band_power_report(avg)
    elapsed = time.monotonic() - t0
    theta = report.powers["theta"]
    above = {b: report.powers[b] for b in ("alpha", "beta", "gamma")}
    ok = all(theta > p for p in above.values()) and elapsed < 10.0
    _report(
        "seizure-band dominance (theta > every band above 8 Hz)",
        ok,
        f"theta={theta:.3g}, above-8 max={max(above.values()):.3g}, {elapsed:.1f}s",
    )


def test_class_contrast(dataset_path):
    t0 = time.monotonic()
    segments = ed.load_dataset(dataset_path)
    shares = {}
    for label in (1, 2, 3, 4, 5):
        avg = ed.average_waveform(ed.extract_class(segments, label))
        shares[label] = dsp.band_power_report(avg).share("delta", "theta")
    elapsed = time.monotonic() - t0
    ok = all(shares[1] > shares[k] for k in (2, 3, 4, 5)) and elapsed < 30.0
    _report(
        "class contrast (class-1 delta+theta share highest)",
        ok,
        f"shares={{{', '.join(f'{k}: {v:.3f}' for k, v in shares.items())}}}, {elapsed:.1f}s",
    )


def test_entrained_spectrum_peak():
    t0 = time.monotonic()
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    trace = ce.run_trace(config, 4 * 9600, trigger_at=0)
    train = ce.chip_to_pulse_train(trace, 178.0)
    recon = dsp.reconstruct_analog(train, target_rate=178.0, cutoff=10.0)
    spectrum = dsp.power_spectrum(recon)
    dominant = dsp.dominant_frequency(spectrum)
    ratio = dsp.band_power(spectrum, 5.5, 6.5) / dsp.band_power(spectrum, 0.5, 40.0)
    elapsed = time.monotonic() - t0
    ok = abs(dominant - 6.0) <= 0.25 and ratio > 0.8 and elapsed < 5.0
    _report(
        "entrained-spectrum peak (6.00 +/- 0.25 Hz, narrow-band ratio > 0.8)",
        ok,
        f"dominant={dominant}, ratio={ratio:.3f}, {elapsed:.1f}s",
    )


def test_chip_timing_exactness():
    t0 = time.monotonic()
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    trace = ce.run_trace(config, 9600, trigger_at=0)
    toggles = np.flatnonzero(np.diff(trace.normal_signal.astype(int)) != 0) + 1
    twelve = len(toggles) == 12
    zero_jitter = set(np.diff(toggles)) == {ce.half_period(config)}
    big = ce.ChipConfig(clock_hz=1e8, target_hz=6.0)
    divider_ok = ce.half_period(big) == 8_333_333
    freq_err = abs(ce.quantized_output_hz(big) - 6.0)
    elapsed = time.monotonic() - t0
    ok = twelve and zero_jitter and divider_ok and freq_err < 1e-4 and elapsed < 2.0
    _report(
        "chip timing exactness (12 edges, zero jitter, 100 MHz divider)",
        ok,
        f"edges={len(toggles)}, divider={ce.half_period(big)}, err={freq_err:.2e} Hz, {elapsed:.1f}s",
    )


def test_oscillator_oracle():
    t0 = time.monotonic()
    params = osc.OscillatorParams()
    amp_ok = True
    worst = 0.0
    for ratio in (0.5, 1.0, 1.5, 2.0):
        omega = ratio * params.omega0
        decay = 1.0 / (params.zeta * params.omega0)
        dt = 1e-3
        traj = osc.integrate(
            params, osc.OscillatorState(), 12 * decay + 2.0, dt,
            lambda t: math.sin(omega * t),
        )
        theta = np.array([s.theta for s in traj[:-1]])
        t = np.arange(len(theta)) * dt
        period = 2 * math.pi / omega
        n_keep = int(round(int(2.0 / period) * period / dt))
        measured = 2 * abs(np.mean(theta[-n_keep:] * np.exp(-1j * omega * t[-n_keep:])))
        closed = 1.0 / math.sqrt(
            (params.omega0**2 - omega**2) ** 2
            + (2 * params.zeta * params.omega0 * omega) ** 2
        )
        rel = abs(measured - closed) / closed
        worst = max(worst, rel)
        amp_ok &= rel < 0.01

    def final_theta(dt):
        traj = osc.integrate(
            params, osc.OscillatorState(theta=0.1), 2.0, dt,
            lambda t: math.sin(params.omega0 * t),
        )
        return traj[-1].theta

    f1, f2, f3 = final_theta(3.2e-3), final_theta(1.6e-3), final_theta(0.8e-3)
    order = math.log2(abs(f1 - f2) / abs(f2 - f3))
    elapsed = time.monotonic() - t0
    ok = amp_ok and order >= 3.5 and elapsed < 10.0
    _report(
        "oscillator oracle (closed-form amplitude 1%, RK4 order >= 3.5)",
        ok,
        f"worst rel={worst:.2e}, order={order:.2f}, {elapsed:.1f}s",
    )


def test_phase_lock_dichotomy():
    t0 = time.monotonic()
    fs, dur = 500.0, 4.0
    t = np.arange(int(dur * fs)) / fs
    tone = lambda f, ph=0.0: dsp.Waveform(np.sin(2 * np.pi * f * t + ph), fs)
    detuned = osc.detect_phase_lock(tone(11.0), tone(13.0))
    drift_ok = abs(detuned.residual_drift - 4 * math.pi) <= 0.05 * 4 * math.pi
    offset = osc.detect_phase_lock(tone(11.0), tone(11.0, 0.8))
    elapsed = time.monotonic() - t0
    ok = (
        (not detuned.locked)
        and drift_ok
        and offset.locked
        and offset.residual_drift < 0.01
        and elapsed < 2.0
    )
    _report(
        "phase-lock dichotomy (11v13 unlocked at ~4pi, offset 11v11 locked)",
        ok,
        f"drift={detuned.residual_drift:.4f} rad/s, offset drift={offset.residual_drift:.2e}, {elapsed:.1f}s",
    )


def test_entrainment_experiment():
    t0 = time.monotonic()
    result = osc.run_entrainment_experiment(seed=7)
    elapsed = time.monotonic() - t0
    ok = (
        result.dominant_hz is not None
        and abs(result.dominant_hz - 6.0) <= 0.25
        and result.locked
        and result.lock.lock_time is not None
        and result.lock.lock_time <= 5.0
        and elapsed < 5.0
    )
    _report(
        "entrainment experiment (dominant 6.0 +/- 0.25 Hz, lock within 5 s)",
        ok,
        f"dominant={result.dominant_hz}, lock_time={result.lock.lock_time:.2f}s, {elapsed:.1f}s",
    )


def test_capture_round_trip(tmp_path):
    t0 = time.monotonic()
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    trace = ce.run_trace(config, 2 * 9600, trigger_at=0)
    path = cio.capture_csv_from_trace(trace, tmp_path / "rt.csv", channel=4)
    stats = cio.pulse_stats(cio.parse_capture_csv(path), 4)
    reference = ce.measure_output_frequency(trace)
    freq_ok = abs(stats.mean_frequency - reference) <= 1e-9 * reference

    tt = np.arange(2 * 1200) / 1200.0
    bits = ((tt * 6.0) % 1.0 < 0.5).astype(int)
    dense = cio.parse_capture_csv(
        cio.write_dense_capture_csv(tmp_path / "d.csv", tt, {4: bits})
    ).channel(4)
    trans = cio.parse_capture_csv(
        cio.write_transition_capture_csv(tmp_path / "t.csv", tt, {4: bits})
    ).channel(4)
    formats_ok = np.array_equal(dense.times, trans.times) and np.array_equal(
        dense.levels, trans.levels
    )
    elapsed = time.monotonic() - t0
    ok = freq_ok and formats_ok and elapsed < 2.0
    _report(
        "capture round trip (frequency within 1e-9, formats agree)",
        ok,
        f"f={stats.mean_frequency} vs {reference}, {elapsed:.1f}s",
    )


def test_determinism_suite(dataset_path, tmp_path):
    def outputs(out):
        return {
            p.name: p.read_bytes()
            for p in sorted(out.iterdir())
            if p.name != "manifest.json"
        }

    results = {}
    jobs = {
        "emulate": ["emulate", "--cycles", "9600", "--trigger-at", "0"],
        "entrain": ["entrain", "--seed", "7", "--post", "4"],
        "analyze": ["analyze", "--input", str(dataset_path)],
    }
    for name, args in jobs.items():
        a, b = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
        assert run_subcommand(args + ["--out", str(a)]) == 0
        assert run_subcommand(args + ["--out", str(b)]) == 0
        results[name] = outputs(a) == outputs(b)
    ok = all(results.values())
    _report(
        "determinism suite (emulate/entrain/analyze byte-identical)",
        ok,
        str(results),
    )


def test_dsp_property_suite():
    # Butterworth edges at -3 dB +/- 0.1 dB
    stages = dsp.design_bandpass(dsp.BandpassSpec(0.5, 40.0, 4, 178.0))
    grid = np.linspace(0.01, 88.9, 2**15)
    peak = np.abs(stages.frequency_response(grid)).max()
    edges_ok = all(
        abs(20 * math.log10(abs(stages.frequency_response([edge])[0]) / peak) + 3.0) <= 0.1
        for edge in (0.5, 40.0)
    )

    # Parseval within 1e-6 relative
    rng = np.random.default_rng(99)
    x = dsp.Waveform(rng.normal(size=1024), 178.0)
    spec = dsp.power_spectrum(x)
    parseval_ok = (
        abs(spec.total_power_two_sided() / len(x) - float(np.sum(x.samples**2)))
        <= 1e-6 * float(np.sum(x.samples**2))
    )

    # digitizer affine invariance
    affine_ok = True
    for _ in range(200):
        data = rng.normal(size=178) * rng.uniform(1, 50)
        a, b = rng.uniform(0.1, 10.0), rng.uniform(-100.0, 100.0)
        base = dsp.digitize_mean_threshold(dsp.Waveform(data, 178.0)).bits
        mapped = dsp.digitize_mean_threshold(dsp.Waveform(a * data + b, 178.0)).bits
        affine_ok &= bool(np.array_equal(base, mapped))

    # band partition sums
    y = dsp.Waveform(rng.normal(size=712), 178.0)
    report = dsp.band_power_report(y)
    filtered = dsp.filter_zero_phase(y, stages)
    total = dsp.band_power(dsp.power_spectrum(filtered), 0.5, 40.0)
    partition_ok = math.isclose(report.total, total, rel_tol=1e-9)
    partition_exact = abs(report.total - total) <= 4 * np.spacing(total)

    # entropy bounds on 1000 random segments
    entropy_ok = True
    for _ in range(1000):
        seg = ed.EegSegment(samples=rng.normal(size=178) * rng.uniform(1, 500), label=1)
        h = ed.shannon_entropy(seg, 32)
        entropy_ok &= 0.0 <= h <= math.log(32) + 1e-12

    ok = edges_ok and parseval_ok and affine_ok and partition_ok and entropy_ok
    _report(
        "dsp property suite (-3dB edges, Parseval, affine digitizer, partition, entropy bounds)",
        ok,
        f"edges={edges_ok}, parseval={parseval_ok}, affine={affine_ok}, "
        f"partition={partition_ok} (exact-to-rounding={partition_exact}), entropy={entropy_ok}",
    )


def test_divider_requantizes_selected_frequencies():
    # supporting check for the live-loop criterion's 8 Hz selection: the
    # divider arithmetic puts every selectable 1-40 Hz within its quantum
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    ok = True
    for hz in range(1, 41):
        cfg = replace(config, target_hz=float(hz))
        ok &= abs(ce.quantized_output_hz(cfg) - hz) <= hz * hz / 9600.0 + 1e-12
    _report("divider quantization across 1-40 Hz", ok)
