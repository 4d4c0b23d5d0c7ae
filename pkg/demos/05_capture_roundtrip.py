"""Logic-capture verification: emulator trace -> analyzer-style CSV ->
edge parsing -> timing stats -> analogue reconstruction -> spectrum, with the
seizure average spectrum alongside for contrast.

Run:
    python demos/05_capture_roundtrip.py
"""

from importlib import import_module
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from entrainlab import capture_io as cio
from entrainlab import chip_emulator as ce
from entrainlab import dsp, eeg_dataset

HERE = Path(__file__).parent
OUT = HERE / "output"


def main():
    OUT.mkdir(exist_ok=True)
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    trace = ce.run_trace(config, 4 * 9600, trigger_at=0)

    cap_path = OUT / "05_chip_capture.csv"
    cio.capture_csv_from_trace(trace, cap_path, channel=4, style="transitions")
    capture = cio.parse_capture_csv(cap_path)
    stats = cio.pulse_stats(capture, 4)
    print(f"capture: {stats.edge_count} edges, mean {stats.mean_frequency:.6f} Hz, "
          f"jitter {stats.period_jitter_rms:.2e} s, duty {stats.duty_cycle:.3f}")
    print(f"emulator reference: {ce.measure_output_frequency(trace)} Hz")

    train = cio.channel_to_pulse_train(capture, 4, 178.0)
    recon = dsp.reconstruct_analog(train, target_rate=178.0, cutoff=10.0)
    chip_spectrum = dsp.power_spectrum(recon)
    print(f"reconstructed dominant frequency: {dsp.dominant_frequency(chip_spectrum)} Hz")

    demo01 = import_module("01_seizure_characterization")
    segments = eeg_dataset.load_dataset(demo01.dataset_path())
    avg = eeg_dataset.average_waveform(eeg_dataset.extract_class(segments, 1))
    seizure_spectrum = dsp.power_spectrum(avg)

    fig, axes = plt.subplots(3, 1, figsize=(10, 7))
    axes[0].step(np.arange(len(train.bits)) / train.sample_rate,
                 train.bits, where="post", lw=0.7, color="black")
    axes[0].set_title("chip pulse train resampled at 178 Hz")
    axes[1].plot(recon.times, recon.samples, color="seagreen")
    axes[1].set_title("low-pass reconstructed analogue rhythm")
    norm = lambda s: s.power / s.power.max()
    axes[2].plot(seizure_spectrum.frequencies, norm(seizure_spectrum),
                 label="seizure average", color="crimson")
    axes[2].plot(chip_spectrum.frequencies, norm(chip_spectrum),
                 label="entrained output", color="navy")
    axes[2].set_xlim(0, 40)
    axes[2].set_xlabel("Hz")
    axes[2].set_title("normalized spectra: broadband seizure vs narrow-band 6 Hz rhythm")
    axes[2].legend()
    fig.tight_layout()
    fig.savefig(OUT / "05_capture_roundtrip.png", dpi=120)
    print(f"figure and capture CSV in {OUT}/")


if __name__ == "__main__":
    main()
