"""Build the seizure benchmark triple: analogue average, mean-threshold
binary version, and logarithmic power spectrum.

Run:
    python demos/02_benchmark_digitization.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from entrainlab import dsp, eeg_dataset

HERE = Path(__file__).parent
OUT = HERE / "output"


def main():
    OUT.mkdir(exist_ok=True)
    from importlib import import_module

    demo01 = import_module("01_seizure_characterization")
    segments = eeg_dataset.load_dataset(demo01.dataset_path())

    avg = eeg_dataset.average_waveform(eeg_dataset.extract_class(segments, 1))
    digitized = dsp.digitize_mean_threshold(avg)
    spectrum = dsp.power_spectrum(avg)
    mu = float(np.mean(avg.samples))
    high = int(digitized.bits.sum())
    print(f"threshold mu = {mu:.2f} uV; {high}/{len(digitized.bits)} samples high")

    fig, axes = plt.subplots(3, 1, figsize=(9, 8))
    axes[0].plot(avg.times, avg.samples, color="crimson")
    axes[0].axhline(mu, color="gray", ls="--", lw=0.8)
    axes[0].set_title("analogue seizure average (uV)")
    axes[1].step(avg.times, digitized.bits, where="post", color="black")
    axes[1].set_title("mean-threshold binary form")
    axes[1].set_ylim(-0.1, 1.1)
    power = np.maximum(spectrum.power, np.finfo(float).tiny)
    axes[2].semilogy(spectrum.frequencies, power, color="navy")
    axes[2].set_xlim(0, 45)
    axes[2].set_title("log power spectrum")
    axes[2].set_xlabel("Hz")
    fig.tight_layout()
    fig.savefig(OUT / "02_benchmark_triple.png", dpi=120)

    dominant = dsp.dominant_frequency(spectrum)
    report = dsp.band_power_report(avg)
    print(f"dominant component {dominant:.2f} Hz; theta power {report.powers['theta']:.3g} "
          f"vs alpha {report.powers['alpha']:.3g}")
    print(f"figure in {OUT}/")


if __name__ == "__main__":
    main()
