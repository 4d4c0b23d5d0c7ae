"""Characterize the seizure class of the chunked EEG dataset.

Loads the dataset (the public CSV if HILTS_DATASET points at it, else the
bundled synthetic stand-in), superimposes the seizure segments, computes the
class average and per-segment entropy, and compares band power across the
five classes.

Run:
    python demos/01_seizure_characterization.py
"""

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from entrainlab import dsp, eeg_dataset, synthetic

HERE = Path(__file__).parent
OUT = HERE / "output"


def dataset_path() -> Path:
    env = os.environ.get("HILTS_DATASET")
    if env:
        return Path(env)
    path = HERE / "data" / "eeg_dataset.csv"
    if not path.exists():
        print("generating synthetic stand-in dataset ...")
        synthetic.write_synthetic_dataset(path)
    return path


def main():
    OUT.mkdir(exist_ok=True)
    segments = eeg_dataset.load_dataset(dataset_path())
    summary = eeg_dataset.summarize(segments)
    print(f"{summary.total_rows} segments, per class: {dict(sorted(summary.counts.items()))}")

    seizure = eeg_dataset.extract_class(segments, 1)
    avg = eeg_dataset.average_waveform(seizure)
    entropies = [eeg_dataset.shannon_entropy(seg) for seg in seizure]
    print(f"class 1: {len(seizure)} segments, entropy mean {np.mean(entropies):.3f} nats "
          f"(range {min(entropies):.3f}..{max(entropies):.3f})")

    fig, axes = plt.subplots(3, 1, figsize=(9, 9))
    t = avg.times
    for seg in seizure[::23]:  # one chunk per subject keeps the plot readable
        axes[0].plot(t, seg.samples, color="steelblue", alpha=0.05)
    axes[0].set_title("superimposed seizure segments")
    axes[0].set_ylabel("uV")
    axes[1].plot(t, avg.samples, color="crimson")
    axes[1].set_title("average seizure waveform")
    axes[1].set_ylabel("uV")
    axes[2].hist(entropies, bins=40, color="gray")
    axes[2].set_title("per-segment amplitude entropy")
    axes[2].set_xlabel("nats")
    fig.tight_layout()
    fig.savefig(OUT / "01_seizure_overview.png", dpi=120)

    fig2, axes2 = plt.subplots(1, 5, figsize=(16, 3.2), sharey=True)
    for ax, label in zip(axes2, (1, 2, 3, 4, 5)):
        cls_avg = eeg_dataset.average_waveform(eeg_dataset.extract_class(segments, label))
        report = dsp.band_power_report(cls_avg)
        ax.bar(list(report.powers), list(report.powers.values()), color="teal")
        ax.set_title(f"class {label}")
        ax.tick_params(axis="x", rotation=45)
        share = report.share("delta", "theta")
        print(f"class {label}: delta+theta share {share:.3f}, per-band "
              + ", ".join(f"{k}={v:.3g}" for k, v in report.powers.items()))
    axes2[0].set_ylabel("power (uV^2)")
    fig2.suptitle("band power of the class-average waveforms")
    fig2.tight_layout()
    fig2.savefig(OUT / "01_band_power_by_class.png", dpi=120)
    print(f"figures in {OUT}/")


if __name__ == "__main__":
    main()
