"""Deterministic stand-in for the public chunked EEG dataset.

Generates a CSV with the same shape as the published file (row-id column,
X1..X178 sample columns, label column y, 500 subjects x 23 chunks) and
class-conditional spectra that reproduce the qualitative contrasts the
analysis pipeline is built to detect: class 1 carries large coherent
delta-theta rhythms, classes 2-5 carry smaller alpha/beta rhythms.

Integer microvolt values keep the file compact and byte-reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .eeg_dataset import SEGMENT_LENGTH, SEGMENT_RATE_HZ

__all__ = ["write_synthetic_dataset", "DEFAULT_SEED"]

DEFAULT_SEED = 2024

N_SUBJECTS = 500
N_CHUNKS = 23
SUBJECTS_PER_CLASS = N_SUBJECTS // 5

# (tones as [(amplitude_uv, freq_hz), ...], noise sigma, amp jitter range)
CLASS_MODELS = {
    1: ([(260.0, 5.5), (90.0, 2.2)], 150.0, (0.6, 1.4)),   # seizure: slow, huge
    2: ([(45.0, 8.6)], 40.0, (0.8, 1.2)),                  # tumour region
    3: ([(40.0, 10.3)], 35.0, (0.8, 1.2)),                 # healthy region
    4: ([(55.0, 9.4)], 30.0, (0.8, 1.2)),                  # eyes closed
    5: ([(35.0, 16.8), (18.0, 24.5)], 30.0, (0.8, 1.2)),   # eyes open
}


def _segment(rng: np.random.Generator, label: int) -> np.ndarray:
    tones, sigma, (a_lo, a_hi) = CLASS_MODELS[label]
    t = np.arange(SEGMENT_LENGTH) / SEGMENT_RATE_HZ
    amp = rng.uniform(a_lo, a_hi)
    x = np.zeros(SEGMENT_LENGTH)
    for base_amp, freq in tones:
        # small phase jitter: segments stay coherent enough to survive averaging
        x += amp * base_amp * np.sin(2 * np.pi * freq * t + rng.normal(0.0, 0.3))
    x += rng.normal(0.0, sigma, SEGMENT_LENGTH)
    return np.round(x)


def write_synthetic_dataset(path, seed: int = DEFAULT_SEED) -> Path:
    """Write the full 11,500-row synthetic dataset CSV. Returns the path."""
    path = Path(path)
    rng = np.random.default_rng(seed)
    header = "," + ",".join(f"X{i}" for i in range(1, SEGMENT_LENGTH + 1)) + ",y"
    lines = [header]
    for subject in range(1, N_SUBJECTS + 1):
        label = (subject - 1) // SUBJECTS_PER_CLASS + 1
        for chunk in range(1, N_CHUNKS + 1):
            row = _segment(rng, label)
            row_id = f"X{chunk}.V1.{subject}"
            values = ",".join(str(int(v)) for v in row)
            lines.append(f"{row_id},{values},{label}")
    path.write_text("\n".join(lines) + "\n")
    return path
