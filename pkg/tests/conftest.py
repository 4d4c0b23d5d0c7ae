import os
from pathlib import Path

import pytest

from entrainlab import eeg_dataset, synthetic


@pytest.fixture(scope="session")
def dataset_path(tmp_path_factory) -> Path:
    """The public dataset CSV if HILTS_DATASET points at it, else the
    deterministic synthetic stand-in with the same shape and class contrasts."""
    env = os.environ.get("HILTS_DATASET")
    if env:
        return Path(env)
    path = tmp_path_factory.mktemp("data") / "eeg_dataset.csv"
    synthetic.write_synthetic_dataset(path)
    return path


@pytest.fixture(scope="session")
def dataset_segments(dataset_path):
    return eeg_dataset.load_dataset(dataset_path)


@pytest.fixture(scope="session")
def class_averages(dataset_segments):
    return {
        label: eeg_dataset.average_waveform(
            eeg_dataset.extract_class(dataset_segments, label)
        )
        for label in (1, 2, 3, 4, 5)
    }
