"""entrainlab: EEG seizure characterization and digital rhythm entrainment
workbench - dataset analysis, forced-oscillator dynamics, chip-logic
emulation, logic-capture verification, and a live operator session service.
"""

__version__ = "0.1.0"

from . import capture_io, chip_emulator, dsp, eeg_dataset, oscillator, session, synthetic  # noqa: F401,E501
from .dsp import PulseTrain, Waveform  # noqa: F401
from .eeg_dataset import EegSegment  # noqa: F401
