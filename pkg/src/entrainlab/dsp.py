"""Shared signal mathematics: Butterworth filtering, spectra, band power,
mean-threshold digitization and analogue reconstruction of pulse trains.

Everything operates on `Waveform`/`PulseTrain` values and is purely
functional; instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

__all__ = [
    "Waveform",
    "PulseTrain",
    "BandpassSpec",
    "FilterStages",
    "PowerSpectrum",
    "BandPowerReport",
    "BAND_EDGES_HZ",
    "design_bandpass",
    "design_lowpass",
    "filter_zero_phase",
    "power_spectrum",
    "band_power",
    "band_power_report",
    "digitize_mean_threshold",
    "reconstruct_analog",
    "dominant_frequency",
]

# Canonical clinical band edges tiling 0.5-40 Hz (delta..gamma).
BAND_EDGES_HZ = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 40.0),
}

FULL_BAND_HZ = (0.5, 40.0)


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled real signal with an explicit sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.ndim != 1:
            raise ValueError("waveform samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("waveform samples must be finite")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


@dataclass(frozen=True)
class PulseTrain:
    """Binary signal sampled uniformly at `sample_rate`."""

    bits: np.ndarray
    sample_rate: float

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ValueError("pulse train bits must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.uint8))
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class BandpassSpec:
    """Band-pass design request: pass f_low..f_high at -3 dB edges."""

    f_low: float
    f_high: float
    order: int
    sample_rate: float

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"filter order must be >= 1, got {self.order}")
        if not (0.0 < self.f_low < self.f_high):
            raise ValueError(
                f"need 0 < f_low < f_high, got ({self.f_low}, {self.f_high})"
            )
        if self.f_high >= self.sample_rate / 2:
            raise ValueError(
                f"f_high={self.f_high} must lie below Nyquist "
                f"({self.sample_rate / 2} Hz)"
            )


@dataclass(frozen=True)
class FilterStages:
    """Cascade of stable second-order sections (scipy sos layout)."""

    sos: np.ndarray
    sample_rate: float

    def __post_init__(self):
        sos = np.atleast_2d(np.asarray(self.sos, dtype=float))
        if sos.shape[1] != 6:
            raise ValueError("each section needs 6 coefficients (b0 b1 b2 a0 a1 a2)")
        object.__setattr__(self, "sos", sos)
        for k, section in enumerate(sos):
            poles = np.roots(section[3:])
            if poles.size and np.max(np.abs(poles)) >= 1.0:
                raise ValueError(f"section {k} is unstable (pole on/outside unit circle)")

    @property
    def n_sections(self) -> int:
        return len(self.sos)

    def frequency_response(self, freqs_hz) -> np.ndarray:
        """Complex response at the given frequencies (Hz)."""
        _, h = sps.sosfreqz(self.sos, worN=np.asarray(freqs_hz, float), fs=self.sample_rate)
        return h


@dataclass(frozen=True)
class PowerSpectrum:
    """One-sided |X(f)|^2 spectrum, bins 0..fs/2 spaced fs/N."""

    frequencies: np.ndarray
    power: np.ndarray
    sample_rate: float
    n_samples: int

    def __post_init__(self):
        f = np.asarray(self.frequencies, float)
        p = np.asarray(self.power, float)
        if len(f) != len(p):
            raise ValueError("frequencies and power must have equal length")
        if np.any(p < 0):
            raise ValueError("power must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power", p)

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.n_samples

    def total_power_two_sided(self) -> float:
        """Sum of |X(k)|^2 over the full two-sided spectrum."""
        p = self.power
        if self.n_samples % 2 == 0:
            # DC and Nyquist bins are unique; interior bins appear twice.
            return float(p[0] + p[-1] + 2.0 * p[1:-1].sum())
        return float(p[0] + 2.0 * p[1:].sum())


@dataclass(frozen=True)
class BandPowerReport:
    """Per-band power for the canonical delta..gamma tiling of 0.5-40 Hz."""

    powers: dict
    edges: dict = field(default_factory=lambda: dict(BAND_EDGES_HZ))

    def __post_init__(self):
        if any(v < 0 for v in self.powers.values()):
            raise ValueError("band powers must be non-negative")

    @property
    def total(self) -> float:
        return math.fsum(self.powers.values())

    def share(self, *bands: str) -> float:
        """Fraction of total report power in the named bands."""
        total = self.total
        if total == 0:
            return 0.0
        return math.fsum(self.powers[b] for b in bands) / total


def design_bandpass(spec: BandpassSpec) -> FilterStages:
    """Digital Butterworth band-pass with -3 dB points at spec.f_low/f_high."""
    nyq = spec.sample_rate / 2
    sos = sps.butter(
        spec.order, [spec.f_low / nyq, spec.f_high / nyq], btype="band", output="sos"
    )
    return FilterStages(sos=sos, sample_rate=spec.sample_rate)


def design_lowpass(cutoff_hz: float, sample_rate: float, order: int = 2) -> FilterStages:
    """Digital Butterworth low-pass, -3 dB at cutoff_hz."""
    if not (0 < cutoff_hz < sample_rate / 2):
        raise ValueError(
            f"cutoff {cutoff_hz} Hz must lie in (0, Nyquist={sample_rate / 2})"
        )
    sos = sps.butter(order, cutoff_hz / (sample_rate / 2), btype="low", output="sos")
    return FilterStages(sos=sos, sample_rate=sample_rate)


def _min_filtfilt_length(stages: FilterStages) -> int:
    # sosfiltfilt needs len(x) > padlen; pad with a 3x margin over the
    # per-section impulse span so edge transients stay inside the padding.
    return 3 * (2 * stages.n_sections + 1)


def filter_zero_phase(x: Waveform, stages: FilterStages) -> Waveform:
    """Forward-backward filtering: same length, zero group delay."""
    min_len = _min_filtfilt_length(stages)
    if len(x) <= min_len:
        raise ValueError(
            f"input too short for zero-phase filtering: {len(x)} samples, "
            f"need more than {min_len}"
        )
    y = sps.sosfiltfilt(stages.sos, x.samples)
    return Waveform(samples=y, sample_rate=x.sample_rate)


def power_spectrum(x: Waveform, window: str = "rect") -> PowerSpectrum:
    """One-sided squared-magnitude FFT spectrum of the raw signal.

    window: "rect" (default, no tapering) or "hann".
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 samples for a spectrum")
    data = x.samples
    if window == "hann":
        data = data * np.hanning(n)
    elif window != "rect":
        raise ValueError(f"unknown window {window!r} (use 'rect' or 'hann')")
    spec = np.fft.rfft(data)
    freqs = np.fft.rfftfreq(n, d=1.0 / x.sample_rate)
    return PowerSpectrum(
        frequencies=freqs,
        power=np.abs(spec) ** 2,
        sample_rate=x.sample_rate,
        n_samples=n,
    )


def band_power(spectrum: PowerSpectrum, f_low: float, f_high: float) -> float:
    """Total power in bins with f_low <= f <= f_high (edges inclusive)."""
    if not (0 <= f_low < f_high):
        raise ValueError(f"need 0 <= f_low < f_high, got ({f_low}, {f_high})")
    f = spectrum.frequencies
    mask = (f >= f_low) & (f <= f_high)
    return math.fsum(spectrum.power[mask])


def _band_masks(frequencies: np.ndarray) -> dict:
    # Half-open tiling [lo, hi) with gamma closed at 40 Hz, so each bin is
    # counted in exactly one band and the five sums partition 0.5-40 Hz.
    masks = {}
    for name, (lo, hi) in BAND_EDGES_HZ.items():
        if name == "gamma":
            masks[name] = (frequencies >= lo) & (frequencies <= hi)
        else:
            masks[name] = (frequencies >= lo) & (frequencies < hi)
    return masks


def band_power_report(
    x: Waveform, filter_order: int = 4, window: str = "rect"
) -> BandPowerReport:
    """Band-pass 0.5-40 Hz (zero phase), then per-band powers delta..gamma."""
    stages = design_bandpass(
        BandpassSpec(
            f_low=FULL_BAND_HZ[0],
            f_high=FULL_BAND_HZ[1],
            order=filter_order,
            sample_rate=x.sample_rate,
        )
    )
    filtered = filter_zero_phase(x, stages)
    spectrum = power_spectrum(filtered, window=window)
    masks = _band_masks(spectrum.frequencies)
    powers = {
        name: math.fsum(spectrum.power[mask]) for name, mask in masks.items()
    }
    return BandPowerReport(powers=powers)


def digitize_mean_threshold(x: Waveform) -> PulseTrain:
    """1 where the sample strictly exceeds the signal mean, else 0."""
    if len(x) < 1:
        raise ValueError("cannot digitize an empty waveform")
    mu = float(np.mean(x.samples))
    bits = (x.samples > mu).astype(np.uint8)
    return PulseTrain(bits=bits, sample_rate=x.sample_rate)


def _zero_order_hold(p: PulseTrain, target_rate: float) -> np.ndarray:
    duration = len(p) / p.sample_rate
    n_out = int(round(duration * target_rate))
    if n_out < 1:
        raise ValueError("target_rate too low for the train duration")
    t = np.arange(n_out) / target_rate
    idx = np.minimum((t * p.sample_rate).astype(int), len(p.bits) - 1)
    return p.bits[idx].astype(float)


def reconstruct_analog(
    p: PulseTrain,
    target_rate: float,
    cutoff: float = 10.0,
    order: int = 2,
    center: bool = True,
) -> Waveform:
    """Smooth a binary train into an analogue waveform.

    Maps {0,1} -> {-1,+1}, zero-order-hold resamples to target_rate, then
    zero-phase low-passes. `center` removes the residual mean.
    """
    if len(p) == 0:
        raise ValueError("cannot reconstruct an empty pulse train")
    if cutoff >= target_rate / 2:
        raise ValueError(
            f"cutoff {cutoff} Hz must lie below Nyquist ({target_rate / 2} Hz)"
        )
    held = 2.0 * _zero_order_hold(p, target_rate) - 1.0
    stages = design_lowpass(cutoff, target_rate, order=order)
    min_len = _min_filtfilt_length(stages)
    if len(held) <= min_len:
        raise ValueError(
            f"resampled train too short to filter ({len(held)} samples)"
        )
    y = sps.sosfiltfilt(stages.sos, held)
    if center:
        y = y - y.mean()
    return Waveform(samples=y, sample_rate=target_rate)


def dominant_frequency(spectrum: PowerSpectrum, f_min: float = 0.5) -> float:
    """Frequency of the strongest bin at or above f_min (ties -> lower bin)."""
    if f_min >= spectrum.sample_rate / 2:
        raise ValueError(f"f_min {f_min} Hz is at/above Nyquist")
    mask = spectrum.frequencies >= f_min
    if not np.any(mask):
        raise ValueError(f"no spectrum bins at or above {f_min} Hz")
    power = spectrum.power[mask]
    # argmax returns the first (lowest-frequency) bin on exact ties
    return float(spectrum.frequencies[mask][np.argmax(power)])
