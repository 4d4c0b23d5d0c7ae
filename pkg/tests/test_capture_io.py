import math

import numpy as np
import pytest

from entrainlab import capture_io as cio
from entrainlab import chip_emulator as ce
from entrainlab.errors import MeasurementError, ParseError


def _square(freq, fs, seconds, duty=0.5):
    t = np.arange(int(round(seconds * fs))) / fs
    return t, ((t * freq) % 1.0 < duty).astype(int)


# -- parsing -------------------------------------------------------------------

def test_synthetic_toggle_edges_at_twelfths(tmp_path):
    # channel toggling every 1/12 s, written densely at 1200 Hz
    t = np.arange(2400) / 1200.0
    bits = (np.floor(t * 12) % 2).astype(int)
    path = cio.write_dense_capture_csv(tmp_path / "d.csv", t, {0: bits})
    cap = cio.parse_capture_csv(path)
    ch = cap.channel(0)
    expected = np.arange(1, 24) / 12.0
    np.testing.assert_allclose(ch.times, expected, atol=1e-12)


def test_file_with_only_time_column_errors(tmp_path):
    path = tmp_path / "only_time.csv"
    path.write_text("Time [s]\n0.0\n0.5\n")
    with pytest.raises(ParseError, match="no channel"):
        cio.parse_capture_csv(path)


def test_missing_time_column_errors(tmp_path):
    path = tmp_path / "no_time.csv"
    path.write_text("Channel 4\n0\n1\n")
    with pytest.raises(ParseError, match="time"):
        cio.parse_capture_csv(path)


def test_non_monotone_time_errors(tmp_path):
    path = tmp_path / "bad_time.csv"
    path.write_text("Time [s],Channel 4\n0.0,0\n0.5,1\n0.25,0\n")
    with pytest.raises(ParseError, match="ascending"):
        cio.parse_capture_csv(path)


def test_non_binary_value_errors(tmp_path):
    path = tmp_path / "bad_bit.csv"
    path.write_text("Time [s],Channel 4\n0.0,0\n0.5,2\n")
    with pytest.raises(ParseError, match="non-binary"):
        cio.parse_capture_csv(path)


def test_dense_and_transition_exports_agree(tmp_path):
    t, bits = _square(6.0, 1000.0, 2.0)
    dense = cio.write_dense_capture_csv(tmp_path / "dense.csv", t, {4: bits})
    trans = cio.write_transition_capture_csv(tmp_path / "trans.csv", t, {4: bits})
    a = cio.parse_capture_csv(dense).channel(4)
    b = cio.parse_capture_csv(trans).channel(4)
    assert a.initial_level == b.initial_level
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.levels, b.levels)
    # the transition file is the compact one
    assert trans.read_text().count("\n") < dense.read_text().count("\n")


def test_channel_numbers_from_header(tmp_path):
    path = tmp_path / "multi.csv"
    path.write_text("Time [s],Channel 2,Channel 7\n0.0,0,1\n1.0,1,1\n")
    cap = cio.parse_capture_csv(path)
    assert sorted(cap.channels) == [2, 7]
    assert cap.channel(7).initial_level == 1
    with pytest.raises(ValueError, match="channel 3"):
        cap.channel(3)


# -- channel_to_pulse_train ------------------------------------------------------

def test_two_second_capture_resamples_to_356(tmp_path):
    t, bits = _square(6.0, 178.0, 2.0)
    path = cio.write_dense_capture_csv(tmp_path / "c.csv", t, {4: bits})
    cap = cio.parse_capture_csv(path)
    train = cio.channel_to_pulse_train(cap, 4, 178.0)
    assert len(train.bits) == 356
    changes = int(np.sum(train.bits[1:] != train.bits[:-1]))
    assert abs(changes - 24) <= 1


def test_constant_high_channel(tmp_path):
    path = tmp_path / "hi.csv"
    path.write_text("Time [s],Channel 4\n0.0,1\n1.0,1\n")
    cap = cio.parse_capture_csv(path)
    train = cio.channel_to_pulse_train(cap, 4, 50.0)
    assert np.all(train.bits == 1)
    assert cap.channel(4).times.size == 0  # no edges, constant from first row


def test_resample_at_native_rate_is_identity(tmp_path):
    rng = np.random.default_rng(8)
    fs = 400.0
    t = np.arange(800) / fs
    bits = (rng.random(800) < 0.5).astype(int)
    path = cio.write_dense_capture_csv(tmp_path / "r.csv", t, {1: bits})
    cap = cio.parse_capture_csv(path)
    train = cio.channel_to_pulse_train(cap, 1, fs)
    assert np.array_equal(train.bits, bits)


def test_sample_on_edge_takes_post_edge_level(tmp_path):
    path = tmp_path / "edge.csv"
    path.write_text("Time [s],Channel 0\n0.0,0\n0.5,1\n1.0,1\n")
    cap = cio.parse_capture_csv(path)
    train = cio.channel_to_pulse_train(cap, 0, 2.0)  # samples at 0.0, 0.5, 1.0
    assert list(train.bits) == [0, 1, 1]


# -- pulse_stats ------------------------------------------------------------------

def test_stats_ideal_square(tmp_path):
    t, bits = _square(6.0, 1200.0, 2.0)
    path = cio.write_transition_capture_csv(tmp_path / "i.csv", t, {4: bits})
    stats = cio.pulse_stats(cio.parse_capture_csv(path), 4)
    assert stats.mean_frequency == pytest.approx(6.0, rel=1e-9)
    assert stats.period_jitter_rms <= 1e-12
    assert stats.duty_cycle == pytest.approx(0.5, abs=1e-3)


def test_stats_jitter_matches_hand_computed_rms(tmp_path):
    # rising edges at 0.5, 1.5, 2.5, 3.501, 4.5 s: periods 1, 1, 1.001, 0.999
    rising = [0.5, 1.5, 2.5, 3.501, 4.5]
    rows = ["Time [s],Channel 0", "0.0,0"]
    for r in rising:
        rows.append(f"{r},1")
        rows.append(f"{r + 0.4},0")
    path = tmp_path / "j.csv"
    path.write_text("\n".join(rows) + "\n")
    stats = cio.pulse_stats(cio.parse_capture_csv(path), 0)
    periods = np.diff(rising)
    expected = math.sqrt(np.mean((periods - periods.mean()) ** 2))
    assert stats.period_jitter_rms == pytest.approx(expected, rel=1e-9)
    assert stats.mean_frequency == pytest.approx(4 / 4.0, rel=1e-9)


def test_stats_need_three_rising_edges(tmp_path):
    path = tmp_path / "few.csv"
    path.write_text("Time [s],Channel 0\n0.0,0\n0.1,1\n0.5,0\n0.6,1\n1.0,0\n")
    with pytest.raises(MeasurementError):
        cio.pulse_stats(cio.parse_capture_csv(path), 0)


def test_duty_cycle_bounded_on_random_captures(tmp_path):
    rng = np.random.default_rng(17)
    for trial in range(10):
        n = 600
        t = np.arange(n) / 100.0
        bits = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(int)
        path = cio.write_dense_capture_csv(tmp_path / f"r{trial}.csv", t, {0: bits})
        cap = cio.parse_capture_csv(path)
        try:
            stats = cio.pulse_stats(cap, 0)
        except MeasurementError:
            continue
        assert 0.0 <= stats.duty_cycle <= 1.0


# -- round trip --------------------------------------------------------------------

@pytest.mark.parametrize("style", ["dense", "transitions"])
def test_emulator_capture_round_trip(tmp_path, style):
    config = ce.ChipConfig(clock_hz=9600.0, target_hz=6.0)
    trace = ce.run_trace(config, 4 * 9600, trigger_at=0)
    path = cio.capture_csv_from_trace(trace, tmp_path / f"{style}.csv", channel=4, style=style)
    cap = cio.parse_capture_csv(path)
    stats = cio.pulse_stats(cap, 4)
    reference = ce.measure_output_frequency(trace)
    assert stats.mean_frequency == pytest.approx(reference, rel=1e-9)
