import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrainlab import eeg_dataset as ed
from entrainlab.errors import ParseError


def _row(values, label):
    return ",".join(str(v) for v in values) + f",{label}"


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def test_two_row_file_and_summary(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=178)
    b = rng.normal(size=178)
    path = _write(tmp_path, "two.csv", [_row(a, 1), _row(b, 3)])
    segs = ed.load_dataset(path)
    assert len(segs) == 2
    assert [s.label for s in segs] == [1, 3]
    summary = ed.summarize(segs)
    assert summary.counts == {1: 1, 3: 1}
    assert summary.total_rows == 2


def test_header_and_id_column_detected(tmp_path):
    header = "," + ",".join(f"X{i}" for i in range(1, 179)) + ",y"
    data = "X1.V1.7," + ",".join(str(i) for i in range(178)) + ",2"
    path = _write(tmp_path, "with_id.csv", [header, data])
    segs = ed.load_dataset(path)
    assert len(segs) == 1
    assert segs[0].label == 2
    assert segs[0].subject_chunk_id == "X1.V1.7"
    assert segs[0].samples[3] == 3.0


def test_headerless_file(tmp_path):
    path = _write(tmp_path, "plain.csv", [_row(np.ones(178), 4)])
    segs = ed.load_dataset(path)
    assert segs[0].label == 4
    assert segs[0].subject_chunk_id == "0"


def test_short_row_is_parse_error_with_row_number(tmp_path):
    good = _row(np.zeros(178), 1)
    bad = _row(np.zeros(177), 1)
    path = _write(tmp_path, "short.csv", [good, bad])
    with pytest.raises(ParseError, match="row 2"):
        ed.load_dataset(path)


def test_non_numeric_sample_is_parse_error(tmp_path):
    # first row numeric so it cannot be mistaken for a header
    good = _row(np.zeros(178), 1)
    vals = [str(v) for v in range(178)]
    vals[9] = "oops"
    path = _write(tmp_path, "bad.csv", [good, ",".join(vals) + ",1"])
    with pytest.raises(ParseError, match="oops"):
        ed.load_dataset(path)


def test_label_out_of_range_is_validation_error(tmp_path):
    path = _write(tmp_path, "lbl.csv", [_row(np.zeros(178), 9)])
    with pytest.raises(ValueError, match="out of range"):
        ed.load_dataset(path)


def test_full_dataset_counts(dataset_segments):
    assert len(dataset_segments) == 11_500
    seizure = ed.extract_class(dataset_segments, 1)
    assert len(seizure) == 2_300


def test_extract_class_preserves_order_and_filters():
    segs = [
        ed.EegSegment(samples=np.full(178, float(i)), label=lbl)
        for i, lbl in enumerate([1, 2, 1])
    ]
    out = ed.extract_class(segs, 1)
    assert [s.samples[0] for s in out] == [0.0, 2.0]
    assert all(s.label == 1 for s in out)
    assert ed.extract_class(segs, 5) == []
    with pytest.raises(ValueError):
        ed.extract_class(segs, 0)


def test_average_single_segment_identity():
    seg = ed.EegSegment(samples=np.sin(np.arange(178.0)), label=1)
    avg = ed.average_waveform([seg])
    assert np.array_equal(avg.samples, seg.samples)
    assert avg.sample_rate == 178.0


def test_average_two_segments():
    one = ed.EegSegment(samples=np.full(178, 1.0), label=1)
    three = ed.EegSegment(samples=np.full(178, 3.0), label=1)
    avg = ed.average_waveform([one, three])
    assert np.array_equal(avg.samples, np.full(178, 2.0))


def test_average_matches_two_pass_oracle(dataset_segments):
    seizure = ed.extract_class(dataset_segments, 1)
    avg = ed.average_waveform(seizure)
    # independent oracle: plain accumulate-then-divide
    acc = np.zeros(178)
    for seg in seizure:
        acc += seg.samples
    oracle = acc / len(seizure)
    np.testing.assert_allclose(avg.samples, oracle, rtol=1e-9)


def test_average_errors():
    with pytest.raises(ValueError):
        ed.average_waveform([])


def test_average_linearity_and_permutation_invariance():
    rng = np.random.default_rng(7)
    segs = [
        ed.EegSegment(samples=rng.normal(size=178) * 50, label=1) for _ in range(41)
    ]
    alpha = 3.7
    scaled = [ed.EegSegment(samples=alpha * s.samples, label=1) for s in segs]
    np.testing.assert_allclose(
        ed.average_waveform(scaled).samples,
        alpha * ed.average_waveform(segs).samples,
        rtol=1e-12,
    )
    perm = [segs[i] for i in rng.permutation(len(segs))]
    np.testing.assert_allclose(
        ed.average_waveform(perm).samples,
        ed.average_waveform(segs).samples,
        rtol=1e-9,
    )


def test_entropy_constant_segment_is_zero():
    seg = ed.EegSegment(samples=np.full(178, 4.2), label=1)
    assert ed.shannon_entropy(seg, 32) == 0.0


def test_entropy_two_even_bins_is_ln2():
    samples = np.concatenate([np.zeros(89), np.ones(89)])
    seg = ed.EegSegment(samples=samples, label=1)
    assert ed.shannon_entropy(seg, 2) == pytest.approx(math.log(2), abs=1e-12)


def test_entropy_matches_histogram_oracle():
    rng = np.random.default_rng(11)
    seg = ed.EegSegment(samples=rng.normal(size=178) * 30 + 5, label=1)
    h = ed.shannon_entropy(seg, 32)
    counts, _ = np.histogram(seg.samples, bins=32, range=(seg.samples.min(), seg.samples.max()))
    oracle = -sum(
        (c / 178) * math.log(c / 178) for c in counts if c > 0
    )
    assert h == pytest.approx(oracle, abs=1e-12)


def test_entropy_rejects_too_few_bins():
    seg = ed.EegSegment(samples=np.arange(178.0), label=1)
    with pytest.raises(ValueError):
        ed.shannon_entropy(seg, 1)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    n_bins=st.integers(2, 64),
)
def test_entropy_bounds(seed, n_bins):
    rng = np.random.default_rng(seed)
    seg = ed.EegSegment(samples=rng.normal(size=178) * 100, label=1)
    h = ed.shannon_entropy(seg, n_bins)
    assert 0.0 <= h <= math.log(n_bins) + 1e-12


def test_entropy_affine_invariance():
    rng = np.random.default_rng(21)
    for _ in range(50):
        seg = ed.EegSegment(samples=rng.normal(size=178) * 40, label=1)
        a = rng.uniform(0.25, 4.0)
        b = rng.uniform(-100, 100)
        mapped = ed.EegSegment(samples=a * seg.samples + b, label=1)
        assert ed.shannon_entropy(seg, 32) == pytest.approx(
            ed.shannon_entropy(mapped, 32), abs=1e-9
        )


def test_segment_invariants():
    with pytest.raises(ValueError):
        ed.EegSegment(samples=np.zeros(177), label=1)
    with pytest.raises(ValueError):
        ed.EegSegment(samples=np.full(178, np.nan), label=1)
    with pytest.raises(ValueError):
        ed.EegSegment(samples=np.zeros(178), label=6)
