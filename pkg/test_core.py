"""
Tests du module core : fenêtre, séquences, jeux de données, flux aléatoires, format JSONL
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from src.core import (
    Dataset,
    DomainError,
    EventSequence,
    IoError,
    ParseError,
    RngStream,
    Window,
    dataset_io,
    read_dataset,
    validate_sequence,
    write_dataset,
)

W15 = Window(15.0)


@pytest.mark.parametrize("horizon", [0.0, -1.0, float("inf"), float("nan")])
def test_window_rejects_invalid_horizon(horizon):
    with pytest.raises(DomainError):
        Window(horizon)


def test_window_anchor_is_horizon():
    assert W15.anchor_s == 15.0
    assert W15.contains(0.0)
    assert not W15.contains(15.0)


def test_validate_sequence_sorts():
    seq = validate_sequence([3.0, 1.0, 2.0], W15)
    assert seq.times == (1.0, 2.0, 3.0)


def test_validate_sequence_separates_ties():
    seq = validate_sequence([2.0, 2.0, 2.0], W15)
    assert len(seq) == 3
    assert np.all(np.diff(seq.array) > 0)
    assert seq.times[0] == 2.0
    assert seq.times[1] == np.nextafter(2.0, np.inf)


def test_validate_sequence_separates_ties_at_the_top_edge():
    top = np.nextafter(15.0, 0.0)
    seq = validate_sequence([1.0, top, top, top], W15)
    assert len(seq) == 4
    assert seq.times[-1] == top
    assert np.all(np.diff(seq.array) > 0)
    assert seq.times[0] == 1.0


def test_validate_sequence_is_idempotent():
    seq = validate_sequence([4.5, 0.25, 9.0, 0.25], W15)
    assert validate_sequence(seq.times, W15) == seq


@pytest.mark.parametrize("times", [[-0.1], [15.0], [1.0, 20.0], [float("nan")]])
def test_validate_sequence_rejects_out_of_window(times):
    with pytest.raises(DomainError):
        validate_sequence(times, W15)


def test_validate_sequence_reports_index():
    with pytest.raises(DomainError, match="indice 2"):
        validate_sequence([1.0, 2.0, 16.0], W15)


def test_empty_sequence():
    assert validate_sequence([], W15) == EventSequence(())


def test_mean_event_rate():
    seq = validate_sequence(np.arange(15) + 0.5, W15)
    data = Dataset(W15, tuple([seq] * 10), "toy")
    assert data.mean_event_rate() == pytest.approx(1.0)
    assert list(data.counts()) == [15] * 10
    assert data.with_label("autre").label == "autre"


def test_mean_event_rate_empty_dataset():
    assert Dataset(W15, (), "vide").mean_event_rate() == 0.0


@pytest.mark.parametrize("times", [(1.0, 16.0), (-1.0,), (5.0, 1.0), (2.0, 2.0)])
def test_dataset_rejects_invalid_sequences(times):
    with pytest.raises(DomainError, match="séquence 1"):
        Dataset(W15, (EventSequence((0.5,)), EventSequence(times)), "x")


def test_dataset_checks_its_own_window():
    seq = validate_sequence([12.0], W15)
    with pytest.raises(DomainError):
        Dataset(Window(10.0), (seq,), "x")


def test_rng_stream_reproducible():
    a = RngStream(7, 3).generator().uniform(size=5)
    b = RngStream(7, 3).generator().uniform(size=5)
    c = RngStream(7, 4).generator().uniform(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RngStream(7).derive(3) == RngStream(7, 3)


def test_rng_streams_are_uncorrelated():
    a = RngStream(7, 0).generator().uniform(size=100_000)
    b = RngStream(7, 1).generator().uniform(size=100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_rng_stream_rejects_bad_seed(seed):
    with pytest.raises(DomainError):
        RngStream(seed)


def test_dataset_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    sequences = (validate_sequence(rng.uniform(0, 15, 7), W15), EventSequence(()),
                 validate_sequence([0.1 + 0.2, 1 / 3], W15))
    data = Dataset(W15, sequences, "SE")
    path = dataset_io(tmp_path / "d.jsonl", "write", dataset=data)
    loaded = dataset_io(path, "read")
    assert loaded == data


def test_zero_sequences_writes_header_only(tmp_path):
    path = write_dataset(Dataset(W15, (), "vide"), tmp_path / "vide.jsonl")
    assert path.read_text(encoding="utf-8").splitlines() == ['{"T": 15.0, "label": "vide"}']
    assert len(read_dataset(path)) == 0


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"T": 15.0, "label": "x"}\n[1.0, 2.0]\n[1.0, "a"]\n', encoding="utf-8")
    with pytest.raises(ParseError, match="ligne 3") as info:
        read_dataset(path)
    assert info.value.line_number == 3
    assert info.value.exit_code == 5


def test_out_of_window_time_in_file(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"T": 15.0, "label": "x"}\n[1.0, 16.0]\n', encoding="utf-8")
    with pytest.raises(DomainError, match="ligne 2"):
        read_dataset(path)


def test_window_mismatch(tmp_path):
    path = write_dataset(Dataset(W15, (), ""), tmp_path / "d.jsonl")
    with pytest.raises(DomainError):
        read_dataset(path, window=Window(10.0))


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        read_dataset(tmp_path / "absent.jsonl")


def test_unknown_direction(tmp_path):
    with pytest.raises(DomainError):
        dataset_io(tmp_path / "d.jsonl", "append")
