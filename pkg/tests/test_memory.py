import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticerl.lattice import ConfigurationError
from latticerl.memory import (
    ExperienceWindow,
    PayoffMemory,
    decode_selection_state,
    encode_dilemma_state,
    encode_selection_state,
    memory_length,
    smoothed_payoff,
)

from .oracles import smoothed_direct


@pytest.mark.parametrize("alpha, expected", [(0.0, 0), (0.5, 7), (0.6, 10), (0.1, 3), (0.9, 44)])
def test_memory_length(alpha, expected):
    assert memory_length(alpha) == expected
    if expected:
        assert alpha**expected < 0.01 <= alpha ** (expected - 1)


def test_memory_length_rejects_unbounded():
    with pytest.raises(ConfigurationError):
        memory_length(1.0)


def test_smoothed_payoff_examples():
    assert smoothed_payoff(0.0, 2.0, [5.0, 7.0]) == 2.0
    assert smoothed_payoff(0.5, 2.0, [4.0, 8.0]) == pytest.approx(6 / 1.75)
    assert smoothed_payoff(0.6, 2.0, [1.0]) == pytest.approx(1.625)
    assert smoothed_payoff(0.6, 3.0, []) == 3.0


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.0, 0.95),
    st.floats(0.0, 8.0),
    st.lists(st.floats(0.0, 8.0), max_size=60),
)
def test_smoothed_payoff_matches_direct_sum_and_is_bounded(alpha, current, history):
    M = memory_length(alpha)
    hist = history[:M]
    got = float(smoothed_payoff(alpha, current, hist))
    assert got == pytest.approx(smoothed_direct(alpha, current, hist), abs=1e-12)
    pool = [current, *hist]
    assert min(pool) - 1e-12 <= got <= max(pool) + 1e-12


def test_payoff_memory_ignores_rounds_older_than_M():
    # two memories agree on the last 7 rounds; one of them saw an extra, older round
    short, long_ = PayoffMemory(1, 0.5), PayoffMemory(1, 0.5)
    assert short.length == 7
    long_.push(np.array([1000.0]))
    rng = np.random.default_rng(0)
    for _ in range(7):
        r = rng.random(1) * 4
        short.push(r)
        long_.push(r)
    assert long_.history.shape[1] == 7
    np.testing.assert_array_equal(long_.smooth(np.array([2.0])), short.smooth(np.array([2.0])))


def test_payoff_memory_newest_first():
    mem = PayoffMemory(2, 0.6)
    mem.push(np.array([1.0, 2.0]))
    mem.push(np.array([3.0, 4.0]))
    np.testing.assert_array_equal(mem.history[:, :2], [[3.0, 1.0], [4.0, 2.0]])
    np.testing.assert_allclose(mem.smooth(np.array([0.0, 0.0])),
                               [smoothed_direct(0.6, 0.0, [3, 1]), smoothed_direct(0.6, 0.0, [4, 2])])


def test_dilemma_encoding_single_frame():
    win = ExperienceWindow(1, window=1)
    win.record([0], [[0, 1, 0, 1]], [[1, 1, 1, 1]], [[1, 1, 1, 1]])
    np.testing.assert_array_equal(encode_dilemma_state(win)[0], [1, 0, 1, 0, 0, 1, 1, 0, 0, 1])


def test_empty_window_encodes_to_zeros():
    win = ExperienceWindow(3, window=4)
    assert encode_dilemma_state(win).shape == (3, 40)
    assert encode_selection_state(win).shape == (3, 128)
    assert not encode_dilemma_state(win).any()
    assert not encode_selection_state(win).any()


def test_partial_window_pads_oldest_frames():
    win = ExperienceWindow(1, window=3)
    win.record([1], [[0, 0, 0, 0]], [[1, 0, 1, 0]], [[0, 0, 1, 1]])
    enc = encode_dilemma_state(win)[0].reshape(3, 10)
    assert not enc[:2].any()
    np.testing.assert_array_equal(enc[2], [0, 1] + [1, 0] * 4)


def test_frames_are_oldest_first():
    win = ExperienceWindow(1, window=2)
    win.record([0], [[0, 0, 0, 0]], [[1] * 4], [[1] * 4])  # older: all C
    win.record([1], [[1, 1, 1, 1]], [[1] * 4], [[1] * 4])  # newer: all D
    enc = encode_dilemma_state(win)[0].reshape(2, 5, 2)
    np.testing.assert_array_equal(enc[0], [[1, 0]] * 5)
    np.testing.assert_array_equal(enc[1], [[0, 1]] * 5)


def test_selection_encoding_slot_block():
    win = ExperienceWindow(1, window=1)
    # slot 0: neighbour C, I offered, they offered, self D
    win.record([1], [[0, 1, 1, 1]], [[1, 0, 0, 0]], [[1, 0, 0, 0]])
    enc = encode_selection_state(win)[0]
    assert enc.shape == (32,)
    np.testing.assert_array_equal(enc[:8], [1, 0, 1, 0, 1, 0, 0, 1])
    np.testing.assert_array_equal(enc[8:16], [0, 1, 0, 1, 0, 1, 0, 1])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 7), st.integers(0, 2**32 - 1))
def test_selection_encoding_round_trips(window, n_rounds, seed):
    rng = np.random.default_rng(seed)
    win = ExperienceWindow(4, window)
    log = []
    for _ in range(n_rounds):
        rec = (rng.integers(2, size=4), rng.integers(2, size=(4, 4)),
               rng.integers(2, size=(4, 4)), rng.integers(2, size=(4, 4)))
        win.record(*rec)
        log.append(rec)
    enc = encode_selection_state(win)
    assert set(np.unique(enc)) <= {0, 1}
    pairs = enc.reshape(4, window, 16, 2).sum(axis=-1)
    assert set(np.unique(pairs)) <= {0, 1}
    dec = decode_selection_state(enc, window)
    kept = log[-window:] if log else []
    pad = window - len(kept)
    assert (dec["own_dilemma"][:, :pad] == -1).all()
    for f, (own, nbd, offers, incoming) in enumerate(kept, start=pad):
        np.testing.assert_array_equal(dec["own_dilemma"][:, f], own)
        np.testing.assert_array_equal(dec["neighbour_dilemma"][:, f], nbd)
        np.testing.assert_array_equal(dec["offers"][:, f], offers)
        np.testing.assert_array_equal(dec["incoming"][:, f], incoming)
