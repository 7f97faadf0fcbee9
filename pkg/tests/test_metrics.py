import functools
import random

import numpy as np
import pytest

from garble.audio_io import AudioBuffer
from garble.errors import EmptyInputError, EmptyReferenceError, SilentSignalError
from garble.metrics import (
    Provenance,
    Transcript,
    cosine_similarity,
    db_relative,
    mean_std,
    normalize_text,
    wer,
    word_edit_distance,
)
from garble.attack import apply_gain_db

from conftest import band_limited_noise


@functools.cache
def brute_distance(ref: tuple, hyp: tuple) -> int:
    """Exhaustive edit-sequence search (memoized recursion over suffixes);
    the independence oracle for the Wagner-Fisher table."""
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    return min(
        brute_distance(ref[1:], hyp[1:]) + (ref[0] != hyp[0]),
        brute_distance(ref[1:], hyp) + 1,
        brute_distance(ref, hyp[1:]) + 1,
    )


def t(words):
    return Transcript(tuple(words))


# --- normalization ---

def test_normalize_strips_punctuation_and_case():
    assert normalize_text("Hi, welcome!\n").words == ("hi", "welcome")


def test_normalize_empty():
    assert normalize_text("").words == ()


def test_normalize_keeps_apostrophes():
    assert normalize_text("don't STOP").words == ("don't", "stop")


def test_normalize_idempotent():
    raw = "It's 3 o'clock -- STOP, now!\n\tok?"
    once = normalize_text(raw)
    twice = normalize_text(" ".join(once.words))
    assert once.words == twice.words


def test_normalize_provenance_carried():
    assert normalize_text("x", Provenance.HUMAN, "a1").provenance is Provenance.HUMAN


# --- edit distance ---

def test_identity_zero_edits():
    b = word_edit_distance(t(["a", "b", "c"]), t(["a", "b", "c"]))
    assert (b.substitutions, b.deletions, b.insertions) == (0, 0, 0)


def test_all_deletions():
    b = word_edit_distance(t(["a", "b", "c"]), t([]))
    assert b.deletions == 3 and b.distance == 3


def test_all_insertions():
    b = word_edit_distance(t([]), t(["a", "b"]))
    assert b.insertions == 2 and b.distance == 2


def test_known_decomposition_sub_and_insert():
    ref, hyp = ("a", "b", "c"), ("a", "x", "c", "d")
    b = word_edit_distance(t(ref), t(hyp))
    assert b.distance == brute_distance(ref, hyp) == 2
    assert (b.substitutions, b.deletions, b.insertions) == (1, 0, 1)


def test_distance_matches_brute_force_randomized():
    rng = random.Random(99)
    vocab = ["alpha", "beta", "gamma", "delta", "epsilon"]
    for _ in range(300):
        ref = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 8)))
        hyp = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 8)))
        assert word_edit_distance(t(ref), t(hyp)).distance == brute_distance(ref, hyp)


def test_metric_axioms_randomized():
    rng = random.Random(4)
    vocab = ["a", "b", "c", "d", "e"]
    seqs = [tuple(rng.choice(vocab) for _ in range(rng.randint(0, 6))) for _ in range(30)]
    for x in seqs:
        assert word_edit_distance(t(x), t(x)).distance == 0
    for x in seqs[:12]:
        for y in seqs[:12]:
            dxy = word_edit_distance(t(x), t(y)).distance
            assert dxy == word_edit_distance(t(y), t(x)).distance
            for z in seqs[:8]:
                assert dxy <= (word_edit_distance(t(x), t(z)).distance
                               + word_edit_distance(t(z), t(y)).distance)


def test_breakdown_consistency():
    # S + D <= N always; distance equals the component sum
    rng = random.Random(12)
    vocab = ["u", "v", "w"]
    for _ in range(100):
        ref = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 7)))
        hyp = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 7)))
        b = word_edit_distance(t(ref), t(hyp))
        assert b.substitutions + b.deletions <= b.ref_len
        assert b.distance == b.substitutions + b.deletions + b.insertions


# --- WER ---

def test_wer_identity_zero():
    assert wer(t(["x", "y"]), t(["x", "y"])).wer == 0.0


def test_wer_empty_hypothesis_is_one():
    assert wer(t(["a", "b", "c"]), t([])).wer == 1.0


def test_wer_two_thirds():
    assert wer(t(["a", "b", "c"]), t(["a", "x", "c", "d"])).wer == pytest.approx(2 / 3)


def test_wer_exceeds_one_on_insertion_flood():
    ref = t(["one", "two"])
    hyp = t(["one", "two"] + ["noise"] * 10)
    assert wer(ref, hyp).wer > 1.0


def test_wer_empty_reference_raises():
    with pytest.raises(EmptyReferenceError):
        wer(t([]), t(["a"]))


# --- dB and cosine ---

def noise_buf(seed, n=4000):
    return band_limited_noise(seed, n=n)


def test_db_self_is_zero():
    x = noise_buf(1)
    assert db_relative(x, x) == 0.0


def test_db_tenth_amplitude_is_minus_20():
    x = noise_buf(2)
    scaled = AudioBuffer(x.samples * 0.1, x.sample_rate_hz)
    assert db_relative(scaled, x) == pytest.approx(-20.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, -5.0, -17.3, -40.0])
def test_db_round_trips_gain(p):
    x = noise_buf(3)
    assert db_relative(apply_gain_db(x, p), x) == pytest.approx(p, abs=1e-9)


def test_db_silent_raises():
    x = noise_buf(4)
    silent = AudioBuffer(np.zeros(100), 16000)
    with pytest.raises(SilentSignalError):
        db_relative(silent, x)
    with pytest.raises(SilentSignalError):
        db_relative(x, silent)


def test_cosine_self_is_one():
    x = noise_buf(5)
    assert cosine_similarity(x, x) == pytest.approx(1.0, abs=1e-12)


def test_cosine_scale_invariant():
    x = noise_buf(6)
    doubled = AudioBuffer(x.samples * 2, x.sample_rate_hz)
    assert cosine_similarity(x, doubled) == pytest.approx(1.0, abs=1e-12)


def test_cosine_invariant_under_joint_scaling():
    a, b = noise_buf(6), noise_buf(8)
    base = cosine_similarity(a, b)
    a3 = AudioBuffer(a.samples * 3, a.sample_rate_hz)
    b3 = AudioBuffer(b.samples * 3, b.sample_rate_hz)
    assert cosine_similarity(a3, b3) == pytest.approx(base, abs=1e-12)


def test_cosine_orthogonal():
    a = AudioBuffer(np.array([1.0, 0.0]), 16000)
    b = AudioBuffer(np.array([0.0, 1.0]), 16000)
    assert cosine_similarity(a, b) == 0.0


def test_cosine_pads_shorter():
    a = AudioBuffer(np.array([1.0, 0.0, 0.0]), 16000)
    b = AudioBuffer(np.array([1.0]), 16000)
    assert cosine_similarity(a, b) == pytest.approx(1.0)


def test_cosine_silent_raises():
    with pytest.raises(SilentSignalError):
        cosine_similarity(AudioBuffer(np.zeros(10), 16000), noise_buf(7))


# --- aggregate stats ---

def test_mean_std_constant():
    assert mean_std([1, 1, 1]) == (1.0, 0.0)


def test_mean_std_population():
    mean, std = mean_std([0.2, 0.4])
    assert mean == pytest.approx(0.3)
    assert std == pytest.approx(0.1)


def test_mean_std_single():
    assert mean_std([0.5]) == (0.5, 0.0)


def test_mean_std_empty_raises():
    with pytest.raises(EmptyInputError):
        mean_std([])
