import itertools
import math

import numpy as np
import pytest

from sigtext.ctc import (Alphabet, CTCError, best_path_decode, brute_force_distribution, brute_force_logprob,
                         collapse, ctc_gradient, ctc_loss, ctc_loss_and_grad, is_feasible, prefix_beam_decode,
                         required_length, softmax, transcription_logprob)
from sigtext.ngram import TrigramModel

from _support import numeric_grad, rel_err


def random_probs(rng, T, K):
    return softmax(rng.normal(scale=2.0, size=(T, K)))


def all_labels(K, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(range(1, K), repeat=n)


def test_alphabet():
    a = Alphabet(("t", "r", "e"))
    assert a.size == 4 and a.encode("tree") == (1, 2, 3, 3)
    assert a.decode((0, 1, 1, 0, 2)) == "_tt_r"
    with pytest.raises(CTCError):
        Alphabet(("a", "a"))
    with pytest.raises(CTCError):
        a.index("x")


def test_collapse_examples():
    a = Alphabet(("t", "r", "e"))
    assert a.symbols(collapse(a.encode("_tt_r_ee_e"))) == list("tree")
    assert collapse((0, 0, 0)) == ()
    assert collapse((1, 1, 0, 1)) == (1, 1)


def test_collapse_idempotent_on_clean_strings():
    for s in [(1, 2, 3), (2, 1, 2), ()]:
        assert collapse(s) == s and collapse(collapse(s)) == s


def test_feasibility():
    assert required_length((1, 1, 2)) == 4
    assert is_feasible((1, 2), 2) and not is_feasible((1, 1), 2)


def test_uniform_two_frame_example():
    p = np.full((2, 2), 0.5)
    assert math.exp(transcription_logprob(p, (1,))) == pytest.approx(0.75, abs=1e-15)
    assert math.exp(transcription_logprob(p, ())) == pytest.approx(0.25, abs=1e-15)
    assert transcription_logprob(p, (1, 1)) == -math.inf
    assert math.exp(brute_force_logprob(p, (1,))) == pytest.approx(0.75, abs=1e-15)
    assert brute_force_logprob(p, (1, 1)) == -math.inf


def test_brute_force_basics():
    rng = np.random.default_rng(0)
    p = random_probs(rng, 1, 4)
    for c in (1, 2, 3):
        assert math.exp(brute_force_logprob(p, (c,))) == pytest.approx(p[0, c], rel=1e-14)
    q = random_probs(rng, 4, 3)
    assert sum(brute_force_distribution(q).values()) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(CTCError):
        brute_force_logprob(np.full((15, 4), 0.25), (1,))


def test_random_3x3_oracle():
    p = random_probs(np.random.default_rng(1), 3, 3)
    for label in all_labels(3, 3):
        bf, fb = brute_force_logprob(p, label), transcription_logprob(p, label)
        if bf == -math.inf:
            assert fb == -math.inf
        else:
            assert abs(bf - fb) <= 1e-10


def test_oracle_equivalence_and_normalization_small():
    rng = np.random.default_rng(2)
    for T in range(1, 6):
        for K in (2, 3, 4):
            p = random_probs(rng, T, K)
            dist = brute_force_distribution(p)
            total = 0.0
            for label in all_labels(K, T):
                lp = transcription_logprob(p, label)
                if label in dist:
                    assert abs(lp - math.log(dist[label])) <= 1e-10
                    total += math.exp(lp)
                else:
                    assert lp == -math.inf or math.exp(lp) < 1e-300
            assert abs(total - 1.0) <= 1e-8


def test_gradient_finite_differences():
    rng = np.random.default_rng(3)
    logits = rng.normal(size=(5, 4))
    label = (1, 3, 3)
    g = ctc_gradient(logits, label)
    num = numeric_grad(lambda: ctc_loss(logits, label), logits)
    assert rel_err(g, num) < 1e-4
    assert np.abs(g.sum(axis=1)).max() <= 1e-9


def test_loss_shift_invariance():
    rng = np.random.default_rng(4)
    logits = rng.normal(size=(6, 3))
    shifted = logits + rng.normal(size=(6, 1)) * 10
    assert ctc_loss(shifted, (1, 2)) == pytest.approx(ctc_loss(logits, (1, 2)), abs=1e-12)
    assert ctc_loss_and_grad(logits, (1, 2))[0] == pytest.approx(ctc_loss(logits, (1, 2)), abs=1e-12)


def test_gradient_infeasible_label_errors():
    with pytest.raises(CTCError):
        ctc_gradient(np.zeros((2, 3)), (1, 1))


def test_tiny_probabilities_stay_finite():
    p = np.full((8, 4), 1e-30)
    p[:, 0] = 1 - 3e-30
    lp = transcription_logprob(p, (1, 2, 3))
    assert np.isfinite(lp)
    assert abs(lp - brute_force_logprob(p, (1, 2, 3))) < 1e-6 * abs(lp)
    logits = np.log(p)
    loss, grad = ctc_loss_and_grad(logits, (1, 2, 3))
    assert np.isfinite(loss) and np.all(np.isfinite(grad))


def test_best_path_examples():
    onehot = np.eye(3)[[0, 1, 0, 2]]
    assert best_path_decode(onehot) == (1, 2)
    assert best_path_decode(np.full((4, 3), 1 / 3)) == ()
    assert best_path_decode(np.full((2, 2), 0.5)) == ()


def test_beam_width_one_matches_greedy():
    rng = np.random.default_rng(5)
    for _ in range(20):
        logits = rng.normal(size=(8, 4)) * 6
        p = softmax(logits)
        assert prefix_beam_decode(p, beam_width=1) == best_path_decode(p)


def test_large_beam_finds_most_probable_transcription():
    rng = np.random.default_rng(6)
    for _ in range(30):
        T = int(rng.integers(1, 5))
        p = random_probs(rng, T, 3)
        dist = brute_force_distribution(p)
        best = max(dist.values())
        got = prefix_beam_decode(p, beam_width=64)
        assert dist[got] == pytest.approx(best, rel=1e-12)


def test_beam_rejects_zero_width():
    with pytest.raises(CTCError):
        prefix_beam_decode(np.full((2, 2), 0.5), beam_width=0)


def test_bigram_lm_changes_decision():
    alphabet = Alphabet(("a", "b", "e"))
    lm = TrigramModel.train(["ab"] * 20 + ["e"], vocabulary=alphabet.labels)
    p = np.array([[0.02, 0.96, 0.01, 0.01],
                  [0.02, 0.01, 0.45, 0.52]])
    no_lm = prefix_beam_decode(p, 8, lm, alpha=0.0, alphabet=alphabet)
    fused = prefix_beam_decode(p, 8, lm, alpha=1.0, alphabet=alphabet)
    assert alphabet.symbols(no_lm) == ["a", "e"]
    assert alphabet.symbols(fused) == ["a", "b"]


def test_beam_length_bonus():
    p = np.array([[0.9, 0.1]] * 3)
    assert prefix_beam_decode(p, 8) == ()
    assert prefix_beam_decode(p, 8, beta=2.0) != ()
