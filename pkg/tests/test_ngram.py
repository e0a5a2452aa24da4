import math

import numpy as np
import pytest

from sigtext.ngram import BOS, EOS, OutOfVocabularyError, TrigramModel, read_corpus


def test_count_dominance():
    m = TrigramModel.train(["ab", "ab", "ab"])
    assert m.prob("b", ["a"]) > m.prob("a", ["a"])


def test_hand_computed_witten_bell():
    # events: (<s> <s> a) (<s> a b) (a b a) (b a </s>) | (<s> <s> a) (<s> a b) (a b </s>)
    # unigram a:3 b:2 </s>:2, 3 types:  p1(a) = (3 + 3/3) / (7 + 3) = 0.4
    # bigram after b: {a:1, </s>:1}:     p2(a|b) = (1 + 2 * 0.4) / (2 + 2) = 0.45
    # trigram after (a, b): {a:1, </s>:1}: p3 = (1 + 2 * 0.45) / (2 + 2) = 0.475
    m = TrigramModel.train(["aba", "ab"])
    assert abs(m.prob("a", ["a", "b"]) - 0.475) <= 1e-12
    assert abs(m.prob("a", ["b", "b"]) - 0.45) <= 1e-12
    assert abs(m.logprob("a", ["a", "b"]) - math.log(0.475)) <= 1e-12


def test_unseen_context_is_unigram():
    m = TrigramModel.train(["aba", "ab"], vocabulary="abc")
    for w in m.predicted:
        assert m.prob(w, ["c", "c"]) == m._p_unigram(w)
    assert m.context_weight(["c", "c"]) == 0.0


def test_single_token_corpus():
    m = TrigramModel.train(["a" * 50])
    # all mass not on "a" is the smoothing share plus the end marker
    assert m._p_unigram("a") == pytest.approx(51 / 53, abs=1e-15)
    assert m.prob("a", ["a", "a"]) > 0.95


def test_normalization_random_contexts():
    rng = np.random.default_rng(0)
    vocab = list("abcdef")
    corpus = ["".join(rng.choice(vocab[:5], size=rng.integers(1, 9))) for _ in range(200)]
    m = TrigramModel.train(corpus, vocabulary=vocab)
    contexts = [[], [BOS], [BOS, BOS]]
    contexts += [list(rng.choice(vocab + [BOS], size=2)) for _ in range(100)]
    for ctx in contexts:
        total = sum(math.exp(m.logprob(w, ctx)) for w in m.predicted)
        assert abs(total - 1.0) <= 1e-9
        assert all(m.prob(w, ctx) > 0 for w in m.predicted)


def test_perplexity_below_uniform():
    rng = np.random.default_rng(1)
    corpus = ["".join(rng.choice(list("abcd"), size=rng.integers(2, 8), p=[0.6, 0.2, 0.1, 0.1]))
              for _ in range(300)]
    m = TrigramModel.train(corpus)
    uniform = len(m.predicted)
    assert m.perplexity(corpus) < uniform
    with pytest.raises(ValueError):
        m.perplexity([])


def test_oov_errors():
    with pytest.raises(OutOfVocabularyError) as exc:
        TrigramModel.train(["abz"], vocabulary="ab")
    assert exc.value.tokens == ["z"]
    m = TrigramModel.train(["ab"])
    with pytest.raises(OutOfVocabularyError):
        m.logprob("q", ["a"])
    with pytest.raises(ValueError):
        TrigramModel.train([])


def test_more_text_keeps_probabilities_positive():
    m = TrigramModel.train(["ab"])
    bigger = TrigramModel.train(["ab"] + ["b" * 30] * 50)
    assert bigger.prob("a") > 0 and m.prob("a") > 0


def test_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    corpus = ["".join(rng.choice(list("xyzw"), size=rng.integers(1, 7))) for _ in range(50)]
    m = TrigramModel.train(corpus, vocabulary="wxyzv")
    path = tmp_path / "m.ngm"
    m.save(path)
    raw = path.read_bytes()
    assert raw[:4] == b"NGM1"
    back = TrigramModel.load(path)
    assert back.to_bytes() == raw
    assert back.symbols == m.symbols
    for ctx in (["x", "y"], ["v"], []):
        for w in m.predicted:
            assert back.prob(w, ctx) == m.prob(w, ctx)


def test_bad_model_file():
    with pytest.raises(ValueError):
        TrigramModel.from_bytes(b"XXXX" + bytes(8))


def test_read_corpus(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("abc\n\nde\n", encoding="utf-8")
    assert [list(x) for x in read_corpus(p)] == [list("abc"), list("de")]


def test_sentence_logprob_includes_end_marker():
    m = TrigramModel.train(["ab"])
    expect = m.logprob("a", []) + m.logprob("b", ["a"]) + m.logprob(EOS, ["a", "b"])
    assert m.sentence_logprob("ab") == pytest.approx(expect, abs=1e-15)
