"""Character trigram language model with interpolated Witten-Bell smoothing.

    p(w | u v) = (c(u v w) + N1+(u v .) p(w | v)) / (c(u v .) + N1+(u v .))

and likewise for the bigram level, bottoming out in a unigram level that
is itself interpolated with the uniform distribution over the vocabulary,
so every in-vocabulary token gets non-zero probability. A context that was
never seen contributes nothing and the estimate falls through to the next
lower order.
"""
from __future__ import annotations

import math
import struct
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
NGM_MAGIC = b"NGM1"
NGM_VERSION = 1


class OutOfVocabularyError(KeyError):
    def __init__(self, tokens):
        self.tokens = sorted(set(map(str, tokens)))
        super().__init__(f"out-of-vocabulary tokens: {', '.join(self.tokens)}")


class TrigramModel:
    """Interpolated Witten-Bell trigram model over single-character tokens."""

    eos = EOS
    bos = BOS

    def __init__(self, vocabulary: Sequence[str]):
        vocab = list(dict.fromkeys(vocabulary))
        for special in (BOS, EOS):
            if special in vocab:
                vocab.remove(special)
        self.symbols = tuple(vocab)
        # predicted vocabulary: symbols plus the end marker
        self.predicted = self.symbols + (EOS,)
        self._pset = frozenset(self.predicted)
        self.unigrams: Counter = Counter()
        self.bigrams: dict = defaultdict(Counter)
        self.trigrams: dict = defaultdict(Counter)
        self._uni_total = 0

    # -- training ---------------------------------------------------------
    @classmethod
    def train(cls, corpus: Iterable[Sequence[str]], vocabulary: Sequence[str] | None = None) -> "TrigramModel":
        corpus = [list(line) for line in corpus]
        if not any(corpus):
            raise ValueError("cannot train on an empty corpus")
        if vocabulary is None:
            vocabulary = sorted({t for line in corpus for t in line})
        model = cls(vocabulary)
        oov = {t for line in corpus for t in line if t not in model._pset or t == EOS}
        if oov:
            raise OutOfVocabularyError(oov)
        for line in corpus:
            model._add(line)
        return model

    def _add(self, tokens: Sequence[str]) -> None:
        seq = [BOS, BOS] + list(tokens) + [EOS]
        for i in range(2, len(seq)):
            u, v, w = seq[i - 2], seq[i - 1], seq[i]
            self.unigrams[w] += 1
            self.bigrams[v][w] += 1
            self.trigrams[(u, v)][w] += 1
        self._uni_total = sum(self.unigrams.values())

    # -- queries ----------------------------------------------------------
    def _check(self, w):
        if w not in self._pset:
            raise OutOfVocabularyError([w])

    def _p_unigram(self, w) -> float:
        types = len(self.unigrams)
        return (self.unigrams.get(w, 0) + types / len(self.predicted)) / (self._uni_total + types)

    @staticmethod
    def _interp(counts: Counter | None, w, lower: float) -> float:
        if not counts:
            return lower
        total = sum(counts.values())
        types = len(counts)
        return (counts.get(w, 0) + types * lower) / (total + types)

    def context_weight(self, context: Sequence[str]) -> float:
        """Witten-Bell weight ``c(h) / (c(h) + N1+(h .))`` of the highest-order context."""
        counts = self._context_counts(tuple(context))
        if not counts:
            return 0.0
        total = sum(counts.values())
        return total / (total + len(counts))

    def _context_counts(self, context):
        if len(context) >= 2:
            return self.trigrams.get(tuple(context[-2:]))
        if len(context) == 1:
            return self.bigrams.get(context[-1])
        return None

    def prob(self, w, context: Sequence[str] = ()) -> float:
        """``p(w | context)`` using at most the last two context tokens.

        A context shorter than two tokens is treated as sentence-initial
        (padded with ``<s>``).
        """
        self._check(w)
        ctx = tuple(context)[-2:]
        ctx = (BOS,) * (2 - len(ctx)) + ctx
        p1 = self._p_unigram(w)
        p2 = self._interp(self.bigrams.get(ctx[1]), w, p1)
        return self._interp(self.trigrams.get(ctx), w, p2)

    def logprob(self, w, context: Sequence[str] = ()) -> float:
        """Natural-log probability of ``w`` after ``context``."""
        return math.log(self.prob(w, context))

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        seq = [BOS, BOS] + list(tokens) + [EOS]
        return sum(self.logprob(seq[i], seq[i - 2:i]) for i in range(2, len(seq)))

    def perplexity(self, text: Iterable[Sequence[str]]) -> float:
        """``exp`` of the mean per-token negative log-likelihood, end markers included."""
        lines = [list(x) for x in text]
        n = sum(len(x) + 1 for x in lines)
        if not lines or n == 0:
            raise ValueError("perplexity of empty text is undefined")
        return math.exp(-sum(self.sentence_logprob(x) for x in lines) / n)

    # -- serialisation ----------------------------------------------------
    def to_bytes(self) -> bytes:
        vocab = [BOS, EOS] + list(self.symbols)
        ids = {t: i for i, t in enumerate(vocab)}
        out = [NGM_MAGIC, struct.pack("<II", NGM_VERSION, len(vocab))]
        for t in vocab:
            raw = t.encode("utf-8")
            out.append(struct.pack("<H", len(raw)) + raw)
        rows = []
        for w, c in sorted(self.unigrams.items(), key=lambda kv: ids[kv[0]]):
            rows.append((1, (ids[w],), c))
        for v in sorted(self.bigrams, key=ids.__getitem__):
            for w, c in sorted(self.bigrams[v].items(), key=lambda kv: ids[kv[0]]):
                rows.append((2, (ids[v], ids[w]), c))
        for uv in sorted(self.trigrams, key=lambda k: (ids[k[0]], ids[k[1]])):
            for w, c in sorted(self.trigrams[uv].items(), key=lambda kv: ids[kv[0]]):
                rows.append((3, (ids[uv[0]], ids[uv[1]], ids[w]), c))
        out.append(struct.pack("<I", len(rows)))
        for order, key, c in rows:
            out.append(struct.pack(f"<B{order}IQ", order, *key, c))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "TrigramModel":
        if raw[:4] != NGM_MAGIC:
            raise ValueError("not an NGM1 model file")
        version, nvocab = struct.unpack_from("<II", raw, 4)
        if version != NGM_VERSION:
            raise ValueError(f"unsupported NGM version {version}")
        pos = 12
        vocab = []
        for _ in range(nvocab):
            (n,) = struct.unpack_from("<H", raw, pos)
            pos += 2
            vocab.append(raw[pos:pos + n].decode("utf-8"))
            pos += n
        model = cls(vocab[2:])
        (nrows,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        for _ in range(nrows):
            order = raw[pos]
            fmt = f"<B{order}IQ"
            vals = struct.unpack_from(fmt, raw, pos)
            pos += struct.calcsize(fmt)
            key = [vocab[i] for i in vals[1:-1]]
            c = vals[-1]
            if order == 1:
                model.unigrams[key[0]] = c
            elif order == 2:
                model.bigrams[key[0]][key[1]] = c
            else:
                model.trigrams[(key[0], key[1])][key[2]] = c
        model._uni_total = sum(model.unigrams.values())
        return model

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "TrigramModel":
        return cls.from_bytes(Path(path).read_bytes())


def read_corpus(path) -> list[str]:
    """One sample per line; blank lines are skipped."""
    return [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line]


def train(corpus: Iterable[Sequence[str]], vocabulary: Sequence[str] | None = None) -> TrigramModel:
    return TrigramModel.train(corpus, vocabulary)


def logprob(model: TrigramModel, w, context: Sequence[str] = ()) -> float:
    return model.logprob(w, context)


def perplexity(model: TrigramModel, text: Iterable[Sequence[str]]) -> float:
    return model.perplexity(text)
