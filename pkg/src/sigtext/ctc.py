"""Connectionist temporal classification.

Label index 0 is the blank; alphabet symbols occupy indices ``1..|C|``.
Probability sequences are ``(T, |C|+1)`` arrays whose rows are
distributions. Transcriptions are tuples of label indices (no blanks).

All dynamic programming runs in log space.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

BLANK = 0
NEG_INF = -np.inf


class CTCError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol set; symbol ``labels[i]`` has class index ``i + 1``."""

    labels: tuple
    blank_symbol: str = "_"

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise CTCError("alphabet labels must be unique")
        if self.blank_symbol in labels:
            raise CTCError(f"blank symbol {self.blank_symbol!r} collides with a label")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        """``|C'|``, including the blank."""
        return len(self.labels) + 1

    def index(self, symbol) -> int:
        if symbol == self.blank_symbol:
            return BLANK
        try:
            return self.labels.index(symbol) + 1
        except ValueError:
            raise CTCError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, text: Iterable) -> tuple:
        return tuple(self.index(s) for s in text)

    def decode(self, ids: Iterable[int]) -> str:
        return "".join(self.blank_symbol if i == BLANK else str(self.labels[i - 1]) for i in ids)

    def symbols(self, ids: Iterable[int]) -> list:
        return [self.labels[i - 1] for i in ids if i != BLANK]


def collapse(alignment: Sequence[int], blank: int = BLANK) -> tuple:
    """Merge repeated labels, then drop blanks."""
    out = []
    prev = None
    for a in alignment:
        a = int(a)
        if a != prev and a != blank:
            out.append(a)
        prev = a
    return tuple(out)


def required_length(label: Sequence[int]) -> int:
    """Minimum number of frames that can emit ``label``."""
    repeats = sum(1 for a, b in zip(label, label[1:]) if a == b)
    return len(label) + repeats


def is_feasible(label: Sequence[int], T: int) -> bool:
    return required_length(label) <= T


def _log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


def _extended(label: Sequence[int], blank: int = BLANK) -> np.ndarray:
    ext = np.full(2 * len(label) + 1, blank, dtype=np.int64)
    ext[1::2] = label
    return ext


def _skip_mask(ext: np.ndarray, blank: int = BLANK) -> np.ndarray:
    """``skip[s]`` is True when state ``s`` may be entered from ``s - 2``."""
    skip = np.zeros(ext.size, dtype=bool)
    skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])
    return skip


def forward_backward(log_probs: np.ndarray, label: Sequence[int], blank: int = BLANK):
    """Log forward and backward variables over the blank-interleaved label.

    ``log_alpha[t, s]`` includes the emission at ``t``; ``log_beta[t, s]`` is
    the log probability of completing the label from state ``s`` at ``t``
    (emissions after ``t`` only). Returns ``(log_alpha, log_beta, log_p)``.
    """
    log_probs = np.asarray(log_probs, dtype=np.float64)
    T = log_probs.shape[0]
    ext = _extended(label, blank)
    S = ext.size
    skip = _skip_mask(ext, blank)
    emit = log_probs[:, ext]  # (T, S)

    log_alpha = np.full((T, S), NEG_INF)
    log_alpha[0, 0] = emit[0, 0]
    if S > 1:
        log_alpha[0, 1] = emit[0, 1]
    for t in range(1, T):
        prev = log_alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        log_alpha[t] = acc + emit[t]

    log_beta = np.full((T, S), NEG_INF)
    log_beta[T - 1, S - 1] = 0.0
    if S > 1:
        log_beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = log_beta[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        log_beta[t] = acc

    tail = log_alpha[T - 1, S - 1]
    if S > 1:
        tail = np.logaddexp(tail, log_alpha[T - 1, S - 2])
    return log_alpha, log_beta, float(tail)


def _check_probs(probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] < 1:
        raise CTCError(f"probability sequence must be (T, K) with T >= 1, got {probs.shape}")
    return probs


def transcription_logprob(probs, label: Sequence[int], blank: int = BLANK) -> float:
    """``log p(label | probs)`` summed over all alignments; ``-inf`` if infeasible."""
    probs = _check_probs(probs)
    label = tuple(int(x) for x in label)
    if not is_feasible(label, probs.shape[0]):
        return NEG_INF
    return forward_backward(_log(probs), label, blank)[2]


def brute_force_logprob(probs, label: Sequence[int], blank: int = BLANK, limit: int = 10 ** 7) -> float:
    """Enumerate every alignment and sum those that collapse to ``label``."""
    probs = _check_probs(probs)
    T, K = probs.shape
    if K ** T > limit:
        raise CTCError(f"{K}**{T} alignments exceeds enumeration limit {limit}")
    label = tuple(int(x) for x in label)
    total = 0.0
    for pi in itertools.product(range(K), repeat=T):
        if collapse(pi, blank) == label:
            total += math.prod(probs[t, k] for t, k in enumerate(pi))
    return math.log(total) if total > 0 else NEG_INF


def brute_force_distribution(probs, blank: int = BLANK, limit: int = 10 ** 7) -> dict:
    """Probability of every reachable transcription, by enumeration."""
    probs = _check_probs(probs)
    T, K = probs.shape
    if K ** T > limit:
        raise CTCError(f"{K}**{T} alignments exceeds enumeration limit {limit}")
    dist: dict = {}
    for pi in itertools.product(range(K), repeat=T):
        key = collapse(pi, blank)
        dist[key] = dist.get(key, 0.0) + math.prod(probs[t, k] for t, k in enumerate(pi))
    return dist


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.exp(log_softmax(logits, axis))


def ctc_loss_and_grad(logits, label: Sequence[int], blank: int = BLANK):
    """Negative log-likelihood of ``label`` and its gradient w.r.t. pre-softmax ``logits``."""
    logits = np.asarray(logits, dtype=np.float64)
    label = tuple(int(x) for x in label)
    T, K = logits.shape
    if not is_feasible(label, T):
        raise CTCError(f"label of length {len(label)} needs {required_length(label)} frames, have {T}")
    logp = log_softmax(logits)
    log_alpha, log_beta, ll = forward_backward(logp, label, blank)
    if not np.isfinite(ll):
        raise CTCError("label has zero probability under the given distribution")
    ext = _extended(label, blank)
    post = np.exp(log_alpha + log_beta - ll)  # (T, S) state occupancy
    occ = np.zeros((T, K))
    np.add.at(occ.T, ext, post.T)
    return -ll, np.exp(logp) - occ


def ctc_gradient(logits, label: Sequence[int], blank: int = BLANK) -> np.ndarray:
    return ctc_loss_and_grad(logits, label, blank)[1]


def ctc_loss(logits, label: Sequence[int], blank: int = BLANK) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    return -transcription_logprob(softmax(logits), label, blank)


# ---------------------------------------------------------------------------
# decoding

def best_path_decode(probs, blank: int = BLANK) -> tuple:
    """Per-frame argmax (ties to the lowest index) followed by collapse."""
    probs = _check_probs(probs)
    return collapse(np.argmax(probs, axis=1), blank)


@dataclass
class _Beam:
    log_b: float = NEG_INF
    log_nb: float = NEG_INF
    lm: float = 0.0

    @property
    def total(self) -> float:
        return float(np.logaddexp(self.log_b, self.log_nb))


def prefix_beam_decode(probs, beam_width: int = 8, lm=None, alpha: float = 0.0, beta: float = 0.0,
                       alphabet: Alphabet | None = None, blank: int = BLANK, use_eos: bool = True) -> tuple:
    """CTC prefix beam search with optional shallow fusion of an n-gram model.

    Candidate score is ``log p_ctc + alpha * log p_lm + beta * len(prefix)``.
    The language model is queried only when a symbol is appended (and, with
    ``use_eos``, once for the end marker when ranking final prefixes). ``lm``
    must provide ``logprob(token, context)`` over alphabet symbols; without
    an ``alphabet`` the raw label indices are passed as tokens.
    """
    if beam_width < 1:
        raise CTCError("beam_width must be >= 1")
    probs = _check_probs(probs)
    logp = _log(probs)
    T, K = logp.shape
    symbols = [i for i in range(K) if i != blank]

    def token(i):
        return alphabet.labels[i - 1] if alphabet is not None else i

    def lm_step(prefix, c):
        if lm is None or alpha == 0.0:
            return 0.0
        ctx = tuple(token(i) for i in prefix[-2:])
        return lm.logprob(token(c), ctx)

    def rank(item):
        prefix, beam = item
        return (-(beam.total + alpha * beam.lm + beta * len(prefix)), prefix)

    beams = {(): _Beam(log_b=0.0)}
    for t in range(T):
        row = logp[t]
        nxt: dict = {}

        def get(prefix, lm_score):
            b = nxt.get(prefix)
            if b is None:
                b = nxt[prefix] = _Beam(lm=lm_score)
            return b

        for prefix, beam in beams.items():
            total = beam.total
            stay = get(prefix, beam.lm)
            stay.log_b = np.logaddexp(stay.log_b, total + row[blank])
            if prefix:
                last = prefix[-1]
                stay.log_nb = np.logaddexp(stay.log_nb, beam.log_nb + row[last])
            for c in symbols:
                if row[c] == NEG_INF:
                    continue
                new = prefix + (c,)
                ext = nxt.get(new)
                if ext is None:
                    ext = get(new, beam.lm + lm_step(prefix, c))
                if prefix and c == prefix[-1]:
                    ext.log_nb = np.logaddexp(ext.log_nb, beam.log_b + row[c])
                else:
                    ext.log_nb = np.logaddexp(ext.log_nb, total + row[c])
        ranked = sorted(nxt.items(), key=rank)
        beams = dict(ranked[:beam_width])

    def final_rank(item):
        prefix, beam = item
        lm_total = beam.lm
        if lm is not None and alpha != 0.0 and use_eos and hasattr(lm, "eos"):
            lm_total += lm.logprob(lm.eos, tuple(token(i) for i in prefix[-2:]))
        return (-(beam.total + alpha * lm_total + beta * len(prefix)), prefix)

    return min(beams.items(), key=final_rank)[0]
