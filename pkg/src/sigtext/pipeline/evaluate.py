"""Decoder chains and dataset evaluation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ctc import Alphabet, best_path_decode, prefix_beam_decode
from ..net import ImplicitLM, MCFCRN
from ..ngram import TrigramModel
from .data import Dataset
from .metrics import EvalReport

CHAINS = ("raw", "lm", "beam", "lm+beam")


@dataclass
class DecodeConfig:
    chain: str = "raw"
    beam_width: int = 8
    alpha: float = 1.0
    beta: float = 0.0


def decode(probs: np.ndarray, alphabet: Alphabet, cfg: DecodeConfig = DecodeConfig(),
           lm: ImplicitLM | None = None, ngram: TrigramModel | None = None) -> str:
    """Decode one recognizer output ``(T, |C'|)`` through the configured chain."""
    if cfg.chain not in CHAINS:
        raise ValueError(f"unknown decoder chain {cfg.chain!r}; choose from {CHAINS}")
    if cfg.chain.startswith("lm"):
        if lm is None:
            raise ValueError(f"chain {cfg.chain!r} needs an implicit LM")
        probs = lm.predict(probs[None])[0]
    if cfg.chain.endswith("beam"):
        if ngram is None:
            raise ValueError(f"chain {cfg.chain!r} needs a trigram model")
        ids = prefix_beam_decode(probs, cfg.beam_width, ngram, cfg.alpha, cfg.beta, alphabet=alphabet)
    else:
        ids = best_path_decode(probs)
    return "".join(alphabet.symbols(ids))


def check_alphabet(alphabet: Alphabet, model: MCFCRN, lm: ImplicitLM | None = None,
                   ngram: TrigramModel | None = None) -> None:
    if model.config.n_classes != alphabet.size:
        raise ValueError(f"model predicts {model.config.n_classes} classes, alphabet has {alphabet.size}")
    if lm is not None and lm.config.n_classes != alphabet.size:
        raise ValueError(f"implicit LM has {lm.config.n_classes} classes, alphabet has {alphabet.size}")
    if ngram is not None and set(ngram.symbols) != set(alphabet.labels):
        raise ValueError("trigram vocabulary does not match the alphabet")


def evaluate(model: MCFCRN, data: Dataset, alphabet: Alphabet, cfg: DecodeConfig = DecodeConfig(),
             lm: ImplicitLM | None = None, ngram: TrigramModel | None = None, probs=None) -> EvalReport:
    """Decode every sample and accumulate CR/AR statistics.

    ``probs`` may carry precomputed recognizer outputs to avoid repeating
    the forward pass when comparing chains.
    """
    check_alphabet(alphabet, model, lm, ngram)
    report = EvalReport()
    for i, (m, text) in enumerate(zip(data.maps, data.texts)):
        p = probs[i] if probs is not None else model.predict(m[None])[0]
        report.add(text, decode(p, alphabet, cfg, lm, ngram))
    return report
