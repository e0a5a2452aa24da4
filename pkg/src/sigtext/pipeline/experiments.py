"""Seeded desk-scale experiments: toy end-to-end run and paired ablations."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..ctc import Alphabet
from ..net import ImplicitLM, LMConfig, MCFCRN, ModelConfig
from ..ngram import TrigramModel
from .data import (Dataset, FeatureConfig, build_dataset, chain_corpus, make_ordered_set,
                   make_recognizer_trainset, random_corpus, split)
from .evaluate import DecodeConfig, evaluate
from .glyphs import digit_glyphs, homoglyph_glyphs
from .train import TrainConfig, recognizer_probs, train_implicit_lm, train_recognizer

log = logging.getLogger(__name__)

TOY_TRUNK = "conv3:8 pool2x2 conv3:16 pool2x2 conv3:16"


def toy_model_config(n_classes: int, in_channels: int = 7, branch_kernels=(3, 5, 7)) -> ModelConfig:
    return ModelConfig(in_channels=in_channels, trunk=TOY_TRUNK, branch_kernels=tuple(branch_kernels),
                       branch_channels=16, hidden=32, res_layers=2, n_classes=n_classes)


@dataclass
class ToyResult:
    cr: float
    ar: float
    seconds: float
    history: list
    model: MCFCRN = field(repr=False, default=None)


def toy_end_to_end(seed: int = 0, n_samples: int = 2000, epochs: int = 6, n_test: int = 300,
                   branch_kernels=(3, 5, 7)) -> ToyResult:
    """10 digit-like classes, texts of 3-8 symbols, Sig2 features, 3-context model, greedy decoding."""
    t0 = time.perf_counter()
    glyphs = digit_glyphs()
    alphabet = Alphabet(glyphs.alphabet)
    corpus = random_corpus(glyphs.alphabet, 5000, seed=seed)
    data = build_dataset(make_recognizer_trainset(corpus, glyphs, n_samples, seed=seed), alphabet)
    tr, va = split(len(data), 0.1, seed)
    test_corpus = random_corpus(glyphs.alphabet, n_test, seed=seed + 10_000)
    test = build_dataset(make_ordered_set(test_corpus, glyphs, n_test, seed=seed + 20_000), alphabet,
                         FeatureConfig(max_width=600))
    model = MCFCRN(toy_model_config(alphabet.size, branch_kernels=branch_kernels), np.random.default_rng(seed))
    res = train_recognizer(model, data.subset(tr), data.subset(va), TrainConfig(epochs=epochs, seed=seed))
    report = evaluate(model, test, alphabet)
    return ToyResult(report.cr, report.ar, time.perf_counter() - t0, res.history, model)


# ---------------------------------------------------------------------------
# ablations: paired runs that share data and budget, differing in one factor

def hard_digit_glyphs():
    """Noisier glyphs with random pen-down connectors between neighbours."""
    return digit_glyphs(noise=0.02, connector_prob=0.5, shear_range=0.3, rotation_deg=10.0)


@dataclass
class AblationData:
    alphabet: Alphabet
    train: Dataset
    val: Dataset
    test: Dataset


def ablation_data(seed: int, n_train: int = 1000, n_test: int = 300) -> AblationData:
    glyphs = hard_digit_glyphs()
    alphabet = Alphabet(glyphs.alphabet)
    corpus = random_corpus(glyphs.alphabet, 5000, seed=seed)
    data = build_dataset(make_recognizer_trainset(corpus, glyphs, n_train, seed=seed), alphabet)
    tr, va = split(len(data), 0.1, seed)
    test_corpus = random_corpus(glyphs.alphabet, n_test, seed=seed + 10_000)
    test = build_dataset(make_ordered_set(test_corpus, glyphs, n_test, seed=seed + 20_000), alphabet,
                         FeatureConfig(max_width=600))
    return AblationData(alphabet, data.subset(tr), data.subset(va), test)


def _run_variant(d: AblationData, seed: int, depth: int, branch_kernels, epochs: int) -> float:
    channels = 2 ** (depth + 1) - 1
    model = MCFCRN(toy_model_config(d.alphabet.size, channels, branch_kernels), np.random.default_rng(seed))
    train_recognizer(model, d.train.truncated(depth), d.val.truncated(depth), TrainConfig(epochs=epochs, seed=seed))
    return evaluate(model, d.test.truncated(depth), d.alphabet).cr


def signature_ablation(seed: int, epochs: int = 3, data: AblationData | None = None) -> dict:
    """Test CR of Sig0 vs Sig2 features, 3-context model, same data and budget."""
    d = data or ablation_data(seed)
    return {f"sig{k}": _run_variant(d, seed, k, (3, 5, 7), epochs) for k in (0, 2)}


def context_ablation(seed: int, epochs: int = 3, data: AblationData | None = None) -> dict:
    """Test CR of one-context (k=3) vs three-context (k=3,5,7) models on Sig2 features."""
    d = data or ablation_data(seed)
    return {"1c": _run_variant(d, seed, 2, (3,), epochs), "3c": _run_variant(d, seed, 2, (3, 5, 7), epochs)}


@dataclass
class LMAblationResult:
    raw: float
    implicit_bi: float
    implicit_uni: float
    trigram_beam: float
    greedy: float


def language_model_ablation(seed: int, n_train: int = 1500, n_lm: int = 1500, n_test: int = 300,
                            rec_epochs: int = 4, lm_epochs: int = 15, beam_width: int = 8,
                            alpha: float = 1.0) -> LMAblationResult:
    """Recognizer on shuffled homoglyph text, then LMs on corpus-ordered text.

    The homoglyph pairs b/i and e/j can only be resolved from the sequence
    context of the bigram-constrained corpus.
    """
    glyphs = homoglyph_glyphs()
    alphabet = Alphabet(glyphs.alphabet)
    corpus = chain_corpus(5000, seed=seed)
    rec = build_dataset(make_recognizer_trainset(corpus, glyphs, n_train, seed=seed), alphabet)
    tr, va = split(len(rec), 0.1, seed)
    model = MCFCRN(toy_model_config(alphabet.size), np.random.default_rng(seed))
    train_recognizer(model, rec.subset(tr), rec.subset(va), TrainConfig(epochs=rec_epochs, seed=seed))

    ordered = build_dataset(make_ordered_set(corpus, glyphs, n_lm, seed=seed + 1), alphabet)
    ltr, lva = split(len(ordered), 0.1, seed)
    test_corpus = chain_corpus(n_test, seed=seed + 10_000)
    test = build_dataset(make_ordered_set(test_corpus, glyphs, n_test, seed=seed + 20_000), alphabet,
                         FeatureConfig(max_width=600))
    probs = recognizer_probs(model, test.maps)

    scores = {}
    for name, bidir in (("bi", True), ("uni", False)):
        lm = ImplicitLM(LMConfig(n_classes=alphabet.size, embed_dim=32, hidden=32, layers=1, bidirectional=bidir),
                        np.random.default_rng(seed))
        train_implicit_lm(lm, model, ordered.subset(ltr), ordered.subset(lva), TrainConfig(epochs=lm_epochs, seed=seed))
        scores[name] = evaluate(model, test, alphabet, DecodeConfig("lm"), lm=lm, probs=probs).cr

    ngram = TrigramModel.train(corpus, vocabulary=alphabet.labels)
    raw = evaluate(model, test, alphabet, DecodeConfig("raw"), probs=probs).cr
    beam = evaluate(model, test, alphabet, DecodeConfig("beam", beam_width, alpha), ngram=ngram, probs=probs).cr
    return LMAblationResult(raw=raw, implicit_bi=scores["bi"], implicit_uni=scores["uni"], trigram_beam=beam,
                            greedy=raw)
