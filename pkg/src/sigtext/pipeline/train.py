"""Training loops for the recognizer and the implicit language model."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..ctc import BLANK, best_path_decode
from ..net import (ImplicitLM, MCFCRN, NumericalError, add_weight_decay, clip_grad_norm, ctc_batch_loss,
                   make_optimizer)
from ..net.model import KVConfig
from .data import Dataset
from .metrics import EvalReport

log = logging.getLogger(__name__)


@dataclass
class TrainConfig(KVConfig):
    epochs: int = 20
    batch_size: int = 16
    optimizer: str = "adadelta"
    rho: float = 0.9
    eps: float = 1e-6
    lr: float = 0.01
    weight_decay: float = 1e-4
    clip: float = 5.0
    seed: int = 0
    # stop early once validation CR reaches this value (0 disables)
    target_cr: float = 0.0


@dataclass
class TrainResult:
    history: list = field(default_factory=list)  # dicts: epoch, loss, val_cr, seconds
    best_epoch: int = -1
    best_cr: float = -1.0

    @property
    def losses(self) -> list:
        return [h["loss"] for h in self.history]


def width_batches(lengths: Sequence[int], batch_size: int, rng: np.random.Generator) -> list[list[int]]:
    """Group indices of similar length into batches; batch order is shuffled."""
    order = np.argsort(np.asarray(lengths) + rng.random(len(lengths)) * 0.5, kind="stable")
    batches = [order[i : i + batch_size].tolist() for i in range(0, len(order), batch_size)]
    rng.shuffle(batches)
    return batches


def pad_maps(maps: Sequence[np.ndarray]) -> np.ndarray:
    c, h = maps[0].shape[:2]
    w = max(m.shape[2] for m in maps)
    out = np.zeros((len(maps), c, h, w))
    for i, m in enumerate(maps):
        out[i, :, :, : m.shape[2]] = m
    return out


def pad_frames(seqs: Sequence[np.ndarray]) -> np.ndarray:
    """Pad probability sequences with one-hot blank frames."""
    k = seqs[0].shape[1]
    t = max(s.shape[0] for s in seqs)
    out = np.zeros((len(seqs), t, k))
    out[:, :, BLANK] = 1.0
    for i, s in enumerate(seqs):
        out[i, : s.shape[0]] = s
    return out


def _snapshot(params):
    return [p.value.copy() for p in params]


def _restore(params, snap):
    for p, v in zip(params, snap):
        p.value[...] = v


def _fit(model, params, batches_fn, eval_fn, cfg: TrainConfig, name: str,
         on_epoch: Callable | None = None) -> TrainResult:
    opt = make_optimizer(cfg.optimizer, params, cfg.rho, cfg.eps, cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    result = TrainResult()
    best = None
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        total, count = 0.0, 0
        for inputs, labels in batches_fn(rng):
            opt.zero_grad()
            logits = model.forward(inputs)
            loss, grad = ctc_batch_loss(logits, labels)
            if not np.isfinite(loss):
                raise NumericalError(f"{name}: non-finite loss at epoch {epoch} (batch of {len(labels)})")
            model.backward(grad)
            loss += add_weight_decay(params, cfg.weight_decay)
            norm = clip_grad_norm(params, cfg.clip)
            if not np.isfinite(norm):
                raise NumericalError(f"{name}: non-finite gradient norm at epoch {epoch}")
            opt.step()
            total += loss * len(labels)
            count += len(labels)
        val_cr = eval_fn()
        row = {"epoch": epoch, "loss": total / max(count, 1), "val_cr": val_cr,
               "seconds": time.perf_counter() - t0}
        result.history.append(row)
        log.info("%s epoch %d loss %.4f val CR %.4f (%.1fs)", name, epoch, row["loss"], val_cr, row["seconds"])
        if on_epoch is not None:
            on_epoch(row)
        if val_cr > result.best_cr:
            result.best_cr, result.best_epoch = val_cr, epoch
            best = _snapshot(params)
        if cfg.target_cr and val_cr >= cfg.target_cr:
            break
    if best is not None:
        _restore(params, best)
    return result


def recognizer_probs(model: MCFCRN, maps: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Per-sample ``(T, |C'|)`` distributions, one unpadded forward pass each."""
    return [model.predict(m[None])[0] for m in maps]


def greedy_cr(probs: Sequence[np.ndarray], labels: Sequence[tuple]) -> float:
    report = EvalReport()
    for p, ref in zip(probs, labels):
        report.add(ref, best_path_decode(p))
    return report.cr


def train_recognizer(model: MCFCRN, train: Dataset, val: Dataset, cfg: TrainConfig = TrainConfig(),
                     on_epoch: Callable | None = None) -> TrainResult:
    """Minimise mean CTC loss plus L2 penalty over ``train``; keeps the best-validation parameters."""
    widths = [m.shape[2] for m in train.maps]

    def batches(rng):
        for idx in width_batches(widths, cfg.batch_size, rng):
            yield pad_maps([train.maps[i] for i in idx]), [train.labels[i] for i in idx]

    def evaluate():
        return greedy_cr(recognizer_probs(model, val.maps), val.labels)

    return _fit(model, model.params(), batches, evaluate, cfg, "recognizer", on_epoch)


def train_implicit_lm(lm: ImplicitLM, recognizer: MCFCRN, train: Dataset, val: Dataset,
                      cfg: TrainConfig = TrainConfig(), on_epoch: Callable | None = None) -> TrainResult:
    """Train the implicit LM on the frozen recognizer's output distributions.

    The recognizer is only run forward; its parameters are never updated.
    Each step feeds a random subset of samples, accumulates their gradients
    and applies one update.
    """
    train_s = recognizer_probs(recognizer, train.maps)
    val_s = recognizer_probs(recognizer, val.maps)
    lengths = [s.shape[0] for s in train_s]

    def batches(rng):
        for idx in width_batches(lengths, cfg.batch_size, rng):
            yield pad_frames([train_s[i] for i in idx]), [train.labels[i] for i in idx]

    def evaluate():
        return greedy_cr([lm.predict(s[None])[0] for s in val_s], val.labels)

    return _fit(lm, lm.params(), batches, evaluate, cfg, "implicit-lm", on_epoch)
