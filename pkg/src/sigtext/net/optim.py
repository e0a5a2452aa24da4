"""Parameter updates: AdaDelta (default) and plain gradient descent."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .layers import Param


def global_norm(params: Sequence[Param]) -> float:
    return float(np.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params)))


def clip_grad_norm(params: Sequence[Param], max_norm: float) -> float:
    """Rescale gradients in place so their global L2 norm is at most ``max_norm``."""
    norm = global_norm(params)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for p in params:
            p.grad *= scale
    return norm


def add_weight_decay(params: Sequence[Param], coeff: float) -> float:
    """Add the gradient of ``coeff/2 * ||w||^2`` over decayed params; return the penalty."""
    if coeff == 0:
        return 0.0
    penalty = 0.0
    for p in params:
        if p.decay:
            penalty += 0.5 * coeff * float(np.sum(p.value * p.value))
            p.grad += coeff * p.value
    return penalty


def adadelta_step(param: np.ndarray, grad: np.ndarray, state: dict, rho: float = 0.9,
                  eps: float = 1e-6) -> np.ndarray:
    """One AdaDelta update of ``param`` in place; ``state`` holds the two running averages."""
    if param.shape != grad.shape:
        raise ValueError(f"shape mismatch: param {param.shape} vs grad {grad.shape}")
    eg2 = state.setdefault("eg2", np.zeros_like(param))
    edx2 = state.setdefault("edx2", np.zeros_like(param))
    eg2 *= rho
    eg2 += (1.0 - rho) * grad * grad
    delta = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * grad
    edx2 *= rho
    edx2 += (1.0 - rho) * delta * delta
    param += delta
    return delta


class AdaDelta:
    def __init__(self, params: Sequence[Param], rho: float = 0.9, eps: float = 1e-6):
        self.params = list(params)
        self.rho, self.eps = rho, eps
        self.state = [dict() for _ in self.params]

    def step(self):
        for p, st in zip(self.params, self.state):
            adadelta_step(p.value, p.grad, st, self.rho, self.eps)

    def zero_grad(self):
        for p in self.params:
            p.grad[...] = 0.0


class SGD:
    def __init__(self, params: Sequence[Param], lr: float = 0.01):
        self.params = list(params)
        self.lr = lr

    def step(self):
        for p in self.params:
            p.value -= self.lr * p.grad

    def zero_grad(self):
        for p in self.params:
            p.grad[...] = 0.0


def make_optimizer(name: str, params: Sequence[Param], rho: float = 0.9, eps: float = 1e-6, lr: float = 0.01):
    if name == "adadelta":
        return AdaDelta(params, rho, eps)
    if name == "sgd":
        return SGD(params, lr)
    raise ValueError(f"unknown optimizer {name!r}")
