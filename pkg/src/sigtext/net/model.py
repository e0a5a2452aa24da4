"""Recognizer (FCN trunk, per-context residual BLSTM branches, classifier) and implicit LM."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..ctc import ctc_loss_and_grad, log_softmax, softmax
from ..rfgeom import LayerSpec, centers_aligned
from .layers import (ChannelStandardize, Conv2D, Layer, Linear, MaxPool2D, ReLU, ShapeError,
                     check_finite, collapse_vertical, collapse_vertical_backward)
from .recurrent import BLSTMStack, ResidualStack


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# key = value config files

def _parse_value(raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind == "ints":
        return tuple(int(v) for v in raw.replace(",", " ").split())
    return raw


class KVConfig:
    """Mixin for dataclass configs stored as ``key = value`` lines."""

    _kinds: dict = {}

    def to_kv(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_kv(cls, text: str, **overrides):
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            kind = cls._kinds.get(key, {"int": int, "float": float, "bool": bool}.get(kinds[key], str))
            try:
                values[key] = _parse_value(raw, kind)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        values.update(overrides)
        return cls(**values)


@dataclass
class ModelConfig(KVConfig):
    """Recognizer architecture.

    ``trunk`` and ``branch_tail`` are space-separated layer tokens:
    ``conv<k>:<channels>`` (stride 1, padding (k-1)/2, followed by ReLU) and
    ``pool<h>x<w>``. Each branch is ``conv<k>:<branch_channels>`` for one
    ``k`` in ``branch_kernels`` followed by ``branch_tail``; the tail must
    bring the height to 1.
    """

    in_channels: int = 7
    input_height: int = 32
    trunk: str = "conv3:8 pool2x2 conv3:16 pool2x2 conv3:32"
    branch_kernels: tuple = (3, 5, 7)
    branch_channels: int = 32
    branch_tail: str = "pool2x1 pool2x1 pool2x1"
    hidden: int = 64
    res_layers: int = 2
    n_classes: int = 11
    standardize: bool = False

    _kinds = {"branch_kernels": "ints"}

    def __post_init__(self):
        self.branch_kernels = tuple(int(k) for k in self.branch_kernels)
        if not self.branch_kernels:
            raise ConfigError("need at least one branch")


def _parse_layers(spec: str):
    out = []
    for tok in spec.split():
        if tok.startswith("conv"):
            k, ch = tok[4:].split(":")
            out.append(("conv", int(k), int(ch)))
        elif tok.startswith("pool"):
            ph, pw = tok[4:].split("x")
            out.append(("pool", int(ph), int(pw)))
        else:
            raise ConfigError(f"unknown layer token {tok!r}")
    return out


class Sequential(Layer):
    def __init__(self, layers: Sequence[Layer]):
        self.layers = list(layers)

    def params(self):
        return [p for lay in self.layers for p in lay.params()]

    def forward(self, x):
        for lay in self.layers:
            x = lay.forward(x)
        return x

    def backward(self, d):
        for lay in reversed(self.layers):
            d = lay.backward(d)
        return d

    def specs(self, axis: str) -> list[LayerSpec]:
        attr = "spec_y" if axis == "y" else "spec_x"
        return [getattr(lay, attr) for lay in self.layers if hasattr(lay, attr)]


class MCFCRN(Layer):
    """Multi-spatial-context FCRN: shared conv trunk, one conv + residual BLSTM stack per
    context branch, frame-wise concatenation of branch outputs, linear classifier.

    One branch is the plain FCRN.
    """

    def __init__(self, config: ModelConfig, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        n_conv = 0
        layers: list[Layer] = []
        ch = config.in_channels

        def conv_block(k, out, name):
            nonlocal n_conv
            if k % 2 == 0:
                raise ConfigError(f"{name}: kernel must be odd to keep centres aligned, got {k}")
            spec = LayerSpec(k, 1, (k - 1) // 2, name)
            block: list[Layer] = [Conv2D(ch_in[0], out, spec, spec, rng, name=name)]
            n_conv += 1
            if config.standardize and n_conv > 2:
                block.append(ChannelStandardize())
            block.append(ReLU())
            ch_in[0] = out
            return block

        ch_in = [ch]
        for i, (kind, a, b) in enumerate(_parse_layers(config.trunk)):
            if kind == "conv":
                layers += conv_block(a, b, f"trunk.conv{i}")
            else:
                layers.append(MaxPool2D(a, b, name=f"trunk.pool{i}"))
        self.trunk = Sequential(layers)
        trunk_ch = ch_in[0]
        trunk_convs = n_conv

        self.branches: list[Sequential] = []
        self.stacks: list[ResidualStack] = []
        for bi, k in enumerate(config.branch_kernels):
            ch_in = [trunk_ch]
            n_conv = trunk_convs
            blayers = conv_block(k, config.branch_channels, f"branch{bi}.conv")
            for j, (kind, a, b) in enumerate(_parse_layers(config.branch_tail)):
                if kind == "conv":
                    blayers += conv_block(a, b, f"branch{bi}.tail{j}")
                else:
                    blayers.append(MaxPool2D(a, b, name=f"branch{bi}.pool{j}"))
            self.branches.append(Sequential(blayers))
            self.stacks.append(ResidualStack(ch_in[0], config.hidden, config.res_layers, rng,
                                             name=f"branch{bi}.res"))
        self.frame_width = sum(s.width for s in self.stacks)
        self.classifier = Linear(self.frame_width, config.n_classes, rng, name="classifier")
        self._check_geometry()

    # -- geometry ---------------------------------------------------------
    def branch_specs(self, axis: str = "x") -> list[list[LayerSpec]]:
        trunk = self.trunk.specs(axis)
        return [trunk + b.specs(axis) for b in self.branches]

    def _check_geometry(self):
        for axis in ("x", "y"):
            report = centers_aligned(self.branch_specs(axis))
            if not report.aligned:
                raise ConfigError(f"branches are not centre-aligned ({axis}): {'; '.join(report.problems)}")
        h = self.config.input_height
        for spec in self.branch_specs("y")[0]:
            h = spec.output_size(h)
        if h != 1:
            raise ConfigError(f"stack reduces input height {self.config.input_height} to {h}, not 1 "
                              f"(trunk={self.config.trunk!r}, branch_tail={self.config.branch_tail!r})")

    def output_length(self, width: int) -> int:
        w = width
        for spec in self.branch_specs("x")[0]:
            w = spec.output_size(w)
        return w

    @property
    def stride_x(self) -> int:
        return int(np.prod([s.stride for s in self.branch_specs("x")[0]]))

    # -- parameters -------------------------------------------------------
    def params(self):
        ps = self.trunk.params()
        for b, s in zip(self.branches, self.stacks):
            ps += b.params() + s.params()
        return ps + self.classifier.params()

    # -- passes -----------------------------------------------------------
    def forward(self, x: np.ndarray) -> np.ndarray:
        """``(B, C, H, W)`` feature maps to ``(B, T, |C'|)`` logits."""
        if x.ndim == 3:
            x = x[None]
        if x.shape[1] != self.config.in_channels:
            raise ShapeError(f"model expects {self.config.in_channels} input channels, got {x.shape[1]}")
        if x.shape[2] != self.config.input_height:
            raise ShapeError(f"model expects input height {self.config.input_height}, got {x.shape[2]}")
        z = self.trunk.forward(x)
        frames = []
        for bi, (branch, stack) in enumerate(zip(self.branches, self.stacks)):
            maps = branch.forward(z)
            q0 = collapse_vertical(maps, where=f"branch {bi} ({self.config.branch_tail})")
            frames.append(stack.forward(q0))
        self._widths = [f.shape[-1] for f in frames]
        q = np.concatenate(frames, axis=-1) if len(frames) > 1 else frames[0]
        return check_finite(self.classifier.forward(q), "MC-FCRN forward")

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        dq = self.classifier.backward(dlogits)
        dz = None
        offset = 0
        for branch, stack, w in zip(self.branches, self.stacks, self._widths):
            dseq = stack.backward(dq[..., offset : offset + w])
            offset += w
            d = branch.backward(collapse_vertical_backward(dseq))
            dz = d if dz is None else dz + d
        return self.trunk.backward(dz)

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Per-frame probabilities ``(B, T, |C'|)``."""
        return softmax(self.forward(x))


@dataclass
class LMConfig(KVConfig):
    n_classes: int = 11
    embed_dim: int = 32
    hidden: int = 64
    layers: int = 1
    bidirectional: bool = True


class ImplicitLM(Layer):
    """Embedding (``|C'| x m`` matrix, no bias) -> recurrent stack -> linear classifier.

    Input frames are the recognizer's per-frame distributions, so the
    embedding of a frame is the probability-weighted mix of embedding rows.
    """

    def __init__(self, config: LMConfig, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        self.embedding = Linear(config.n_classes, config.embed_dim, rng, bias=False, name="lm.embed")
        self.rnn = BLSTMStack(config.embed_dim, config.hidden, config.layers, rng,
                              bidirectional=config.bidirectional, name="lm.rnn")
        self.classifier = Linear(self.rnn.d_out, config.n_classes, rng, name="lm.classifier")

    def params(self):
        return self.embedding.params() + self.rnn.params() + self.classifier.params()

    def embed(self, s: np.ndarray) -> np.ndarray:
        return s @ self.embedding.W.value

    def forward(self, s: np.ndarray) -> np.ndarray:
        if s.ndim == 2:
            s = s[None]
        if s.shape[-1] != self.config.n_classes:
            raise ShapeError(f"LM expects frames of width {self.config.n_classes}, got {s.shape[-1]}")
        e = self.embedding.forward(s)
        return check_finite(self.classifier.forward(self.rnn.forward(e)), "implicit LM forward")

    def backward(self, dlogits):
        return self.embedding.backward(self.rnn.backward(self.classifier.backward(dlogits)))

    def predict(self, s: np.ndarray) -> np.ndarray:
        return softmax(self.forward(s))


def ctc_batch_loss(logits: np.ndarray, labels: Sequence[Sequence[int]]):
    """Mean CTC loss over a batch and the matching gradient w.r.t. logits."""
    B = logits.shape[0]
    grad = np.empty_like(logits)
    total = 0.0
    for b in range(B):
        loss, g = ctc_loss_and_grad(logits[b], labels[b])
        total += loss
        grad[b] = g
    return total / B, grad / B


def mcfcrn_forward(x, model: MCFCRN) -> np.ndarray:
    """Per-frame distributions for one feature map ``(C, H, W)``; shape ``(T, |C'|)``."""
    return model.predict(np.asarray(x)[None] if np.ndim(x) == 3 else x)[0]


def implicit_lm_forward(s, lm: ImplicitLM) -> np.ndarray:
    return lm.predict(np.asarray(s)[None] if np.ndim(s) == 2 else s)[0]
