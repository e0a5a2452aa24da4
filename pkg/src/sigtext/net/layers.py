"""Feed-forward layers with hand-written backward passes.

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Param.grad`` during ``backward``.
Image tensors are ``(B, C, H, W)``; sequences are ``(B, T, D)``.
"""
from __future__ import annotations

import numpy as np

from ..rfgeom import LayerSpec


class ShapeError(ValueError):
    pass


class NumericalError(FloatingPointError):
    pass


def check_finite(x: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"non-finite values produced by {where}")
    return x


class Param:
    __slots__ = ("name", "value", "grad", "decay")

    def __init__(self, name: str, value: np.ndarray, decay: bool = True):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)
        self.decay = decay

    def __repr__(self):
        return f"Param({self.name!r}, shape={self.value.shape})"


def glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def params(self) -> list[Param]:
        return []

    def zero_grad(self):
        for p in self.params():
            p.grad[...] = 0.0


class Conv2D(Layer):
    """2D cross-correlation with zero padding; separate vertical/horizontal specs."""

    def __init__(self, in_ch: int, out_ch: int, spec_y: LayerSpec, spec_x: LayerSpec | None = None,
                 rng: np.random.Generator | None = None, name: str = "conv"):
        self.spec_y = spec_y
        self.spec_x = spec_x if spec_x is not None else spec_y
        self.in_ch, self.out_ch = in_ch, out_ch
        kh, kw = self.spec_y.kernel, self.spec_x.kernel
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in, fan_out = in_ch * kh * kw, out_ch * kh * kw
        self.W = Param(f"{name}.W", glorot(rng, (out_ch, in_ch, kh, kw), fan_in, fan_out))
        self.b = Param(f"{name}.b", np.zeros(out_ch), decay=False)
        self.name = name

    def params(self):
        return [self.W, self.b]

    def output_shape(self, h: int, w: int) -> tuple[int, int]:
        return self.spec_y.output_size(h), self.spec_x.output_size(w)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ShapeError(f"{self.name}: expected (B, {self.in_ch}, H, W) input, got {x.shape}")
        B, C, H, W = x.shape
        sy, sx = self.spec_y, self.spec_x
        Ho, Wo = self.output_shape(H, W)
        if Ho < 1 or Wo < 1:
            raise ShapeError(f"{self.name}: input {H}x{W} too small for kernel {sy.kernel}x{sx.kernel}")
        # channel-major layout keeps every kernel-offset slice contiguous
        xp = np.zeros((C, B, H + 2 * sy.padding, W + 2 * sx.padding))
        xp[:, :, sy.padding : sy.padding + H, sx.padding : sx.padding + W] = x.transpose(1, 0, 2, 3)
        cols = np.empty((C, sy.kernel, sx.kernel, B, Ho, Wo))
        for i in range(sy.kernel):
            for j in range(sx.kernel):
                cols[:, i, j] = xp[:, :, i : i + sy.stride * (Ho - 1) + 1 : sy.stride,
                                   j : j + sx.stride * (Wo - 1) + 1 : sx.stride]
        cols = cols.reshape(C * sy.kernel * sx.kernel, B * Ho * Wo)
        out = self.W.value.reshape(self.out_ch, -1) @ cols + self.b.value[:, None]
        self._cache = (cols, (B, C, H, W), (B, Ho, Wo))
        return out.reshape(self.out_ch, B, Ho, Wo).transpose(1, 0, 2, 3)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        cols, (B, C, H, W), (_, Ho, Wo) = self._cache
        sy, sx = self.spec_y, self.spec_x
        d2 = dout.transpose(1, 0, 2, 3).reshape(self.out_ch, B * Ho * Wo)
        self.W.grad += (d2 @ cols.T).reshape(self.W.value.shape)
        self.b.grad += d2.sum(axis=1)
        dcols = (self.W.value.reshape(self.out_ch, -1).T @ d2).reshape(C, sy.kernel, sx.kernel, B, Ho, Wo)
        dxp = np.zeros((C, B, H + 2 * sy.padding, W + 2 * sx.padding))
        for i in range(sy.kernel):
            for j in range(sx.kernel):
                dxp[:, :, i : i + sy.stride * (Ho - 1) + 1 : sy.stride,
                    j : j + sx.stride * (Wo - 1) + 1 : sx.stride] += dcols[:, i, j]
        return dxp[:, :, sy.padding : sy.padding + H, sx.padding : sx.padding + W].transpose(1, 0, 2, 3)


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class MaxPool2D(Layer):
    """Non-overlapping max pooling (kernel == stride); trailing remainder is dropped."""

    def __init__(self, ph: int, pw: int, name: str = "pool"):
        self.ph, self.pw = ph, pw
        self.name = name

    @property
    def spec_y(self) -> LayerSpec:
        return LayerSpec(self.ph, self.ph, 0, self.name)

    @property
    def spec_x(self) -> LayerSpec:
        return LayerSpec(self.pw, self.pw, 0, self.name)

    def output_shape(self, h, w):
        return h // self.ph, w // self.pw

    def forward(self, x):
        B, C, H, W = x.shape
        Ho, Wo = self.output_shape(H, W)
        if Ho < 1 or Wo < 1:
            raise ShapeError(f"{self.name}: input {H}x{W} smaller than pool {self.ph}x{self.pw}")
        xc = x[:, :, : Ho * self.ph, : Wo * self.pw]
        blocks = xc.reshape(B, C, Ho, self.ph, Wo, self.pw).transpose(0, 1, 2, 4, 3, 5)
        blocks = blocks.reshape(B, C, Ho, Wo, self.ph * self.pw)
        idx = blocks.argmax(axis=-1)
        self._cache = (x.shape, idx)
        return np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        shape, idx = self._cache
        B, C, H, W = shape
        Ho, Wo = dout.shape[2], dout.shape[3]
        dblocks = np.zeros((B, C, Ho, Wo, self.ph * self.pw))
        np.put_along_axis(dblocks, idx[..., None], dout[..., None], axis=-1)
        dblocks = dblocks.reshape(B, C, Ho, Wo, self.ph, self.pw).transpose(0, 1, 2, 4, 3, 5)
        dx = np.zeros(shape)
        dx[:, :, : Ho * self.ph, : Wo * self.pw] = dblocks.reshape(B, C, Ho * self.ph, Wo * self.pw)
        return dx


class ChannelStandardize(Layer):
    """Per-sample, per-channel zero-mean unit-variance over (H, W); no learned affine."""

    def __init__(self, eps: float = 1e-5):
        self.eps = eps

    def forward(self, x):
        mu = x.mean(axis=(2, 3), keepdims=True)
        var = x.var(axis=(2, 3), keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv
        self._cache = (xhat, inv)
        return xhat

    def backward(self, dout):
        xhat, inv = self._cache
        m1 = dout.mean(axis=(2, 3), keepdims=True)
        m2 = (dout * xhat).mean(axis=(2, 3), keepdims=True)
        return inv * (dout - m1 - xhat * m2)


class Linear(Layer):
    """Affine map over the last axis."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator | None = None,
                 bias: bool = True, name: str = "linear", init: str = "glorot"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.d_in, self.d_out = d_in, d_out
        w = glorot(rng, (d_in, d_out), d_in, d_out) if init == "glorot" else np.zeros((d_in, d_out))
        self.W = Param(f"{name}.W", w)
        self.b = Param(f"{name}.b", np.zeros(d_out), decay=False) if bias else None
        self.name = name

    def params(self):
        return [self.W] + ([self.b] if self.b is not None else [])

    def forward(self, x):
        if x.shape[-1] != self.d_in:
            raise ShapeError(f"{self.name}: expected last axis {self.d_in}, got {x.shape}")
        self._x = x
        y = x @ self.W.value
        return y + self.b.value if self.b is not None else y

    def backward(self, dout):
        x = self._x
        self.W.grad += x.reshape(-1, self.d_in).T @ dout.reshape(-1, self.d_out)
        if self.b is not None:
            self.b.grad += dout.reshape(-1, self.d_out).sum(axis=0)
        return dout @ self.W.value.T


def collapse_vertical(maps: np.ndarray, where: str = "top feature maps") -> np.ndarray:
    """``(B, N, 1, W)`` maps to a ``(B, W, N)`` frame sequence."""
    if maps.ndim != 4:
        raise ShapeError(f"{where}: expected (B, N, H, W) maps, got {maps.shape}")
    if maps.shape[2] != 1:
        raise ShapeError(f"{where}: height must be 1 before collapsing, got {maps.shape[2]}; "
                         "add vertical pooling or strided layers to this stack")
    return maps[:, :, 0, :].transpose(0, 2, 1)


def collapse_vertical_backward(dseq: np.ndarray) -> np.ndarray:
    return dseq.transpose(0, 2, 1)[:, :, None, :]
