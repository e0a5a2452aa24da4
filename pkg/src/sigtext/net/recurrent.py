"""LSTM / BLSTM layers with backpropagation through time."""
from __future__ import annotations

import numpy as np

from .layers import Layer, Linear, Param, ShapeError, glorot


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class LSTM(Layer):
    """Single-direction LSTM; gate blocks ordered input, forget, output, candidate."""

    def __init__(self, d_in: int, hidden: int, rng: np.random.Generator | None = None,
                 reverse: bool = False, name: str = "lstm"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.d_in, self.hidden, self.reverse = d_in, hidden, reverse
        H = hidden
        self.Wx = Param(f"{name}.Wx", glorot(rng, (d_in, 4 * H), d_in, 4 * H))
        self.Wh = Param(f"{name}.Wh", glorot(rng, (H, 4 * H), H, 4 * H))
        b = np.zeros(4 * H)
        b[H : 2 * H] = 1.0
        self.b = Param(f"{name}.b", b, decay=False)
        self.name = name

    def params(self):
        return [self.Wx, self.Wh, self.b]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 3 or x.shape[2] != self.d_in:
            raise ShapeError(f"{self.name}: expected (B, T, {self.d_in}) input, got {x.shape}")
        if self.reverse:
            x = x[:, ::-1]
        B, T, _ = x.shape
        H = self.hidden
        xw = x @ self.Wx.value + self.b.value
        Wh = self.Wh.value
        gates = np.empty((B, T, 4 * H))
        cs = np.empty((B, T, H))
        hs = np.empty((B, T, H))
        tcs = np.empty((B, T, H))
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        for t in range(T):
            z = xw[:, t] + h @ Wh
            g = np.empty_like(z)
            g[:, : 3 * H] = sigmoid(z[:, : 3 * H])
            g[:, 3 * H :] = np.tanh(z[:, 3 * H :])
            c = g[:, H : 2 * H] * c + g[:, :H] * g[:, 3 * H :]
            tc = np.tanh(c)
            h = g[:, 2 * H : 3 * H] * tc
            gates[:, t], cs[:, t], tcs[:, t], hs[:, t] = g, c, tc, h
        self._cache = (x, gates, cs, tcs, hs)
        return hs[:, ::-1] if self.reverse else hs

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x, gates, cs, tcs, hs = self._cache
        if self.reverse:
            dout = dout[:, ::-1]
        B, T, _ = x.shape
        H = self.hidden
        Wh = self.Wh.value
        dz_all = np.empty((B, T, 4 * H))
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        zeros = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            g = gates[:, t]
            i, f, o, cand = g[:, :H], g[:, H : 2 * H], g[:, 2 * H : 3 * H], g[:, 3 * H :]
            tc = tcs[:, t]
            c_prev = cs[:, t - 1] if t > 0 else zeros
            dh = dout[:, t] + dh_next
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dz = dz_all[:, t]
            dz[:, :H] = dc * cand * i * (1.0 - i)
            dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
            dz[:, 3 * H :] = dc * i * (1.0 - cand * cand)
            dc_next = dc * f
            dh_next = dz @ Wh.T
        h_prev = np.concatenate([np.zeros((B, 1, H)), hs[:, :-1]], axis=1)
        self.Wh.grad += h_prev.reshape(-1, H).T @ dz_all.reshape(-1, 4 * H)
        self.Wx.grad += x.reshape(-1, self.d_in).T @ dz_all.reshape(-1, 4 * H)
        self.b.grad += dz_all.sum(axis=(0, 1))
        dx = dz_all @ self.Wx.value.T
        return dx[:, ::-1] if self.reverse else dx


class BLSTM(Layer):
    """Forward and reversed LSTMs over the same input, outputs concatenated per frame.

    With ``bidirectional=False`` only the forward LSTM runs (used for the
    unidirectional language-model baseline).
    """

    def __init__(self, d_in: int, hidden: int, rng: np.random.Generator | None = None,
                 bidirectional: bool = True, name: str = "blstm"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.fwd = LSTM(d_in, hidden, rng, reverse=False, name=f"{name}.fwd")
        self.bwd = LSTM(d_in, hidden, rng, reverse=True, name=f"{name}.bwd") if bidirectional else None
        self.hidden = hidden
        self.d_out = hidden * (2 if bidirectional else 1)

    def params(self):
        return self.fwd.params() + (self.bwd.params() if self.bwd is not None else [])

    def forward(self, x):
        hf = self.fwd.forward(x)
        if self.bwd is None:
            return hf
        return np.concatenate([hf, self.bwd.forward(x)], axis=-1)

    def backward(self, dout):
        H = self.hidden
        dx = self.fwd.backward(dout[..., :H])
        if self.bwd is not None:
            dx = dx + self.bwd.backward(dout[..., H:])
        return dx


class ResidualBLSTM(Layer):
    """``q -> q + proj(BLSTM(q))``; the projection restores the input width."""

    def __init__(self, width: int, hidden: int, rng=None, name: str = "res"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.blstm = BLSTM(width, hidden, rng, name=f"{name}.blstm")
        self.proj = Linear(self.blstm.d_out, width, rng, name=f"{name}.proj")
        self.width = width

    def params(self):
        return self.blstm.params() + self.proj.params()

    def transform(self, q):
        """The residual branch ``h(q)`` alone."""
        return self.proj.forward(self.blstm.forward(q))

    def forward(self, q):
        if q.shape[-1] != self.width:
            raise ShapeError(f"residual layer expects width {self.width}, got {q.shape[-1]}")
        return q + self.transform(q)

    def backward(self, dout):
        return dout + self.blstm.backward(self.proj.backward(dout))


class ResidualStack(Layer):
    """``L`` residual BLSTM layers: ``q_l = h_l(q_{l-1}) + q_{l-1}``."""

    def __init__(self, width: int, hidden: int, n_layers: int, rng=None, name: str = "stack"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.layers = [ResidualBLSTM(width, hidden, rng, name=f"{name}.{i}") for i in range(n_layers)]
        self.width = width

    def params(self):
        return [p for lay in self.layers for p in lay.params()]

    def forward(self, q):
        if q.shape[-1] != self.width:
            raise ShapeError(f"residual stack expects width {self.width}, got {q.shape[-1]}")
        for lay in self.layers:
            q = lay.forward(q)
        return q

    def forward_unrolled(self, q0):
        """``q_L = q_0 + sum_i h_{i+1}(q_i)`` computed from the stored intermediate states."""
        states = [q0]
        increments = []
        for lay in self.layers:
            inc = lay.transform(states[-1])
            increments.append(inc)
            states.append(states[-1] + inc)
        total = q0.copy()
        for inc in increments:
            total = total + inc
        return total

    def backward(self, dout):
        for lay in reversed(self.layers):
            dout = lay.backward(dout)
        return dout


class BLSTMStack(Layer):
    """Plain stacked (non-residual) recurrent layers."""

    def __init__(self, d_in: int, hidden: int, n_layers: int, rng=None, bidirectional: bool = True,
                 name: str = "rnn"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.layers = []
        d = d_in
        for i in range(n_layers):
            lay = BLSTM(d, hidden, rng, bidirectional=bidirectional, name=f"{name}.{i}")
            self.layers.append(lay)
            d = lay.d_out
        self.d_out = d

    def params(self):
        return [p for lay in self.layers for p in lay.params()]

    def forward(self, x):
        for lay in self.layers:
            x = lay.forward(x)
        return x

    def backward(self, dout):
        for lay in reversed(self.layers):
            dout = lay.backward(dout)
        return dout
