"""Truncated signatures of piecewise-linear paths in the plane.

A signature of depth ``K`` is stored as ``K + 1`` flat arrays; level ``k``
holds the ``2**k`` iterated integrals ordered lexicographically over the
multi-indices ``(i_1, ..., i_k)`` with ``i in {1, 2}`` (so level 2 is
``[S11, S12, S21, S22]``).

The batched helpers (``segment_levels``, ``chen_levels``) carry a leading
batch axis and are what the sliding-window extractor uses; the
:class:`Signature` API is the single-path view on top of them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_DEPTH = 4


class SignatureError(ValueError):
    """Invalid input to a signature computation."""


def signature_size(depth: int) -> int:
    """Number of scalars in a depth-``depth`` signature of a 2D path."""
    return 2 ** (depth + 1) - 1


def _check_depth(depth: int) -> int:
    depth = int(depth)
    if depth < 0:
        raise SignatureError(f"depth must be >= 0, got {depth}")
    if depth > MAX_DEPTH:
        raise SignatureError(f"depth above {MAX_DEPTH} is not supported, got {depth}")
    return depth


def segment_levels(disp: np.ndarray, depth: int) -> list[np.ndarray]:
    """Signature levels of straight segments, batched.

    ``disp`` has shape ``(N, 2)``. Level ``k`` (shape ``(N, 2**k)``) is built by
    the recursion ``level_k = level_{k-1} (x) disp / k``, i.e. ``disp**(x)k / k!``.
    """
    disp = np.asarray(disp, dtype=np.float64)
    n = disp.shape[0]
    levels = [np.ones((n, 1))]
    for k in range(1, depth + 1):
        prev = levels[-1]
        levels.append((prev[:, :, None] * disp[:, None, :]).reshape(n, 2 ** k) / k)
    return levels


def chen_levels(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Truncated tensor product of two batched signatures (Chen's identity)."""
    depth = len(a) - 1
    n = a[0].shape[0]
    out = [np.ones((n, 1))]
    for level in range(1, depth + 1):
        acc = a[level] + b[level]
        for i in range(1, level):
            j = level - i
            acc = acc + (a[i][:, :, None] * b[j][:, None, :]).reshape(n, 2 ** level)
        out.append(acc)
    return out


@dataclass(frozen=True)
class Signature:
    """Truncated signature; ``levels[k]`` has ``2**k`` entries."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(np.asarray(lv, dtype=np.float64).reshape(-1) for lv in self.levels)
        if not levels:
            raise SignatureError("a signature needs at least level 0")
        for k, lv in enumerate(levels):
            if lv.size != 2 ** k:
                raise SignatureError(f"level {k} must have {2 ** k} entries, got {lv.size}")
        for lv in levels:
            lv.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @classmethod
    def identity(cls, depth: int) -> "Signature":
        depth = _check_depth(depth)
        return cls(tuple([np.ones(1)] + [np.zeros(2 ** k) for k in range(1, depth + 1)]))

    def flat(self) -> np.ndarray:
        """All levels concatenated, length ``2**(K+1) - 1``."""
        return np.concatenate(self.levels)

    def term(self, *index: int) -> float:
        """Iterated integral for a 1-based multi-index, e.g. ``sig.term(1, 2)``."""
        k = len(index)
        if k > self.depth:
            raise SignatureError(f"multi-index of length {k} exceeds depth {self.depth}")
        pos = 0
        for i in index:
            if i not in (1, 2):
                raise SignatureError(f"multi-index entries must be 1 or 2, got {i}")
            pos = 2 * pos + (i - 1)
        return float(self.levels[k][pos])

    def levy_area(self) -> float:
        """Signed area ``(S12 - S21) / 2`` between the path and its chord."""
        return 0.5 * (self.term(1, 2) - self.term(2, 1))

    def allclose(self, other: "Signature", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        if self.depth != other.depth:
            return False
        return all(np.allclose(a, b, atol=atol, rtol=rtol) for a, b in zip(self.levels, other.levels))

    def _batched(self) -> list[np.ndarray]:
        return [lv[None, :] for lv in self.levels]

    @classmethod
    def _from_batched(cls, levels: Sequence[np.ndarray]) -> "Signature":
        return cls(tuple(lv[0] for lv in levels))


def segment_signature(d, depth: int) -> Signature:
    """Signature of the straight segment with displacement ``d = (dx, dy)``."""
    depth = _check_depth(depth)
    d = np.asarray(d, dtype=np.float64).reshape(-1)
    if d.shape != (2,):
        raise SignatureError(f"displacement must have 2 components, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise SignatureError(f"displacement must be finite, got {d.tolist()}")
    return Signature._from_batched(segment_levels(d[None, :], depth))


def chen_concat(a: Signature, b: Signature) -> Signature:
    """Signature of path ``a`` followed by path ``b``."""
    if a.depth != b.depth:
        raise SignatureError(f"depth mismatch: {a.depth} vs {b.depth}")
    return Signature._from_batched(chen_levels(a._batched(), b._batched()))


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise SignatureError("path needs at least one point")
    pts = pts.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise SignatureError("path coordinates must be finite")
    return pts


def path_signature(points, depth: int) -> Signature:
    """Signature of the polyline through ``points`` (left fold of segments)."""
    depth = _check_depth(depth)
    pts = _as_points(points)
    disp = np.diff(pts, axis=0)
    seg = segment_levels(disp, depth)
    acc = [np.ones((1, 1))] + [np.zeros((1, 2 ** k)) for k in range(1, depth + 1)]
    for i in range(disp.shape[0]):
        acc = chen_levels(acc, [lv[i : i + 1] for lv in seg])
    return Signature._from_batched(acc)


def inverse_check(points, depth: int) -> Signature:
    """Signature of the path followed by its reversal; should be the identity."""
    pts = _as_points(points)
    return chen_concat(path_signature(pts, depth), path_signature(pts[::-1], depth))
