"""Receptive-field arithmetic for conv/pool stacks.

Layers are listed bottom (input side) to top. Walking from a top-layer unit
down to the input, each layer maps region size and centre as

    r_in = (r_out - 1) * m + k
    x_in = m * x_out + ((k - 1) / 2 - p)

Horizontal and vertical axes are handled independently; pass one stack per
axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LayerSpec:
    kernel: int
    stride: int = 1
    padding: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kernel < 1:
            raise ValueError(f"kernel must be >= 1, got {self.kernel}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.padding < 0:
            raise ValueError(f"padding must be >= 0, got {self.padding}")

    @property
    def center_preserving(self) -> bool:
        return self.kernel == 2 * self.padding + 1 and self.stride == 1

    def output_size(self, n: int) -> int:
        return (n + 2 * self.padding - self.kernel) // self.stride + 1


@dataclass(frozen=True)
class ReceptiveField:
    size: int
    center: float
    # region covered in input coordinates, [start, end]
    start: float
    end: float
    clipped: bool = False


@dataclass(frozen=True)
class LayerRow:
    index: int
    layer: LayerSpec
    size: int
    center: float


def _walk(stack: Sequence[LayerSpec], top: float):
    if not stack:
        raise ValueError("receptive field of an empty stack is undefined")
    r, x = 1, float(top)
    rows = []
    for i in range(len(stack) - 1, -1, -1):
        lay = stack[i]
        r = (r - 1) * lay.stride + lay.kernel
        x = lay.stride * x + ((lay.kernel - 1) / 2 - lay.padding)
        rows.append(LayerRow(i, lay, r, x))
    return rows[::-1]


def receptive_field(stack: Sequence[LayerSpec], top: float = 0.0,
                    input_size: int | None = None) -> ReceptiveField:
    """Region of the input seen by the unit at coordinate ``top`` of the last layer.

    If ``input_size`` is given, ``clipped`` reports whether the region runs
    into the zero-padded border.
    """
    row = _walk(stack, top)[0]
    start = row.center - (row.size - 1) / 2
    end = row.center + (row.size - 1) / 2
    clipped = input_size is not None and (start < 0 or end > input_size - 1)
    return ReceptiveField(row.size, row.center, start, end, clipped)


def receptive_field_2d(stack_x: Sequence[LayerSpec], stack_y: Sequence[LayerSpec],
                       top=(0.0, 0.0)) -> tuple[ReceptiveField, ReceptiveField]:
    return receptive_field(stack_x, top[0]), receptive_field(stack_y, top[1])


def layer_table(stack: Sequence[LayerSpec], top: float = 0.0) -> list[LayerRow]:
    """Per-layer region size and centre, bottom to top."""
    return _walk(stack, top)


def enlargement(stack: Sequence[LayerSpec], layer: int, delta_k: int) -> int:
    """Growth of the input receptive field when layer ``layer`` (0-based) gets ``delta_k`` wider kernel."""
    if not 0 <= layer < len(stack):
        raise IndexError(f"layer {layer} outside stack of {len(stack)} layers")
    return int(delta_k * int(np.prod([s.stride for s in stack[:layer]], dtype=np.int64)))


def with_kernel(stack: Sequence[LayerSpec], layer: int, delta_k: int) -> list[LayerSpec]:
    out = list(stack)
    s = out[layer]
    out[layer] = LayerSpec(s.kernel + delta_k, s.stride, s.padding, s.name)
    return out


def stride_product(stack: Sequence[LayerSpec]) -> int:
    return int(np.prod([s.stride for s in stack], dtype=np.int64))


@dataclass
class AlignmentReport:
    aligned: bool
    problems: list
    centers: list

    def __bool__(self):
        return self.aligned


def centers_aligned(branches: Sequence[Sequence[LayerSpec]], probe=(0, 1, 7)) -> AlignmentReport:
    """Check that branch stacks share receptive-field centres.

    Branches are full bottom-to-top stacks sharing a common trunk prefix.
    Every layer where the branches differ must have ``k == 2p + 1`` and
    ``m == 1``, and the centres of the top units in ``probe`` must coincide.
    """
    problems = []
    if not branches:
        return AlignmentReport(True, problems, [])
    depth = max(len(b) for b in branches)
    for i in range(depth):
        specs = [b[i] if i < len(b) else None for b in branches]
        first = specs[0]
        if all(s is not None and (s.kernel, s.stride, s.padding) == (first.kernel, first.stride, first.padding)
               for s in specs):
            continue
        for bi, s in enumerate(specs):
            if s is None:
                problems.append(f"branch {bi}: missing layer {i}")
            elif not s.center_preserving:
                label = s.name or f"layer {i}"
                problems.append(f"branch {bi}: {label} (k={s.kernel}, m={s.stride}, p={s.padding}) "
                                "does not satisfy k=2p+1, m=1")
    centers = []
    for x in probe:
        cs = [receptive_field(b, x).center for b in branches]
        centers.append(cs)
        if max(cs) - min(cs) > 1e-9:
            problems.append(f"top unit {x}: centres differ across branches {cs}")
    return AlignmentReport(not problems, problems, centers)


def format_table(stack: Sequence[LayerSpec], top: float = 0.0) -> str:
    lines = [f"{'layer':<14}{'k':>4}{'m':>4}{'p':>4}{'r':>7}{'center':>10}  center formula"]
    for row in layer_table(stack, top):
        lay = row.layer
        off = (lay.kernel - 1) / 2 - lay.padding
        name = lay.name or f"L{row.index}"
        lines.append(f"{name:<14}{lay.kernel:>4}{lay.stride:>4}{lay.padding:>4}{row.size:>7}{row.center:>10.2f}"
                     f"  x = {lay.stride}*x' + ({off:g})")
    return "\n".join(lines)
