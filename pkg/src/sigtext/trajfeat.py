"""Pen trajectories, sliding-window signature features and feature-map rendering.

Trajectory text format: one stroke per line as whitespace-separated ``x,y``
pairs; a blank line separates samples in multi-sample files.

Feature maps serialise as ``SFM1``: a 16-byte little-endian header
(magic, C, H, W as u32) followed by ``C*H*W`` float32 values in row-major
order.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .sigcore import SignatureError, _check_depth, chen_levels, segment_levels, signature_size


class TrajectoryParseError(ValueError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = [str(source)] if source is not None else []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"col {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class Trajectory:
    """Ordered strokes, each an ``(n, 2)`` float array of pen positions."""

    strokes: tuple

    def __post_init__(self):
        strokes = []
        for i, s in enumerate(self.strokes):
            arr = np.array(s, dtype=np.float64).reshape(-1, 2)
            if arr.shape[0] == 0:
                raise ValueError(f"stroke {i} is empty")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"stroke {i} has non-finite coordinates")
            arr.setflags(write=False)
            strokes.append(arr)
        object.__setattr__(self, "strokes", tuple(strokes))

    @property
    def n_points(self) -> int:
        return sum(s.shape[0] for s in self.strokes)

    def points(self) -> np.ndarray:
        if not self.strokes:
            return np.zeros((0, 2))
        return np.concatenate(self.strokes, axis=0)

    def translated(self, dx: float, dy: float) -> "Trajectory":
        off = np.array([dx, dy])
        return Trajectory(tuple(s + off for s in self.strokes))

    def __eq__(self, other):
        if not isinstance(other, Trajectory) or len(self.strokes) != len(other.strokes):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.strokes, other.strokes))

    __hash__ = None


@dataclass(frozen=True)
class WindowConfig:
    width: int = 9
    shift: int = 1
    depth: int = 2

    def __post_init__(self):
        if self.width < 1 or self.width % 2 == 0:
            raise ValueError(f"window width must be a positive odd number, got {self.width}")
        if self.shift < 1:
            raise ValueError(f"window shift must be >= 1, got {self.shift}")
        _check_depth(self.depth)

    @property
    def half(self) -> int:
        return (self.width - 1) // 2

    @property
    def channels(self) -> int:
        return signature_size(self.depth)


@dataclass
class PointFeatures:
    """Per-point signature vectors, one ``(n_points, C)`` array per stroke."""

    per_stroke: list
    depth: int

    @property
    def channels(self) -> int:
        return signature_size(self.depth)

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.per_stroke, axis=0)


@dataclass
class SignatureFeatureMap:
    data: np.ndarray  # (C, H, W)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def truncated(self, depth: int) -> "SignatureFeatureMap":
        """Keep only signature levels ``0..depth`` (Sig0, Sig1, ... variants)."""
        return SignatureFeatureMap(self.data[: signature_size(depth)].copy())


def _stroke_window_features(stroke: np.ndarray, cfg: WindowConfig) -> np.ndarray:
    n = stroke.shape[0]
    h = cfg.half
    if n == 1 or h == 0:
        feat = np.zeros((n, cfg.channels))
        feat[:, 0] = 1.0
        return feat
    disp = np.diff(stroke, axis=0)
    # zero-length segments have identity signatures, so padding the
    # displacement list with zeros truncates windows at the stroke ends
    padded = np.zeros((n - 1 + 2 * h, 2))
    padded[h : h + n - 1] = disp
    centers = np.arange(n)
    acc = None
    for offset in range(2 * h):
        seg = segment_levels(padded[centers + offset], cfg.depth)
        acc = seg if acc is None else chen_levels(acc, seg)
    feat = np.concatenate(acc, axis=1)
    if cfg.shift > 1:
        anchor = np.minimum(np.round(centers / cfg.shift).astype(int) * cfg.shift, n - 1)
        feat = feat[anchor]
    return feat


def window_features(traj: Trajectory, cfg: WindowConfig = WindowConfig()) -> PointFeatures:
    """Signature of the ``cfg.width``-point window centred on every point.

    Windows are truncated at stroke ends and never span a pen-up. With
    ``shift > 1`` only every ``shift``-th point gets its own window; the
    others reuse the nearest anchor's feature.
    """
    if not traj.strokes:
        raise ValueError("trajectory has no strokes")
    return PointFeatures([_stroke_window_features(s, cfg) for s in traj.strokes], cfg.depth)


def _pixel_scale(pts: np.ndarray, height: int, max_width: int):
    lo = pts.min(axis=0)
    extent = pts.max(axis=0) - lo
    bw, bh = float(extent[0]), float(extent[1])
    span = height - 1
    if bh > 0:
        scale = span / bh
    elif bw > 0:
        scale = span / bw
    else:
        scale = 1.0
    if bw * scale > max_width - 1:
        scale = (max_width - 1) / bw
    y_off = 0.5 * (span - bh * scale)
    width = min(int(np.floor(bw * scale + 0.5)) + 1, max_width)
    return lo, scale, y_off, width


def rasterize(traj: Trajectory, feats: PointFeatures, height: int = 126,
              max_width: int = 2400) -> SignatureFeatureMap:
    """Render per-point features into a ``C x height x W`` map.

    The trajectory is scaled uniformly so its bounding-box height spans the
    output height (shrunk further if the width would exceed ``max_width``).
    Each segment is stepped pixel by pixel; pixel values interpolate
    linearly between the segment's endpoint features. Later strokes
    overwrite earlier ones.
    """
    if not traj.strokes:
        raise ValueError("cannot rasterize an empty trajectory")
    if len(feats.per_stroke) != len(traj.strokes):
        raise ValueError("features are not aligned with the trajectory strokes")
    if height < 1 or max_width < 1:
        raise ValueError("height and max_width must be positive")
    lo, scale, y_off, width = _pixel_scale(traj.points(), height, max_width)
    channels = feats.channels

    rows, cols, vals = [], [], []
    for stroke, f in zip(traj.strokes, feats.per_stroke):
        if f.shape != (stroke.shape[0], channels):
            raise ValueError("features are not aligned with the trajectory points")
        px = (stroke - lo) * scale
        px[:, 1] += y_off
        if stroke.shape[0] == 1:
            rows.append(np.rint(px[:, 1]).astype(int))
            cols.append(np.rint(px[:, 0]).astype(int))
            vals.append(f)
            continue
        d = np.diff(px, axis=0)
        steps = np.maximum(np.ceil(np.abs(d).max(axis=1)).astype(int), 1)
        seg = np.repeat(np.arange(len(steps)), steps + 1)
        start = np.repeat(np.cumsum(steps + 1) - (steps + 1), steps + 1)
        t = (np.arange(seg.size) - start) / steps[seg]
        pos = px[seg] + t[:, None] * d[seg]
        rows.append(np.rint(pos[:, 1]).astype(int))
        cols.append(np.rint(pos[:, 0]).astype(int))
        vals.append((1.0 - t)[:, None] * f[seg] + t[:, None] * f[seg + 1])

    r = np.clip(np.concatenate(rows), 0, height - 1)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    keep = (c >= 0) & (c < width)
    r, c, v = r[keep], c[keep], v[keep]
    # last write wins: keep the final occurrence of each pixel
    flat = r * width + c
    _, first_rev = np.unique(flat[::-1], return_index=True)
    last = flat.size - 1 - first_rev
    out = np.zeros((channels, height, width))
    out[:, r[last], c[last]] = v[last].T
    return SignatureFeatureMap(out)


def feature_map(traj: Trajectory, cfg: WindowConfig = WindowConfig(), height: int = 126,
                max_width: int = 2400) -> SignatureFeatureMap:
    """``window_features`` followed by ``rasterize``."""
    return rasterize(traj, window_features(traj, cfg), height, max_width)


# ---------------------------------------------------------------------------
# text format

def _format_stroke(stroke: np.ndarray) -> str:
    return " ".join(f"{x!r},{y!r}" for x, y in stroke.tolist())


def dumps_trajectories(trajs: Iterable[Trajectory]) -> str:
    blocks = []
    for t in trajs:
        if not t.strokes:
            raise ValueError("cannot serialise a trajectory with no strokes")
        blocks.append("\n".join(_format_stroke(s) for s in t.strokes))
    return "\n\n".join(blocks) + "\n"


def loads_trajectories(text: str, source=None) -> list[Trajectory]:
    samples: list[Trajectory] = []
    current: list[np.ndarray] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            if current:
                samples.append(Trajectory(tuple(current)))
                current = []
            continue
        pts = []
        col = 1
        for token in line.split(" "):
            if token == "":
                col += 1
                continue
            parts = token.split(",")
            if len(parts) != 2:
                raise TrajectoryParseError(f"expected 'x,y', got {token!r}", lineno, col, source)
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise TrajectoryParseError(f"malformed coordinate {token!r}", lineno, col, source) from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise TrajectoryParseError(f"non-finite coordinate {token!r}", lineno, col, source)
            pts.append((x, y))
            col += len(token) + 1
        current.append(np.array(pts, dtype=np.float64))
    if current:
        samples.append(Trajectory(tuple(current)))
    if not samples:
        raise TrajectoryParseError("no strokes found", source=source)
    return samples


def save_trajectory(path, traj: Trajectory) -> None:
    Path(path).write_text(dumps_trajectories([traj]), encoding="utf-8")


def save_trajectories(path, trajs: Sequence[Trajectory]) -> None:
    Path(path).write_text(dumps_trajectories(trajs), encoding="utf-8")


def load_trajectories(path) -> list[Trajectory]:
    return loads_trajectories(Path(path).read_text(encoding="utf-8"), source=path)


def load_trajectory(path) -> Trajectory:
    """Load a single-sample trajectory file."""
    samples = load_trajectories(path)
    if len(samples) != 1:
        raise TrajectoryParseError(f"expected one sample, found {len(samples)}", source=path)
    return samples[0]


# ---------------------------------------------------------------------------
# feature-map export

SFM_MAGIC = b"SFM1"


def save_feature_map(path, fmap: SignatureFeatureMap) -> None:
    c, h, w = fmap.data.shape
    with open(path, "wb") as fh:
        fh.write(SFM_MAGIC + struct.pack("<III", c, h, w))
        fh.write(np.ascontiguousarray(fmap.data, dtype="<f4").tobytes())


def load_feature_map(path) -> SignatureFeatureMap:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != SFM_MAGIC:
        raise ValueError(f"{path}: not an SFM1 feature map")
    c, h, w = struct.unpack("<III", raw[4:16])
    expected = 16 + 4 * c * h * w
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", offset=16).reshape(c, h, w).astype(np.float64)
    return SignatureFeatureMap(data)


def save_pgm(path, fmap: SignatureFeatureMap, channel: int = 0) -> None:
    """Write one channel as a binary PGM, min-max scaled to 0..255."""
    img = fmap.data[channel]
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    pix = np.rint(scaled * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())


__all__ = [
    "Trajectory", "WindowConfig", "PointFeatures", "SignatureFeatureMap", "TrajectoryParseError",
    "SignatureError", "window_features", "rasterize", "feature_map", "load_trajectory",
    "load_trajectories", "save_trajectory", "save_trajectories", "dumps_trajectories",
    "loads_trajectories", "save_feature_map", "load_feature_map", "save_pgm",
]
