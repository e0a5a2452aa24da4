"""Synthetic glyph alphabet and handwriting-like text synthesis.

Prototypes are polylines in a unit box (x in [0, 0.6], y in [0, 1], y
pointing down). Synthesis jitters each prototype with a random affine map,
resamples strokes at a fixed arc-length step, adds point noise and places
glyphs left to right with random spacing and baseline wobble.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..trajfeat import Trajectory


def _arc(cx, cy, rx, ry, a0, a1, n=16):
    t = np.radians(np.linspace(a0, a1, n))
    return np.stack([cx + rx * np.cos(t), cy + ry * np.sin(t)], axis=1)


def _line(*pts):
    return np.array(pts, dtype=np.float64)


# ten visually distinct digit-like shapes; angles in degrees, y down
PROTOTYPES: dict = {
    "0": [_arc(0.3, 0.5, 0.28, 0.48, -90, 270, 28)],
    "1": [_line((0.12, 0.2), (0.32, 0.0), (0.32, 1.0))],
    "2": [np.vstack([_arc(0.3, 0.28, 0.27, 0.27, 200, 380, 12), _line((0.5, 0.5), (0.02, 1.0), (0.6, 1.0))])],
    "3": [np.vstack([_arc(0.28, 0.25, 0.27, 0.25, 200, 450, 14)[:-1], _arc(0.28, 0.74, 0.3, 0.26, 270, 520, 14)])],
    "4": [_line((0.45, 0.0), (0.0, 0.65), (0.6, 0.65)), _line((0.45, 0.3), (0.45, 1.0))],
    "5": [_line((0.58, 0.0), (0.08, 0.0), (0.05, 0.45)),
          np.vstack([_line((0.05, 0.45)), _arc(0.28, 0.7, 0.3, 0.28, 240, 500, 14)])],
    "6": [np.vstack([_line((0.5, 0.0)), _arc(0.3, 0.72, 0.28, 0.28, 210, 570, 24)])],
    "7": [_line((0.0, 0.0), (0.6, 0.0), (0.2, 1.0))],
    "8": [np.vstack([_arc(0.3, 0.26, 0.22, 0.25, 90, 450, 18), _arc(0.3, 0.75, 0.28, 0.25, -90, 270, 18)])],
    "9": [np.vstack([_arc(0.3, 0.28, 0.27, 0.27, 0, 360, 20), _line((0.57, 0.28), (0.5, 1.0))])],
}


@dataclass
class GlyphSet:
    """Alphabet of polyline glyph prototypes plus jitter parameters.

    ``prototypes`` maps each symbol to a list of strokes. Several symbols may
    share a prototype (homoglyphs), which makes them visually
    indistinguishable and leaves disambiguation to context.
    """

    prototypes: dict
    noise: float = 0.012
    scale_range: tuple = (0.85, 1.1)
    shear_range: float = 0.2
    rotation_deg: float = 6.0
    spacing_range: tuple = (0.12, 0.32)
    wobble: float = 0.06
    connector_prob: float = 0.0
    step: float = 0.05

    def __post_init__(self):
        if not 2 <= len(self.prototypes) <= 64:
            raise ValueError("a glyph set needs between 2 and 64 classes")
        for sym, strokes in self.prototypes.items():
            if not strokes:
                raise ValueError(f"glyph {sym!r} has no strokes")

    @property
    def alphabet(self) -> tuple:
        return tuple(self.prototypes)

    def stroke_count(self, symbol) -> int:
        return len(self.prototypes[symbol])


def digit_glyphs(n: int = 10, **jitter) -> GlyphSet:
    """The first ``n`` digit-like prototypes."""
    keys = list(PROTOTYPES)[:n]
    return GlyphSet({k: PROTOTYPES[k] for k in keys}, **jitter)


def homoglyph_glyphs(**jitter) -> GlyphSet:
    """Ten symbols ``a``..``j`` drawn from eight distinct shapes.

    ``i`` is drawn exactly like ``b`` and ``j`` exactly like ``e``.
    """
    shapes = list(PROTOTYPES.values())
    protos = {sym: shapes[i] for i, sym in enumerate("abcdefgh")}
    protos["i"] = protos["b"]
    protos["j"] = protos["e"]
    return GlyphSet(protos, **jitter)


def _resample(poly: np.ndarray, step: float) -> np.ndarray:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] <= 0:
        return poly[:1].copy()
    n = max(int(np.ceil(s[-1] / step)), 1) + 1
    t = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(t, s, poly[:, 0]), np.interp(t, s, poly[:, 1])], axis=1)


def _random_affine(glyphs: GlyphSet, rng: np.random.Generator) -> np.ndarray:
    sx = rng.uniform(*glyphs.scale_range)
    sy = sx * rng.uniform(0.95, 1.05)
    shear = rng.uniform(-glyphs.shear_range, glyphs.shear_range)
    th = np.radians(rng.uniform(-glyphs.rotation_deg, glyphs.rotation_deg))
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    return rot @ np.array([[sx, shear], [0.0, sy]])


def render_glyph(glyphs: GlyphSet, symbol, rng: np.random.Generator) -> list[np.ndarray]:
    """One jittered instance of ``symbol`` as a list of point arrays (origin at the box corner)."""
    if symbol not in glyphs.prototypes:
        raise KeyError(f"unknown glyph {symbol!r}")
    A = _random_affine(glyphs, rng)
    strokes = []
    for proto in glyphs.prototypes[symbol]:
        pts = _resample(np.asarray(proto, dtype=np.float64) @ A.T, glyphs.step)
        pts = pts + rng.normal(0.0, glyphs.noise, size=pts.shape)
        strokes.append(pts)
    lo = np.concatenate(strokes).min(axis=0)
    return [s - np.array([lo[0], 0.0]) for s in strokes]


@dataclass
class TextSample:
    trajectory: Trajectory
    label: tuple  # symbols
    provenance: str = "corpus-ordered"


def synthesize(glyphs: GlyphSet, text: Sequence, seed=None, provenance: str = "corpus-ordered",
               rng: np.random.Generator | None = None) -> TextSample:
    """Render ``text`` as an online handwriting sample; deterministic given ``seed``."""
    unknown = [t for t in text if t not in glyphs.prototypes]
    if unknown:
        raise KeyError(f"unknown glyph(s): {', '.join(map(repr, unknown))}")
    if not text:
        raise ValueError("cannot synthesize an empty text")
    rng = rng if rng is not None else np.random.default_rng(seed)
    strokes: list[np.ndarray] = []
    x = 0.0
    prev_end = None
    for sym in text:
        parts = render_glyph(glyphs, sym, rng)
        dy = rng.uniform(-glyphs.wobble, glyphs.wobble)
        placed = [p + np.array([x, dy]) for p in parts]
        if prev_end is not None and glyphs.connector_prob > 0 and rng.random() < glyphs.connector_prob:
            conn = _resample(np.stack([prev_end, placed[0][0]]), glyphs.step)
            strokes.append(conn)
        strokes.extend(placed)
        prev_end = placed[-1][-1]
        right = max(p[:, 0].max() for p in placed)
        x = right + rng.uniform(*glyphs.spacing_range)
    return TextSample(Trajectory(tuple(strokes)), tuple(text), provenance)
