"""Corpora, dataset construction, feature extraction and manifests."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..trajfeat import (Trajectory, WindowConfig, feature_map, load_trajectory, save_trajectory)
from .glyphs import GlyphSet, TextSample, synthesize

# successor table of the bigram-constrained corpus over a..j; with
# homoglyph_glyphs() the pair b/i is told apart only by the left
# neighbour and e/j only by the right neighbour
CHAIN = {
    "a": "bg", "b": "cd", "c": "bh", "d": "ig", "e": "af",
    "f": "ih", "g": "ej", "h": "ej", "i": "cd", "j": "ch",
}


def random_corpus(alphabet: Sequence[str], n: int, min_len: int = 3, max_len: int = 8, seed=0) -> list[str]:
    """Uniform i.i.d. symbols; no sequential structure."""
    rng = np.random.default_rng(seed)
    alphabet = list(alphabet)
    return ["".join(rng.choice(alphabet, size=rng.integers(min_len, max_len + 1))) for _ in range(n)]


def chain_corpus(n: int, min_len: int = 3, max_len: int = 8, seed=0, chain: dict = CHAIN) -> list[str]:
    """Lines from a Markov chain where each symbol has a fixed successor set."""
    rng = np.random.default_rng(seed)
    symbols = sorted(chain)
    lines = []
    for _ in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        cur = symbols[rng.integers(len(symbols))]
        out = [cur]
        for _ in range(length - 1):
            succ = chain[cur]
            cur = succ[rng.integers(len(succ))]
            out.append(cur)
        lines.append("".join(out))
    return lines


def make_recognizer_trainset(corpus: Sequence[str], glyphs: GlyphSet, n: int, seed=0,
                             shuffle: bool = True, min_len: int = 1) -> list[TextSample]:
    """``n`` samples whose labels are corpus lines with their character order permuted.

    Lines are drawn at random from ``corpus``; the permutation keeps the
    label multiset and discards the sequential context.
    """
    rng = np.random.default_rng(seed)
    lines = [line for line in corpus if len(line) >= min_len]
    if not lines:
        raise ValueError("corpus has no usable lines")
    out = []
    for _ in range(n):
        text = list(lines[rng.integers(len(lines))])
        if shuffle:
            text = [text[i] for i in rng.permutation(len(text))]
        sample_rng = np.random.default_rng(rng.integers(2 ** 63))
        out.append(synthesize(glyphs, text, rng=sample_rng, provenance="shuffled" if shuffle else "corpus-ordered"))
    return out


def make_ordered_set(corpus: Sequence[str], glyphs: GlyphSet, n: int, seed=0) -> list[TextSample]:
    """Corpus-ordered samples (semantic context intact)."""
    return make_recognizer_trainset(corpus, glyphs, n, seed, shuffle=False)


@dataclass(frozen=True)
class FeatureConfig:
    window: WindowConfig = WindowConfig()
    height: int = 32
    max_width: int = 256
    # trajectories are rescaled to unit ink height, then multiplied by this
    coord_scale: float = 2.0


def featurize(traj: Trajectory, cfg: FeatureConfig = FeatureConfig(), max_width: int | None = None) -> np.ndarray:
    """Trajectory to a ``(C, H, W)`` signature feature map."""
    pts = traj.points()
    h = float(pts[:, 1].max() - pts[:, 1].min())
    s = cfg.coord_scale / h if h > 0 else cfg.coord_scale
    scaled = Trajectory(tuple(st * s for st in traj.strokes))
    return feature_map(scaled, cfg.window, cfg.height, max_width or cfg.max_width).data


@dataclass
class Dataset:
    maps: list  # (C, H, W) arrays
    labels: list  # tuples of class indices (1-based)
    texts: list  # label strings

    def __len__(self):
        return len(self.maps)

    def subset(self, idx) -> "Dataset":
        return Dataset([self.maps[i] for i in idx], [self.labels[i] for i in idx], [self.texts[i] for i in idx])

    def truncated(self, depth: int) -> "Dataset":
        """Keep signature levels ``0..depth`` only (for Sig0/Sig1/... comparisons)."""
        c = 2 ** (depth + 1) - 1
        return Dataset([m[:c] for m in self.maps], self.labels, self.texts)


def build_dataset(samples: Sequence[TextSample], alphabet, cfg: FeatureConfig = FeatureConfig(),
                  max_width: int | None = None) -> Dataset:
    maps, labels, texts = [], [], []
    for s in samples:
        maps.append(featurize(s.trajectory, cfg, max_width))
        labels.append(alphabet.encode(s.label))
        texts.append("".join(s.label))
    return Dataset(maps, labels, texts)


def split(n: int, val_fraction: float = 0.1, seed=0):
    """Seeded train/validation index split."""
    perm = np.random.default_rng(seed).permutation(n)
    n_val = max(1, int(round(n * val_fraction))) if n > 1 else 0
    return sorted(perm[n_val:].tolist()), sorted(perm[:n_val].tolist())


# ---------------------------------------------------------------------------
# manifests: one "<trajectory file>\t<label>" pair per line

def write_manifest(path, entries: Sequence[tuple]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for traj_path, label in entries:
            fh.write(f"{traj_path}\t{label}\n")


def read_manifest(path) -> list[tuple]:
    base = Path(path).parent
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ValueError(f"{path}, line {lineno}: expected '<file>\\t<label>'")
        f, label = line.split("\t", 1)
        p = Path(f)
        entries.append((p if p.is_absolute() else base / p, label))
    return entries


def save_samples(directory, samples: Sequence[TextSample], manifest_name: str = "manifest.tsv") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(samples):
        name = f"sample_{i:05d}.traj"
        save_trajectory(directory / name, s.trajectory)
        entries.append((name, "".join(s.label)))
    manifest = directory / manifest_name
    write_manifest(manifest, entries)
    return manifest


def load_samples(manifest) -> list[TextSample]:
    return [TextSample(load_trajectory(p), tuple(label)) for p, label in read_manifest(manifest)]
