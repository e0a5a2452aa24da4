"""From pen trajectory to signature feature map, and why local windows help.

Run: python demos/02_feature_maps.py [output_dir]
Writes one PGM image per channel of a rendered sample.
"""
import sys
from pathlib import Path

import numpy as np

from sigtext.pipeline import digit_glyphs, synthesize
from sigtext.trajfeat import (Trajectory, WindowConfig, feature_map, load_trajectory, save_pgm,
                              window_features)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_maps")
out.mkdir(parents=True, exist_ok=True)

sample = synthesize(digit_glyphs(), "3141", seed=0)
traj = sample.trajectory
print(f"Synthesized '{''.join(sample.label)}': {len(traj.strokes)} strokes, {traj.n_points} points.")

cfg = WindowConfig(width=9, shift=1, depth=2)
feats = window_features(traj, cfg)
print(f"Each point gets a depth-{cfg.depth} signature of the 9-point window around it: "
      f"{feats.stacked().shape[1]} numbers per point.")

fmap = feature_map(traj, cfg, height=32, max_width=600)
print(f"Drawn onto a {fmap.height}x{fmap.width} grid with {fmap.channels} channels.")
for c in range(fmap.channels):
    save_pgm(out / f"channel_{c}.pgm", fmap, c)
print(f"Channel images written to {out}/ (channel 0 is the plain ink bitmap).")

print("\nLocality: join two strokes with pen-down ink and compare features.")
a, b = traj.strokes[0], traj.strokes[1]
apart = window_features(Trajectory((a, b)), cfg).stacked()
joined = window_features(Trajectory((np.concatenate([a, b]),)), cfg).stacked()
changed = np.where(np.any(apart != joined, axis=1))[0]
print(f"  {len(changed)} of {len(apart)} points changed, indices {changed.min()}..{changed.max()}; "
      f"the join sits between {len(a) - 1} and {len(a)}.")

example = Path(__file__).resolve().parent.parent / "examples"
trajs = sorted(example.rglob("*.traj")) if example.is_dir() else []
if trajs:
    t = load_trajectory(trajs[0])
    print(f"\nAlso read {trajs[0].name} from the examples directory: {t.n_points} points.")
