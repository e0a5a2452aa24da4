"""Receptive fields of the toy recognizer and why its branches line up.

Run: python demos/03_receptive_fields.py
"""
import numpy as np

from sigtext.net import MCFCRN
from sigtext.pipeline.experiments import toy_model_config
from sigtext.rfgeom import LayerSpec, centers_aligned, enlargement, format_table, receptive_field

cfg = toy_model_config(10)
branches = MCFCRN(cfg, np.random.default_rng(0)).branch_specs("x")
print("Layer-by-layer geometry of the widest branch (horizontal axis):")
print(format_table(branches[-1]))

print("\nTop-unit receptive field per branch:")
for kernel, stack in zip(cfg.branch_kernels, branches):
    rf = receptive_field(stack)
    print(f"  kernel {kernel}: size {rf.size}, centre {rf.center}")

layer = next(i for i, spec in enumerate(branches[0]) if spec.name.startswith("branch"))
print(f"\nGrowing the branch conv kernel (layer {layer}) by 2 adds "
      f"{enlargement(branches[0], layer, 2)} input columns (kernel growth times the strides below it).")

print(f"\nCentres aligned across branches: {bool(centers_aligned(branches))}")
trunk = branches[0][:-1]
bad = centers_aligned([trunk + [LayerSpec(3, 1, 1)], trunk + [LayerSpec(4, 1, 1, 'even')]])
print(f"Swap in an even kernel and the check complains: {bad.problems[0]}")
