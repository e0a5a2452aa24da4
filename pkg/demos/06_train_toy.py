"""Train the multi-context recognizer on synthetic digit-like handwriting.

Run: python demos/06_train_toy.py [--full]
The default is a quick run (a minute or two). --full uses 2000 samples and 6 epochs
(about 10 minutes on one core).
"""
import sys

from sigtext.pipeline.experiments import toy_end_to_end

full = "--full" in sys.argv
kw = {} if full else dict(n_samples=1000, epochs=4, n_test=100)
print(f"Training {'full' if full else 'quick'} toy recognizer: {kw or 'default settings'}")
res = toy_end_to_end(seed=0, **kw)
for epoch in res.history:
    print(f"  epoch {epoch['epoch']}: loss {epoch['loss']:.3f}, validation CR {epoch['val_cr']:.3f}")
print(f"\nHeld-out greedy decoding: CR {res.cr:.3f}, AR {res.ar:.3f} in {res.seconds:.0f}s.")
