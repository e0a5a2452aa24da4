"""Resolving look-alike glyphs with context.

Symbols b/i and e/j are drawn identically, so the recognizer alone can only
guess. The training text follows a fixed bigram chain, which an implicit
recurrent LM or a trigram-fused beam search can exploit.

Run: python demos/07_language_models.py [seed]   (about two minutes)
"""
import sys

from sigtext.pipeline.experiments import language_model_ablation

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
r = language_model_ablation(seed)
print(f"raw recognizer (greedy)         CR {r.raw:.3f}")
print(f"+ unidirectional implicit LM    CR {r.implicit_uni:.3f}")
print(f"+ bidirectional implicit LM     CR {r.implicit_bi:.3f}")
print(f"trigram-fused beam search       CR {r.trigram_beam:.3f}")
