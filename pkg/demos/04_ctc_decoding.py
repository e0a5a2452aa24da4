"""CTC on a tiny example: exact probabilities, gradients, and decoding.

Run: python demos/04_ctc_decoding.py
"""
import numpy as np

from sigtext.ctc import (Alphabet, best_path_decode, brute_force_logprob, ctc_loss_and_grad,
                         prefix_beam_decode, softmax, transcription_logprob)
from sigtext.ngram import TrigramModel

alphabet = Alphabet(("a", "b", "e"))
rng = np.random.default_rng(3)
probs = softmax(rng.normal(scale=1.5, size=(4, alphabet.size)))
print("Frame posteriors (blank first):")
print(np.round(probs, 3))

for text in ("ab", "ba", "a", "abe"):
    label = alphabet.encode(text)
    fast = transcription_logprob(probs, label)
    slow = brute_force_logprob(probs, label)
    print(f"  p({text!r}) = {np.exp(fast):.6f} (forward-backward), {np.exp(slow):.6f} (enumerating paths)")

loss, grad = ctc_loss_and_grad(np.log(probs), alphabet.encode("ab"))
print(f"\nLoss for 'ab': {loss:.4f}. Gradient rows sum to {np.abs(grad.sum(axis=1)).max():.1e}.")

print("\nWhen the frames can't decide between 'b' and 'e', a language model can.")
ambiguous = np.array([[0.02, 0.96, 0.01, 0.01],
                      [0.02, 0.01, 0.45, 0.52]])
lm = TrigramModel.train(["ab"] * 20 + ["e"], vocabulary=alphabet.labels)
print(f"  greedy:          {''.join(alphabet.symbols(best_path_decode(ambiguous)))}")
print(f"  beam, no LM:     {''.join(alphabet.symbols(prefix_beam_decode(ambiguous, 8)))}")
fused = prefix_beam_decode(ambiguous, 8, lm, alpha=1.0, alphabet=alphabet)
print(f"  beam + trigram:  {''.join(alphabet.symbols(fused))}")
