"""A character trigram model with Witten-Bell smoothing.

Run: python demos/05_trigram_lm.py
"""
from sigtext.ngram import BOS, TrigramModel
from sigtext.pipeline import chain_corpus

corpus = chain_corpus(2000, seed=0)
print(f"Training on {len(corpus)} lines such as {corpus[:3]}.")
lm = TrigramModel.train(corpus)

print("\nNext-symbol distribution after 'a':")
for w in lm.predicted:
    print(f"  {w!s:>5}  {lm.prob(w, ['a']):.3f}")

ctx = [BOS, BOS]
print(f"\nProbabilities from the start of a line sum to {sum(lm.prob(w, ctx) for w in lm.predicted):.12f}.")
print(f"Training perplexity {lm.perplexity(corpus):.2f} versus {len(lm.predicted)} for guessing uniformly.")

held_out = chain_corpus(200, seed=99)
shuffled = ["".join(sorted(line)) for line in held_out]
print(f"Held-out text: {lm.perplexity(held_out):.2f}; the same letters sorted: {lm.perplexity(shuffled):.2f}.")
