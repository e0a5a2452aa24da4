from .data import (CHAIN, Dataset, FeatureConfig, build_dataset, chain_corpus, featurize, load_samples,
                   make_ordered_set, make_recognizer_trainset, random_corpus, read_manifest, save_samples, split,
                   write_manifest)
from .evaluate import CHAINS, DecodeConfig, decode, evaluate
from .glyphs import PROTOTYPES, GlyphSet, TextSample, digit_glyphs, homoglyph_glyphs, synthesize
from .metrics import EvalReport, align_counts, evaluate_pairs
from .train import TrainConfig, TrainResult, recognizer_probs, train_implicit_lm, train_recognizer
