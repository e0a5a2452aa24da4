"""Command-line interface: ``sigtext <subcommand> ...``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import rfgeom
from .ctc import Alphabet
from .net import ImplicitLM, LMConfig, MCFCRN, ModelConfig, NumericalError, load_checkpoint, save_checkpoint
from .net.model import ConfigError
from .ngram import TrigramModel, read_corpus
from .pipeline import (DecodeConfig, FeatureConfig, TrainConfig, build_dataset, chain_corpus, decode, digit_glyphs,
                       evaluate, featurize, homoglyph_glyphs, load_samples, make_recognizer_trainset,
                       random_corpus, save_samples, split, train_implicit_lm, train_recognizer)
from .pipeline.experiments import toy_model_config
from .trajfeat import (TrajectoryParseError, WindowConfig, load_feature_map, load_trajectories, save_feature_map,
                       save_pgm, SignatureFeatureMap)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("sigtext")


class Settings:
    """Sectioned ``key = value`` settings: ``model.*``, ``train.*``, ``features.*``, ``decode.*``."""

    def __init__(self, text: str = ""):
        self.sections: dict = {"model": [], "train": [], "features": [], "decode": [], "lm": []}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key = line.split("=", 1)[0].strip()
            if "." not in key or key.split(".", 1)[0] not in self.sections:
                raise ConfigError(f"config line {lineno}: key {key!r} needs a section prefix "
                                  f"({', '.join(self.sections)})")
            section, rest = line.split(".", 1)
            self.sections[section.strip()].append(rest)

    def text(self, section: str) -> str:
        return "\n".join(self.sections[section])

    def features(self) -> FeatureConfig:
        vals = {}
        for line in self.sections["features"]:
            k, v = (s.strip() for s in line.split("=", 1))
            vals[k] = v
        window = WindowConfig(int(vals.pop("window", 9)), int(vals.pop("shift", 1)), int(vals.pop("depth", 2)))
        cfg = FeatureConfig(window=window, height=int(vals.pop("height", 32)),
                            max_width=int(vals.pop("max_width", 256)),
                            coord_scale=float(vals.pop("coord_scale", 2.0)))
        if vals:
            raise ConfigError(f"unknown feature keys: {', '.join(vals)}")
        return cfg


def _features_meta(cfg: FeatureConfig) -> dict:
    return {"window": cfg.window.width, "shift": cfg.window.shift, "depth": cfg.window.depth,
            "height": cfg.height, "max_width": cfg.max_width, "coord_scale": cfg.coord_scale}


def _features_from_meta(meta: dict) -> FeatureConfig:
    return FeatureConfig(WindowConfig(meta["window"], meta["shift"], meta["depth"]), meta["height"],
                         meta["max_width"], meta["coord_scale"])


def _glyphs(name: str, connector_prob: float):
    if name == "digits":
        return digit_glyphs(connector_prob=connector_prob)
    if name == "homoglyph":
        return homoglyph_glyphs(connector_prob=connector_prob)
    raise ConfigError(f"unknown glyph set {name!r}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args, settings):
    glyphs = _glyphs(args.glyphs, args.connector_prob)
    if args.corpus:
        corpus = read_corpus(args.corpus)
    elif args.glyphs == "homoglyph":
        corpus = chain_corpus(max(args.n, 100), seed=args.seed)
    else:
        corpus = random_corpus(glyphs.alphabet, max(args.n, 100), seed=args.seed)
    samples = make_recognizer_trainset(corpus, glyphs, args.n, seed=args.seed, shuffle=not args.ordered)
    manifest = save_samples(args.out, samples)
    print(f"wrote {len(samples)} samples to {manifest}")


def cmd_extract(args, settings):
    cfg = settings.features()
    if args.depth is not None or args.window is not None:
        cfg = FeatureConfig(WindowConfig(args.window or cfg.window.width, cfg.window.shift,
                                         cfg.window.depth if args.depth is None else args.depth),
                            cfg.height, cfg.max_width, cfg.coord_scale)
    trajs = load_trajectories(args.trajectory)
    out = Path(args.out)
    for i, t in enumerate(trajs):
        fmap = SignatureFeatureMap(featurize(t, cfg, args.max_width))
        path = out if len(trajs) == 1 else out.with_name(f"{out.stem}_{i:04d}{out.suffix}")
        save_feature_map(path, fmap)
        print(f"{path}: C={fmap.channels} H={fmap.height} W={fmap.width}")


def cmd_render(args, settings):
    fmap = load_feature_map(args.feature_map)
    channels = range(fmap.channels) if args.channel is None else [args.channel]
    stem = Path(args.out)
    for c in channels:
        path = stem.with_name(f"{stem.stem}_c{c}.pgm")
        save_pgm(path, fmap, c)
        print(path)


def cmd_rf(args, settings):
    if args.model:
        model, _ = load_checkpoint(args.model)
        cfg = model.config
    else:
        cfg = ModelConfig.from_kv(settings.text("model")) if settings.sections["model"] else toy_model_config(11)
    model = MCFCRN(cfg)
    for axis in ("x", "y"):
        for bi, stack in enumerate(model.branch_specs(axis)):
            print(f"branch {bi} (k={cfg.branch_kernels[bi]}), axis {axis}")
            print(rfgeom.format_table(stack, args.top))
            print()
    report = rfgeom.centers_aligned(model.branch_specs("x"))
    print("centres aligned:", "yes" if report.aligned else "no")
    for p in report.problems:
        print("  ", p)


def _load_dataset(manifest, alphabet, fcfg, max_width=None):
    samples = load_samples(manifest)
    bad = {s for smp in samples for s in smp.label if s not in alphabet.labels}
    if bad:
        raise ConfigError(f"labels use symbols outside the alphabet: {''.join(sorted(bad))}")
    return build_dataset(samples, alphabet, fcfg, max_width)


def cmd_train(args, settings):
    fcfg = settings.features()
    samples = load_samples(args.manifest)
    alphabet = Alphabet(tuple(args.alphabet) if args.alphabet else sorted({s for x in samples for s in x.label}))
    data = build_dataset(samples, alphabet, fcfg)
    if args.val_manifest:
        train, val = data, _load_dataset(args.val_manifest, alphabet, fcfg)
    else:
        tr, va = split(len(data), 0.1, args.seed)
        train, val = data.subset(tr), data.subset(va)
    mcfg = toy_model_config(alphabet.size, fcfg.window.channels)
    if settings.sections["model"]:
        mcfg = ModelConfig.from_kv(settings.text("model"), n_classes=alphabet.size,
                                   in_channels=fcfg.window.channels)
    tcfg = TrainConfig.from_kv(settings.text("train"), seed=args.seed)
    if args.epochs is not None:
        tcfg.epochs = args.epochs
    model = MCFCRN(mcfg, np.random.default_rng(args.seed))
    res = train_recognizer(model, train, val, tcfg)
    meta = {"alphabet": list(alphabet.labels), "features": _features_meta(fcfg), "history": res.history}
    save_checkpoint(args.out, model, meta)
    print(f"best validation CR {res.best_cr:.4f} at epoch {res.best_epoch}; saved {args.out}")


def cmd_train_lm(args, settings):
    model, meta = load_checkpoint(args.recognizer)
    alphabet = Alphabet(tuple(meta["alphabet"]))
    fcfg = _features_from_meta(meta["features"])
    data = _load_dataset(args.manifest, alphabet, fcfg)
    tr, va = split(len(data), 0.1, args.seed)
    lcfg = LMConfig.from_kv(settings.text("lm"), n_classes=alphabet.size)
    if args.unidirectional:
        lcfg.bidirectional = False
    tcfg = TrainConfig.from_kv(settings.text("train"), seed=args.seed)
    if args.epochs is not None:
        tcfg.epochs = args.epochs
    lm = ImplicitLM(lcfg, np.random.default_rng(args.seed))
    res = train_implicit_lm(lm, model, data.subset(tr), data.subset(va), tcfg)
    save_checkpoint(args.out, lm, {"alphabet": list(alphabet.labels), "history": res.history})
    print(f"best validation CR {res.best_cr:.4f} at epoch {res.best_epoch}; saved {args.out}")


def cmd_lm_train(args, settings):
    corpus = read_corpus(args.corpus)
    model = TrigramModel.train(corpus, vocabulary=list(args.alphabet) if args.alphabet else None)
    model.save(args.out)
    print(f"trained on {len(corpus)} lines; perplexity on training text {model.perplexity(corpus):.4f}; "
          f"saved {args.out}")


def _decode_setup(args, settings):
    model, meta = load_checkpoint(args.model)
    alphabet = Alphabet(tuple(meta["alphabet"]))
    lm = load_checkpoint(args.lm)[0] if args.lm else None
    ngram = TrigramModel.load(args.ngram) if args.ngram else None
    chain = args.chain or ("lm+beam" if lm and ngram else "lm" if lm else "beam" if ngram else "raw")
    dcfg = DecodeConfig(chain, args.beam_width, args.alpha, args.beta)
    return model, meta, alphabet, lm, ngram, dcfg


def cmd_decode(args, settings):
    model, meta, alphabet, lm, ngram, dcfg = _decode_setup(args, settings)
    fcfg = _features_from_meta(meta["features"])
    for path in args.trajectory:
        for t in load_trajectories(path):
            probs = model.predict(featurize(t, fcfg, args.max_width)[None])[0]
            print(decode(probs, alphabet, dcfg, lm, ngram))


def cmd_eval(args, settings):
    model, meta, alphabet, lm, ngram, dcfg = _decode_setup(args, settings)
    fcfg = _features_from_meta(meta["features"])
    data = _load_dataset(args.manifest, alphabet, fcfg, args.max_width)
    report = evaluate(model, data, alphabet, dcfg, lm, ngram)
    print(f"decoder chain: {dcfg.chain}")
    print(report.table())
    if args.kv_out:
        Path(args.kv_out).write_text(report.to_kv(), encoding="utf-8")
    else:
        print(report.to_kv(), end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sigtext", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key = value settings file (model.*, train.*, features.*, lm.*)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize handwriting samples")
    s.add_argument("--glyphs", choices=("digits", "homoglyph"), default="digits")
    s.add_argument("--corpus", help="UTF-8 corpus, one text per line")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--ordered", action="store_true", help="keep corpus order (default: shuffle characters)")
    s.add_argument("--connector-prob", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("extract", help="trajectory file to SFM1 signature feature map")
    s.add_argument("trajectory")
    s.add_argument("--out", required=True)
    s.add_argument("--depth", type=int)
    s.add_argument("--window", type=int)
    s.add_argument("--max-width", type=int)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("render", help="SFM1 feature map to per-channel PGM images")
    s.add_argument("feature_map")
    s.add_argument("--out", required=True)
    s.add_argument("--channel", type=int)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("rf", help="receptive-field table for a model config or checkpoint")
    s.add_argument("--model", help="MCF1 checkpoint (default: model.* settings or the toy config)")
    s.add_argument("--top", type=float, default=0.0, help="top-layer unit coordinate")
    s.set_defaults(func=cmd_rf)

    s = sub.add_parser("train", help="train the recognizer")
    s.add_argument("--manifest", required=True)
    s.add_argument("--val-manifest")
    s.add_argument("--alphabet", help="symbols in class order (default: sorted label symbols)")
    s.add_argument("--epochs", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("train-lm", help="train the implicit language model on a frozen recognizer")
    s.add_argument("--recognizer", required=True)
    s.add_argument("--manifest", required=True, help="corpus-ordered samples")
    s.add_argument("--unidirectional", action="store_true")
    s.add_argument("--epochs", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train_lm)

    s = sub.add_parser("lm-train", help="train the character trigram model")
    s.add_argument("--corpus", required=True)
    s.add_argument("--alphabet")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_lm_train)

    for name, func, helptext in (("decode", cmd_decode, "transcribe trajectory files"),
                                 ("eval", cmd_eval, "CR/AR over a manifest")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--model", required=True)
        s.add_argument("--lm", help="implicit LM checkpoint")
        s.add_argument("--ngram", help="NGM1 trigram model")
        s.add_argument("--chain", choices=("raw", "lm", "beam", "lm+beam"))
        s.add_argument("--beam-width", type=int, default=8)
        s.add_argument("--alpha", type=float, default=1.0)
        s.add_argument("--beta", type=float, default=0.0)
        s.add_argument("--max-width", type=int, default=600)
        if name == "decode":
            s.add_argument("trajectory", nargs="+")
        else:
            s.add_argument("--manifest", required=True)
            s.add_argument("--kv-out")
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        settings = Settings(Path(args.config).read_text(encoding="utf-8") if args.config else "")
        args.func(args, settings)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, TrajectoryParseError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
