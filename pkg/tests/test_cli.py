import struct

import pytest

from sigtext.cli import EXIT_NUMERICAL, EXIT_VALIDATION, main
from sigtext.net import load_checkpoint, save_checkpoint


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["--seed", "1", "synth", "--n", "40", "--out", str(d / "train")]) == 0
    assert main(["--seed", "2", "synth", "--n", "6", "--ordered", "--connector-prob", "0.5",
                 "--out", str(d / "test")]) == 0
    (d / "corpus.txt").write_text("0123\n98765\n13579\n", encoding="utf-8")
    assert main(["lm-train", "--corpus", str(d / "corpus.txt"), "--alphabet", "0123456789",
                 "--out", str(d / "lm.ngm")]) == 0
    assert main(["train", "--manifest", str(d / "train" / "manifest.tsv"), "--alphabet", "0123456789",
                 "--epochs", "1", "--out", str(d / "rec.mcf")]) == 0
    return d


def test_synth_outputs(workdir):
    lines = (workdir / "train" / "manifest.tsv").read_text().splitlines()
    assert len(lines) == 40 and all("\t" in line for line in lines)


def test_checkpoint_meta(workdir):
    model, meta = load_checkpoint(workdir / "rec.mcf")
    assert meta["alphabet"] == list("0123456789") and meta["features"]["depth"] == 2
    assert model.config.n_classes == 11


def test_train_lm_decode_eval(workdir, capsys):
    d = workdir
    assert main(["train-lm", "--recognizer", str(d / "rec.mcf"), "--manifest", str(d / "test" / "manifest.tsv"),
                 "--epochs", "1", "--unidirectional", "--out", str(d / "ilm.mcf")]) == 0
    lm, _ = load_checkpoint(d / "ilm.mcf")
    assert not lm.config.bidirectional
    capsys.readouterr()
    assert main(["decode", "--model", str(d / "rec.mcf"), "--ngram", str(d / "lm.ngm"),
                 str(d / "test" / "sample_00000.traj"), str(d / "test" / "sample_00001.traj")]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert main(["eval", "--model", str(d / "rec.mcf"), "--lm", str(d / "ilm.mcf"), "--ngram", str(d / "lm.ngm"),
                 "--manifest", str(d / "test" / "manifest.tsv"), "--kv-out", str(d / "r.kv")]) == 0
    out = capsys.readouterr().out
    assert "decoder chain: lm+beam" in out and "CR" in out
    kv = dict(line.split("=", 1) for line in (d / "r.kv").read_text().splitlines())
    assert float(kv["AR"]) <= float(kv["CR"]) and int(kv["samples"]) == 6


def test_extract_and_render(workdir, capsys):
    d = workdir
    assert main(["extract", str(d / "test" / "sample_00000.traj"), "--depth", "1", "--out", str(d / "f.sfm")]) == 0
    raw = (d / "f.sfm").read_bytes()
    c, h, w = struct.unpack("<III", raw[4:16])
    assert raw[:4] == b"SFM1" and (c, h) == (3, 32)
    assert main(["render", str(d / "f.sfm"), "--out", str(d / "img")]) == 0
    assert all((d / f"img_c{i}.pgm").read_bytes().startswith(b"P5") for i in range(3))


def test_rf_table(capsys):
    assert main(["rf"]) == 0
    out = capsys.readouterr().out
    assert "center formula" in out and "centres aligned: yes" in out


def test_rf_rejects_misaligned_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("model.branch_kernels = 3,4\n")
    assert main(["--config", str(cfg), "rf"]) == EXIT_VALIDATION
    assert "odd" in capsys.readouterr().err


def test_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.traj"
    bad.write_text("0,0 1,oops\n")
    assert main(["extract", str(bad), "--out", str(tmp_path / "x.sfm")]) == EXIT_VALIDATION
    assert "line 1" in capsys.readouterr().err
    cfg = tmp_path / "c.cfg"
    cfg.write_text("hidden = 3\n")
    assert main(["--config", str(cfg), "rf"]) == EXIT_VALIDATION
    assert main(["eval", "--model", str(tmp_path / "missing.mcf"), "--manifest", "x"]) == EXIT_VALIDATION


def test_numerical_failure_exit_code(workdir, tmp_path):
    model, meta = load_checkpoint(workdir / "rec.mcf")
    model.classifier.W.value[...] = float("nan")
    save_checkpoint(tmp_path / "nan.mcf", model, meta)
    code = main(["eval", "--model", str(tmp_path / "nan.mcf"), "--manifest",
                 str(workdir / "test" / "manifest.tsv")])
    assert code == EXIT_NUMERICAL


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        main([])
