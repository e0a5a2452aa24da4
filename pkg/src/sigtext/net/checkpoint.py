"""``MCF1`` checkpoints: magic, version, JSON manifest, float32 parameter blobs.

Layout (little-endian)::

    b"MCF1" | u32 version | u32 manifest_len | manifest (UTF-8 JSON) | blobs

The manifest records the model kind, its key-value config, any extra
metadata (e.g. alphabet) and the name/shape/offset of every parameter.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import ImplicitLM, LMConfig, MCFCRN, ModelConfig

MCF_MAGIC = b"MCF1"
MCF_VERSION = 1


def save_checkpoint(path, model, meta: dict | None = None) -> None:
    if isinstance(model, MCFCRN):
        kind = "mcfcrn"
    elif isinstance(model, ImplicitLM):
        kind = "implicit_lm"
    else:
        raise TypeError(f"cannot checkpoint {type(model).__name__}")
    entries = []
    blobs = []
    offset = 0
    for p in model.params():
        arr = np.ascontiguousarray(p.value, dtype="<f4")
        entries.append({"name": p.name, "shape": list(p.value.shape), "offset": offset})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    manifest = {"kind": kind, "config": model.config.to_kv(), "meta": meta or {}, "params": entries}
    raw = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MCF_MAGIC + struct.pack("<II", MCF_VERSION, len(raw)) + raw)
        for b in blobs:
            fh.write(b)


def load_checkpoint(path):
    """Return ``(model, meta)``."""
    raw = Path(path).read_bytes()
    if raw[:4] != MCF_MAGIC:
        raise ValueError(f"{path}: not an MCF1 checkpoint")
    version, mlen = struct.unpack_from("<II", raw, 4)
    if version != MCF_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    manifest = json.loads(raw[12 : 12 + mlen].decode("utf-8"))
    base = 12 + mlen
    if manifest["kind"] == "mcfcrn":
        model = MCFCRN(ModelConfig.from_kv(manifest["config"]))
    elif manifest["kind"] == "implicit_lm":
        model = ImplicitLM(LMConfig.from_kv(manifest["config"]))
    else:
        raise ValueError(f"{path}: unknown model kind {manifest['kind']!r}")
    params = {p.name: p for p in model.params()}
    if set(params) != {e["name"] for e in manifest["params"]}:
        raise ValueError(f"{path}: parameter manifest does not match the model config")
    for e in manifest["params"]:
        p = params[e["name"]]
        shape = tuple(e["shape"])
        if shape != p.value.shape:
            raise ValueError(f"{path}: {e['name']} has shape {shape}, model expects {p.value.shape}")
        n = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=base + e["offset"])
        p.value[...] = arr.reshape(shape)
    return model, manifest["meta"]
