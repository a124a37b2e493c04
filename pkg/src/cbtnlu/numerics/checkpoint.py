"""Binary parameter checkpoints: named float64 tensors with bit-exact
round-trip.

Layout: 8-byte magic, 8-byte little-endian manifest length, a UTF-8 JSON
manifest listing (name, shape, byte offset, byte length) per tensor, then
the raw row-major little-endian float64 buffers back to back.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import ParseError
from .params import Parameter

_MAGIC = b"CBTCKPT\n"


def save_checkpoint(path, params: list[Parameter]) -> None:
    entries = []
    offset = 0
    blobs = []
    for p in params:
        data = np.ascontiguousarray(p.value, dtype="<f8").tobytes()
        entries.append({"name": p.name, "shape": list(p.value.shape),
                        "offset": offset, "nbytes": len(data),
                        "decay": p.decay})
        blobs.append(data)
        offset += len(data)
    manifest = json.dumps({"dtype": "<f8", "tensors": entries},
                          sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(manifest).to_bytes(8, "little"))
        fh.write(manifest)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> list[Parameter]:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ParseError(0, f"{path}: not a parameter checkpoint")
        (mlen,) = (int.from_bytes(fh.read(8), "little"),)
        manifest = json.loads(fh.read(mlen).decode("utf-8"))
        base = fh.tell()
        params = []
        for ent in manifest["tensors"]:
            fh.seek(base + ent["offset"])
            raw = fh.read(ent["nbytes"])
            arr = np.frombuffer(raw, dtype="<f8").reshape(ent["shape"]).copy()
            params.append(Parameter(name=ent["name"], value=arr,
                                    decay=ent.get("decay", True)))
    return params


def load_into(path, params: list[Parameter]) -> None:
    """Load a checkpoint into an existing parameter list, matching by name."""
    loaded = {p.name: p for p in load_checkpoint(path)}
    for p in params:
        src = loaded.pop(p.name, None)
        if src is None:
            raise ParseError(0, f"checkpoint missing tensor {p.name!r}")
        if src.value.shape != p.value.shape:
            raise ParseError(0, f"tensor {p.name!r}: shape {src.value.shape} "
                                f"!= expected {p.value.shape}")
        p.value[...] = src.value
    if loaded:
        raise ParseError(0, f"checkpoint has unexpected tensors: {sorted(loaded)}")
