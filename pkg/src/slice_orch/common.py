import json
import os
import tempfile
import zlib
from pathlib import Path
from typing import Any

import numpy as np

from .errors import MissingArtifactError

SCHEMA_VERSION = 1


def make_rng(seed: int, *keys) -> np.random.Generator:
    """Derive an independent generator for a component from the run seed.

    Keys may be ints or strings; strings are hashed with crc32 so the stream
    is stable across interpreter runs (unlike ``hash``).
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            entropy.append(zlib.crc32(key.encode("utf-8")))
        else:
            entropy.append(int(key) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def array_to_json(arr: np.ndarray) -> dict:
    """Row-major tensor document; floats keep their shortest round-trip repr."""
    arr = np.asarray(arr, dtype=float)
    return {"shape": list(arr.shape), "data": [float(x) for x in arr.ravel()]}


def array_from_json(doc: dict) -> np.ndarray:
    return np.asarray(doc["data"], dtype=float).reshape(doc["shape"])


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, doc: dict) -> None:
    """Write a JSON artifact atomically, stamping schema_version."""
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    _atomic_write_text(Path(path), json.dumps(doc, indent=1, sort_keys=False) + "\n")


def write_text(path, text: str) -> None:
    _atomic_write_text(Path(path), text)


def read_json(path, stage: str = "unknown") -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path, stage)
    with open(path) as f:
        doc = json.load(f)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}")
    return doc
