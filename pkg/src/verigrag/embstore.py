"""Row-major float32 embedding container with a JSON id sidecar.

The matrix lives in ``<path>`` as raw little-endian float32 bytes; ids and
the row width live in ``<path>.json``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DuplicateIdError, SchemaError

SIDECAR_SCHEMA_VERSION = 1


def write_embeddings(path, ids: list[str], matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise SchemaError("embedding matrix must have one row per id")
    if len(ids) != len(set(ids)):
        raise DuplicateIdError("embedding ids must be unique")
    Path(path).write_bytes(matrix.tobytes())
    sidecar = {
        "schema_version": SIDECAR_SCHEMA_VERSION,
        "dim": int(matrix.shape[1]),
        "ids": list(ids),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar) + "\n",
                                         encoding="utf-8")


def read_embeddings(path) -> tuple[list[str], np.ndarray]:
    sidecar_path = Path(str(path) + ".json")
    if not sidecar_path.exists():
        raise SchemaError(f"missing embedding sidecar {sidecar_path}")
    sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
    if sidecar.get("schema_version") != SIDECAR_SCHEMA_VERSION:
        raise SchemaError(f"unknown embedding sidecar schema_version "
                          f"{sidecar.get('schema_version')!r}")
    ids = list(sidecar["ids"])
    dim = int(sidecar["dim"])
    raw = Path(path).read_bytes()
    matrix = np.frombuffer(raw, dtype=np.float32)
    if dim and matrix.size != len(ids) * dim:
        raise SchemaError("embedding payload size disagrees with sidecar")
    return ids, matrix.reshape(len(ids), dim).copy()
