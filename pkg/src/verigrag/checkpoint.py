"""Versioned JSON-of-tensors checkpoint container used across the repo.

Every trained artifact (graph encoder, retriever towers, alignment stages,
the tiny language model) serializes as one JSON document holding its kind,
constructor config, parameter tensors (base64 float32/int64), and loss
trace. Hashes over the parameter payload back the frozen-component tests.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .errors import SchemaError

SCHEMA_VERSION = 1

_DTYPES = {"float32": np.float32, "float64": np.float64, "int64": np.int64}


def _encode_tensor(t: torch.Tensor) -> dict:
    arr = t.detach().cpu().contiguous().numpy()
    if str(arr.dtype) not in _DTYPES:
        raise SchemaError(f"unsupported tensor dtype {arr.dtype}")
    return {
        "dtype": str(arr.dtype),
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _decode_tensor(record: dict) -> torch.Tensor:
    dtype = _DTYPES.get(record.get("dtype"))
    if dtype is None:
        raise SchemaError(f"unsupported tensor dtype {record.get('dtype')!r}")
    raw = base64.b64decode(record["data"])
    arr = np.frombuffer(raw, dtype=dtype).reshape(record["shape"]).copy()
    return torch.from_numpy(arr)


@dataclass
class Checkpoint:
    kind: str
    config: dict
    parameters: dict  # name -> torch.Tensor
    loss_trace: dict | list = field(default_factory=list)

    def parameter_hash(self) -> str:
        return state_dict_hash(self.parameters)


def state_dict_hash(state: dict) -> str:
    """Order-independent digest of named tensors, for freeze contracts."""
    h = hashlib.sha256()
    for name in sorted(state):
        t = state[name]
        if torch.is_tensor(t):
            arr = t.detach().cpu().contiguous().numpy()
        else:
            arr = np.asarray(t)
        h.update(name.encode("utf-8"))
        h.update(str(arr.dtype).encode("ascii"))
        h.update(str(arr.shape).encode("ascii"))
        h.update(arr.tobytes())
    return h.hexdigest()


def module_hash(module: torch.nn.Module) -> str:
    return state_dict_hash(dict(module.state_dict()))


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_checkpoint(path, kind: str, config: dict, parameters: dict,
                    loss_trace=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": config,
        "parameters": {name: _encode_tensor(t)
                       for name, t in parameters.items()},
        "loss_trace": loss_trace if loss_trace is not None else [],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path, expected_kind: str | None = None) -> Checkpoint:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"checkpoint is not valid JSON: {exc}") from exc
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"unknown checkpoint schema_version {doc.get('schema_version')!r}")
    for key in ("kind", "config", "parameters"):
        if key not in doc:
            raise SchemaError(f"checkpoint missing field {key!r}")
    if expected_kind is not None and doc["kind"] != expected_kind:
        raise SchemaError(
            f"expected checkpoint kind {expected_kind!r}, found {doc['kind']!r}")
    params = {name: _decode_tensor(rec)
              for name, rec in doc["parameters"].items()}
    return Checkpoint(kind=doc["kind"], config=doc["config"],
                      parameters=params, loss_trace=doc.get("loss_trace", []))
