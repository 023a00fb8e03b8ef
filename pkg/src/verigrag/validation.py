"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError
from .netlist.graph import DataPathGraph


def check_graph_list(graphs) -> None:
    if not isinstance(graphs, (list, tuple)) or len(graphs) == 0:
        raise DomainError("expected a non-empty list of graphs")
    for g in graphs:
        if not isinstance(g, DataPathGraph):
            raise DomainError(f"expected DataPathGraph, got {type(g).__name__}")


def check_embedding(vec, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float32)
    if arr.ndim != 1:
        raise ShapeError(f"embedding must be 1-d, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ShapeError(f"embedding has dim {arr.shape[0]}, expected {dim}")
    if not np.isfinite(arr).all():
        raise DomainError("embedding contains non-finite values")
    return arr


def check_embedding_matrix(mat, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.float32)
    if arr.ndim != 2:
        raise ShapeError(f"embedding matrix must be 2-d, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ShapeError(f"embeddings have dim {arr.shape[1]}, expected {dim}")
    if not np.isfinite(arr).all():
        raise DomainError("embedding matrix contains non-finite values")
    return arr


def check_pairs(pairs, what: str = "pairs") -> None:
    if not isinstance(pairs, (list, tuple)) or len(pairs) == 0:
        raise DomainError(f"expected a non-empty list of {what}")


def check_positive(name: str, value) -> None:
    if value <= 0:
        raise DomainError(f"{name} must be positive, got {value}")
