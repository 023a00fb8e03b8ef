"""Cosine retrieval index over pre-encoded student graph vectors.

The exact backend is a dense matrix scanned per query and defines the
reference ranking; approximate backends plug in behind the same
insert/query contract but are not shipped.
"""

from __future__ import annotations

import base64
import json
from abc import ABC, abstractmethod

import numpy as np

from ..errors import (DegenerateInputError, DuplicateIdError, EmptyQueryError,
                      SchemaError)
from ..validation import check_embedding_matrix

INDEX_SCHEMA_VERSION = 1


class ApproximateBackend(ABC):
    """Contract for pluggable approximate nearest-neighbor backends.

    Implementations index unit-norm float32 vectors under string ids.
    ``query`` returns up to k (id, cosine) pairs ordered by descending
    score with ties broken by ascending id; recall against the exact
    backend is implementation-defined.
    """

    @abstractmethod
    def insert(self, ids: list[str], vectors: np.ndarray) -> None:
        """Add unit-norm rows; ids must not repeat across calls."""

    @abstractmethod
    def query(self, vector: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Approximate top-k by cosine against the inserted rows."""


class RetrievalIndex:
    """Immutable exact-cosine index: unit-norm rows plus their ids."""

    def __init__(self, ids: list[str], vectors: np.ndarray,
                 backend: str = "exact"):
        if len(ids) != len(set(ids)):
            raise DuplicateIdError("index ids must be unique")
        if backend != "exact":
            raise SchemaError(f"unknown index backend {backend!r}")
        self.ids = list(ids)
        self.backend = backend
        if len(ids) == 0:
            self.vectors = np.zeros((0, 0), dtype=np.float32)
            self.dim = 0
            return
        vectors = check_embedding_matrix(vectors)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if (norms == 0).any():
            raise DegenerateInputError("zero-norm vector cannot be indexed")
        self.vectors = (vectors / norms).astype(np.float32)
        self.dim = self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def query_vector(self, vector: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Exact top-min(k, size) by cosine; ties broken by ascending id."""
        if k < 1:
            raise ValueError("k must be at least 1")
        if len(self.ids) == 0:
            return []
        v = np.asarray(vector, dtype=np.float32).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DegenerateInputError("zero-norm query vector")
        scores = self.vectors @ (v / norm)
        ranked = sorted(range(len(self.ids)),
                        key=lambda i: (-scores[i], self.ids[i]))
        return [(self.ids[i], float(scores[i])) for i in ranked[:k]]

    # -- persistence: schema {"schema_version","dim","ids","vectors"} --
    def save(self, path) -> None:
        doc = {
            "schema_version": INDEX_SCHEMA_VERSION,
            "dim": int(self.dim),
            "ids": self.ids,
            "vectors": base64.b64encode(
                self.vectors.astype(np.float32).tobytes()).decode("ascii"),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path) -> "RetrievalIndex":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"index is not valid JSON: {exc}") from exc
        if doc.get("schema_version") != INDEX_SCHEMA_VERSION:
            raise SchemaError(
                f"unknown index schema_version {doc.get('schema_version')!r}")
        for key in ("dim", "ids", "vectors"):
            if key not in doc:
                raise SchemaError(f"index missing field {key!r}")
        ids = list(doc["ids"])
        raw = base64.b64decode(doc["vectors"])
        dim = int(doc["dim"])
        if dim == 0 or not ids:
            return cls(ids=[], vectors=np.zeros((0, 0), dtype=np.float32))
        vectors = np.frombuffer(raw, dtype=np.float32).reshape(len(ids), dim)
        index = cls(ids=ids, vectors=vectors.copy())
        # stored rows are already unit norm; keep them bit-exact
        index.vectors = vectors.copy()
        return index


def build_index(embeddings: list[tuple[str, np.ndarray]],
                student) -> RetrievalIndex:
    """Run the student's graph tower over raw embeddings and index the rows."""
    ids = [e[0] for e in embeddings]
    if len(ids) != len(set(ids)):
        raise DuplicateIdError("duplicate graph ids in embedding list")
    if not ids:
        return RetrievalIndex(ids=[], vectors=np.zeros((0, 0), dtype=np.float32))
    raw = np.stack([np.asarray(e[1], dtype=np.float32) for e in embeddings])
    vectors = student.encode_graph(raw)
    return RetrievalIndex(ids=ids, vectors=vectors)


def retrieve(index: RetrievalIndex, query: str, student,
             k: int) -> list[tuple[str, float]]:
    """Rank index entries against a text query through the student towers."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not query.strip():
        raise EmptyQueryError("empty query")
    if len(index) == 0:
        return []
    q_vec = student.encode_text([query])[0]
    return index.query_vector(q_vec, k)
