"""Deterministic node features via hashed bag-of-tokens.

Node attributes (kind, operation type, I/O type, port names, parameters)
become string tokens, each hashed to a bucket with a sign bit, summed and
L2-normalized. Identical attribute tuples always map to identical vectors,
so features need no fitting and no stored vocabulary. A contextual text
encoder can be swapped in through the same featurize interface.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..netlist.graph import DataPathGraph, GraphNode


class NodeFeaturizer:
    """Hash node attribute tokens into a fixed-dimension unit vector."""

    def __init__(self, seed: int = 0, output_dim: int = 64):
        if output_dim < 2:
            raise ValueError("output_dim must be at least 2")
        self.seed = seed
        self.output_dim = output_dim
        self._key = seed.to_bytes(8, "little", signed=True)

    @staticmethod
    def node_tokens(node: GraphNode) -> list[str]:
        tokens = [f"kind:{node.kind}", f"op:{node.op_type}"]
        if node.io_type is not None:
            tokens.append(f"io:{node.io_type}")
        tokens.extend(f"port:{p}" for p in node.port_names)
        tokens.extend(f"param:{k}={v}" for k, v in node.params)
        return tokens

    def _hash(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                                 key=self._key).digest()
        return int.from_bytes(digest, "little")

    def featurize_node(self, node: GraphNode) -> np.ndarray:
        v = np.zeros(self.output_dim, dtype=np.float64)
        for token in self.node_tokens(node):
            h = self._hash(token)
            bucket = h % self.output_dim
            sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
            v[bucket] += sign
        norm = np.linalg.norm(v)
        if norm == 0.0:
            # all tokens cancelled; fall back to a one-hot on the kind bucket
            v[self._hash(f"kind:{node.kind}") % self.output_dim] = 1.0
            norm = 1.0
        return (v / norm).astype(np.float32)

    def featurize_graph(self, graph: DataPathGraph) -> np.ndarray:
        if not graph.nodes:
            return np.zeros((0, self.output_dim), dtype=np.float32)
        return np.stack([self.featurize_node(n) for n in graph.nodes])
