"""Stochastic graph views for contrastive training.

A view keeps all nodes, drops each edge independently (never the last
one), and adds Gaussian noise to the node feature matrix. Views are pure
functions of (policy seed, draw index), so training runs replay exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyGraphError
from ..netlist.graph import DataPathGraph
from .featurizer import NodeFeaturizer


@dataclass(frozen=True)
class AugmentationPolicy:
    edge_drop_prob: float = 0.15
    feature_noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.edge_drop_prob < 1.0:
            raise ValueError("edge_drop_prob must be in [0, 1)")
        if self.feature_noise_sigma < 0.0:
            raise ValueError("feature_noise_sigma must be non-negative")


@dataclass
class GraphView:
    """Augmented graph: perturbed features plus a surviving edge subset."""
    x: np.ndarray           # [N, F] float32
    edge_index: np.ndarray  # [2, E] int64, rows (src, dst)
    edge_attr: np.ndarray   # [E, 1] float32 normalized widths
    num_nodes: int


def graph_arrays(graph: DataPathGraph,
                 featurizer: NodeFeaturizer) -> GraphView:
    """Un-augmented tensors for a graph (the identity view)."""
    if not graph.nodes:
        raise EmptyGraphError(f"graph {graph.module_name!r} has no nodes")
    x = featurizer.featurize_graph(graph)
    if graph.edges:
        edge_index = np.array([[e.src for e in graph.edges],
                               [e.dst for e in graph.edges]], dtype=np.int64)
        edge_attr = np.array([[e.width_norm] for e in graph.edges],
                             dtype=np.float32)
    else:
        edge_index = np.zeros((2, 0), dtype=np.int64)
        edge_attr = np.zeros((0, 1), dtype=np.float32)
    return GraphView(x=x, edge_index=edge_index, edge_attr=edge_attr,
                     num_nodes=len(graph.nodes))


def augment(graph: DataPathGraph, policy: AugmentationPolicy, draw: int,
            featurizer: NodeFeaturizer | None = None) -> GraphView:
    """One stochastic view, deterministic in (policy.seed, draw)."""
    featurizer = featurizer or NodeFeaturizer()
    base = graph_arrays(graph, featurizer)
    rng = np.random.default_rng([policy.seed & 0xFFFFFFFF, draw & 0xFFFFFFFF])

    edge_index, edge_attr = base.edge_index, base.edge_attr
    n_edges = edge_index.shape[1]
    if policy.edge_drop_prob > 0.0 and n_edges > 0:
        keep = rng.random(n_edges) >= policy.edge_drop_prob
        if not keep.any():
            keep[0] = True  # a view never empties a graph's edge set
        edge_index = edge_index[:, keep]
        edge_attr = edge_attr[keep]

    x = base.x
    if policy.feature_noise_sigma > 0.0:
        noise = rng.standard_normal(x.shape).astype(np.float32)
        x = x + policy.feature_noise_sigma * noise

    return GraphView(x=x, edge_index=edge_index, edge_attr=edge_attr,
                     num_nodes=base.num_nodes)
