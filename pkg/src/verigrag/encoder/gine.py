"""Edge-aware graph convolution used by the structural encoder.

The update for node i is

    x_i' = h((1 + eps) * x_i + sum_{j -> i} relu(x_j + proj(e_{j,i})))

where the sum runs over in-neighbors, edge features are first projected to
the node-feature width, and h is a two-layer MLP. Nodes without incoming
edges keep only the scaled self term.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ShapeError


def gine_conv(layer, x: torch.Tensor, edge_index: torch.Tensor,
              edge_attr: torch.Tensor) -> torch.Tensor:
    """Apply one convolution given any layer exposing eps/mlp/edge_proj.

    ``edge_index`` is [2, E] with rows (src, dst); messages flow src -> dst.
    """
    if x.ndim != 2:
        raise ShapeError(f"node features must be 2-d, got {tuple(x.shape)}")
    if edge_index.ndim != 2 or edge_index.shape[0] != 2:
        raise ShapeError(f"edge_index must be [2, E], got {tuple(edge_index.shape)}")
    n_edges = edge_index.shape[1]
    if edge_attr.shape[0] != n_edges:
        raise ShapeError(f"{n_edges} edges but {edge_attr.shape[0]} edge features")

    eps = layer.eps
    if not torch.is_tensor(eps):
        eps = torch.as_tensor(eps, dtype=x.dtype)
    agg = torch.zeros_like(x)
    if n_edges > 0:
        src, dst = edge_index[0], edge_index[1]
        projected = layer.edge_proj(edge_attr)
        if projected.shape[-1] != x.shape[-1]:
            raise ShapeError(
                f"projected edge features have dim {projected.shape[-1]}, "
                f"node features have dim {x.shape[-1]}")
        messages = torch.relu(x[src] + projected)
        agg = agg.index_add(0, dst, messages)
    return layer.mlp((1.0 + eps) * x + agg)


class GINELayer(nn.Module):
    """Learnable convolution layer: eps starts at 0, h is Linear-ReLU-Linear."""

    def __init__(self, in_dim: int, out_dim: int, edge_dim: int = 1):
        super().__init__()
        self.eps = nn.Parameter(torch.zeros(()))
        self.mlp = nn.Sequential(
            nn.Linear(in_dim, out_dim),
            nn.ReLU(),
            nn.Linear(out_dim, out_dim),
        )
        self.edge_proj = nn.Linear(edge_dim, in_dim)

    def forward(self, x, edge_index, edge_attr):
        return gine_conv(self, x, edge_index, edge_attr)
