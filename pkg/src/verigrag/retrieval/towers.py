"""Neural towers for cross-modal retrieval.

The student is a dual encoder whose text and graph sides never share
parameters, so graph vectors can be pre-encoded and cached. The teacher
inserts one shared cross-attention block before its towers: the graph
embedding is lifted to a short token sequence and each modality attends to
the other, which makes its scores pairwise (accurate, uncacheable).
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import EmptyQueryError
from ..text import HashedTextTokenizer


def pad_batch(id_lists: list[list[int]], max_len: int,
              pad_id: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-pad to a common length; returns (ids, pad_mask) with True = pad."""
    width = max(1, min(max_len, max(len(ids) for ids in id_lists)))
    out = torch.full((len(id_lists), width), pad_id, dtype=torch.long)
    mask = torch.ones((len(id_lists), width), dtype=torch.bool)
    for i, ids in enumerate(id_lists):
        ids = ids[:width]
        out[i, :len(ids)] = torch.tensor(ids, dtype=torch.long)
        mask[i, :len(ids)] = False
    return out, mask


def masked_mean(states: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
    keep = (~pad_mask).unsqueeze(-1).to(states.dtype)
    return (states * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)


class TextEncoderTower(nn.Module):
    """Embedding + positions, a small transformer encoder, mean-pool head."""

    def __init__(self, vocab_size: int, d_model: int = 128, nhead: int = 4,
                 num_layers: int = 2, dim_feedforward: int = 256,
                 max_len: int = 64, out_dim: int = 128):
        super().__init__()
        self.max_len = max_len
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=d_model, nhead=nhead, dim_feedforward=dim_feedforward,
            dropout=0.0, batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, num_layers=num_layers,
                                             enable_nested_tensor=False)
        self.head = nn.Linear(d_model, out_dim)

    def embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device)
        return self.token_emb(ids) + self.pos_emb(positions)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        states = self.encoder(self.embed(ids), src_key_padding_mask=pad_mask)
        return self.head(masked_mean(states, pad_mask))


class GraphEmbTower(nn.Module):
    """Two-layer perceptron from graph-embedding space to retrieval space."""

    def __init__(self, graph_dim: int = 128, hidden_dim: int = 128,
                 out_dim: int = 128):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(graph_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, out_dim),
        )

    def forward(self, g: torch.Tensor) -> torch.Tensor:
        return self.net(g)


class DualEncoder(nn.Module):
    """Student: independent towers, graph side usable without any query."""

    def __init__(self, vocab_size: int, graph_dim: int = 128,
                 d_model: int = 128, out_dim: int = 128, nhead: int = 4,
                 num_layers: int = 2, max_len: int = 64):
        super().__init__()
        self.text = TextEncoderTower(vocab_size, d_model=d_model, nhead=nhead,
                                     num_layers=num_layers, max_len=max_len,
                                     out_dim=out_dim)
        self.graph = GraphEmbTower(graph_dim, hidden_dim=d_model,
                                   out_dim=out_dim)

    def encode_text(self, ids, pad_mask):
        return self.text(ids, pad_mask)

    def encode_graph(self, g):
        return self.graph(g)


class CrossAttentionEncoder(nn.Module):
    """Teacher: shared cross-attention block in front of the two towers."""

    def __init__(self, vocab_size: int, graph_dim: int = 128,
                 d_model: int = 128, out_dim: int = 128, nhead: int = 4,
                 num_layers: int = 2, n_graph_tokens: int = 8,
                 max_len: int = 64):
        super().__init__()
        self.n_graph_tokens = n_graph_tokens
        self.d_model = d_model
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.graph_expand = nn.Linear(graph_dim, n_graph_tokens * d_model)
        # one attention parameter set serves both directions
        self.cross_attn = nn.MultiheadAttention(d_model, nhead, dropout=0.0,
                                                batch_first=True)
        self.norm_text = nn.LayerNorm(d_model)
        self.norm_graph = nn.LayerNorm(d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=d_model, nhead=nhead, dim_feedforward=2 * d_model,
            dropout=0.0, batch_first=True)
        self.text_encoder = nn.TransformerEncoder(layer, num_layers=num_layers,
                                                  enable_nested_tensor=False)
        self.text_head = nn.Linear(d_model, out_dim)
        self.graph_head = nn.Sequential(
            nn.Linear(d_model, d_model), nn.ReLU(),
            nn.Linear(d_model, out_dim))

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor,
                g: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        batch = ids.shape[0]
        positions = torch.arange(ids.shape[1], device=ids.device)
        text = self.token_emb(ids) + self.pos_emb(positions)
        graph = self.graph_expand(g).view(batch, self.n_graph_tokens,
                                          self.d_model)
        # bidirectional interaction through the shared block
        text_x, _ = self.cross_attn(text, graph, graph, need_weights=False)
        graph_x, _ = self.cross_attn(graph, text, text,
                                     key_padding_mask=pad_mask,
                                     need_weights=False)
        text = self.norm_text(text + text_x)
        graph = self.norm_graph(graph + graph_x)

        states = self.text_encoder(text, src_key_padding_mask=pad_mask)
        q_vec = self.text_head(masked_mean(states, pad_mask))
        g_vec = self.graph_head(graph.mean(dim=1))
        return q_vec, g_vec


def encode_queries(tokenizer: HashedTextTokenizer, queries: list[str],
                   max_len: int) -> tuple[torch.Tensor, torch.Tensor]:
    id_lists = []
    for q in queries:
        ids = tokenizer.encode(q)
        if not ids:
            raise EmptyQueryError("query tokenizes to nothing")
        id_lists.append(ids)
    return pad_batch(id_lists, max_len, pad_id=HashedTextTokenizer.PAD)
