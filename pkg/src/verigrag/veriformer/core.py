"""Query-token transformer that reads graph embeddings for a language model.

A bank of learnable query tokens passes through blocks whose
self-attention parameters are shared between two views: a graph pass
(queries cross-attend to the expanded graph-token sequence) and a code
pass (token embeddings only). Joint passes concatenate queries and code
under a mode-specific attention mask:

- contrastive: queries and code never attend to each other (separate passes)
- matching: everything attends to everything
- generation: queries see only queries; code position t sees every query
  and code positions <= t
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import EmptyCodeError, ShapeError


def generation_mask(n_queries: int, n_code: int,
                    device=None) -> torch.Tensor:
    """Boolean [S, S] mask, True = attention blocked."""
    size = n_queries + n_code
    mask = torch.zeros((size, size), dtype=torch.bool, device=device)
    # query rows: block all code columns
    mask[:n_queries, n_queries:] = True
    # code rows: causal within code, queries always visible
    code_cols = torch.arange(n_code, device=device)
    mask[n_queries:, n_queries:] = code_cols[None, :] > code_cols[:, None]
    return mask


class VeriFormerBlock(nn.Module):
    """Pre-norm block: shared self-attention, query-only cross-attention, FFN."""

    def __init__(self, d_model: int, nhead: int):
        super().__init__()
        self.self_attn = nn.MultiheadAttention(d_model, nhead, dropout=0.0,
                                               batch_first=True)
        self.cross_attn = nn.MultiheadAttention(d_model, nhead, dropout=0.0,
                                                batch_first=True)
        self.norm_self = nn.LayerNorm(d_model)
        self.norm_cross = nn.LayerNorm(d_model)
        self.norm_ffn = nn.LayerNorm(d_model)
        self.ffn = nn.Sequential(
            nn.Linear(d_model, 4 * d_model),
            nn.GELU(),
            nn.Linear(4 * d_model, d_model),
        )

    def forward(self, x: torch.Tensor, n_queries: int,
                graph_tokens: torch.Tensor | None = None,
                attn_mask: torch.Tensor | None = None,
                key_padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        h = self.norm_self(x)
        attn_out, _ = self.self_attn(h, h, h, attn_mask=attn_mask,
                                     key_padding_mask=key_padding_mask,
                                     need_weights=False)
        x = x + attn_out
        if graph_tokens is not None and n_queries > 0:
            q = self.norm_cross(x[:, :n_queries])
            cross_out, _ = self.cross_attn(q, graph_tokens, graph_tokens,
                                           need_weights=False)
            x = torch.cat([x[:, :n_queries] + cross_out, x[:, n_queries:]],
                          dim=1)
        return x + self.ffn(self.norm_ffn(x))


class VeriFormerCore(nn.Module):
    """Shared blocks plus the code-token embedder."""

    def __init__(self, vocab_size: int, d_model: int = 64, n_blocks: int = 2,
                 nhead: int = 4, max_len: int = 160):
        super().__init__()
        self.d_model = d_model
        self.max_len = max_len
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.blocks = nn.ModuleList(VeriFormerBlock(d_model, nhead)
                                    for _ in range(n_blocks))
        self.final_norm = nn.LayerNorm(d_model)

    def embed_code(self, code_ids: torch.Tensor) -> torch.Tensor:
        if code_ids.shape[1] > self.max_len:
            raise ShapeError(f"code length {code_ids.shape[1]} exceeds "
                             f"max_len {self.max_len}")
        positions = torch.arange(code_ids.shape[1], device=code_ids.device)
        return self.token_emb(code_ids) + self.pos_emb(positions)

    def run(self, x: torch.Tensor, n_queries: int,
            graph_tokens: torch.Tensor | None = None,
            attn_mask: torch.Tensor | None = None,
            key_padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        for block in self.blocks:
            x = block(x, n_queries, graph_tokens=graph_tokens,
                      attn_mask=attn_mask, key_padding_mask=key_padding_mask)
        return self.final_norm(x)


class VeriFormerModel(nn.Module):
    """Core plus query bank, graph expansion, matching and LM heads."""

    def __init__(self, vocab_size: int, d_model: int = 64, n_blocks: int = 2,
                 nhead: int = 4, n_queries: int = 8, graph_dim: int = 128,
                 n_graph_tokens: int = 8, max_len: int = 160):
        super().__init__()
        self.n_queries = n_queries
        self.n_graph_tokens = n_graph_tokens
        self.d_model = d_model
        self.query_bank = nn.Parameter(torch.randn(n_queries, d_model) * 0.02)
        self.graph_expand = nn.Linear(graph_dim, n_graph_tokens * d_model)
        self.core = VeriFormerCore(vocab_size, d_model=d_model,
                                   n_blocks=n_blocks, nhead=nhead,
                                   max_len=max_len)
        self.match_head = nn.Linear(d_model, 1)
        self.lm_head = nn.Linear(d_model, vocab_size)

    def graph_tokens(self, g_emb: torch.Tensor) -> torch.Tensor:
        if g_emb.ndim != 2:
            raise ShapeError(f"graph embeddings must be [B, d_g], got "
                             f"{tuple(g_emb.shape)}")
        return self.graph_expand(g_emb).view(g_emb.shape[0],
                                             self.n_graph_tokens, self.d_model)

    def queries(self, batch: int) -> torch.Tensor:
        return self.query_bank.unsqueeze(0).expand(batch, -1, -1)

    def forward_graph(self, g_emb: torch.Tensor) -> torch.Tensor:
        """Graph pass: query outputs [B, Q, d]; no code tokens involved."""
        tokens = self.graph_tokens(g_emb)
        return self.core.run(self.queries(g_emb.shape[0]), self.n_queries,
                             graph_tokens=tokens)

    def forward_code(self, code_ids: torch.Tensor,
                     pad_mask: torch.Tensor) -> torch.Tensor:
        """Bidirectional code pass returning the pooled representation [B, d]."""
        if code_ids.shape[1] == 0 or bool(pad_mask.all()):
            raise EmptyCodeError("code input has no tokens")
        states = self.core.run(self.core.embed_code(code_ids), 0,
                               key_padding_mask=pad_mask)
        keep = (~pad_mask).unsqueeze(-1).to(states.dtype)
        return (states * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)

    def forward_joint(self, g_emb: torch.Tensor, code_ids: torch.Tensor,
                      pad_mask: torch.Tensor,
                      causal: bool) -> tuple[torch.Tensor, torch.Tensor]:
        """Joint pass; returns (query outputs [B,Q,d], code outputs [B,L,d])."""
        batch, n_code = code_ids.shape
        x = torch.cat([self.queries(batch), self.core.embed_code(code_ids)],
                      dim=1)
        attn_mask = (generation_mask(self.n_queries, n_code, x.device)
                     if causal else None)
        padding = torch.cat(
            [torch.zeros(batch, self.n_queries, dtype=torch.bool,
                         device=x.device), pad_mask], dim=1)
        out = self.core.run(x, self.n_queries,
                            graph_tokens=self.graph_tokens(g_emb),
                            attn_mask=attn_mask, key_padding_mask=padding)
        return out[:, :self.n_queries], out[:, self.n_queries:]

    def matching_logits(self, g_emb: torch.Tensor, code_ids: torch.Tensor,
                        pad_mask: torch.Tensor) -> torch.Tensor:
        """Per-query matching logits [B, Q] from the bidirectional joint pass."""
        q_out, _ = self.forward_joint(g_emb, code_ids, pad_mask, causal=False)
        return self.match_head(q_out).squeeze(-1)
