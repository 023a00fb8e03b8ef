"""Functional views over the alignment model, used by tests and trainers."""

from __future__ import annotations

import torch

from ..errors import EmptyCodeError, ShapeError


def pad_code_batch(id_lists: list[list[int]],
                   pad_id: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-pad code id lists; returns (ids, pad_mask) with True = pad."""
    if not id_lists or any(len(ids) == 0 for ids in id_lists):
        raise EmptyCodeError("empty code token list")
    width = max(len(ids) for ids in id_lists)
    out = torch.full((len(id_lists), width), pad_id, dtype=torch.long)
    mask = torch.ones((len(id_lists), width), dtype=torch.bool)
    for i, ids in enumerate(id_lists):
        out[i, :len(ids)] = torch.tensor(ids, dtype=torch.long)
        mask[i, :len(ids)] = False
    return out, mask


def forward_graph(model, g_emb: torch.Tensor) -> torch.Tensor:
    """Graph-side pass returning the query outputs [B, Q, d]."""
    return model.forward_graph(g_emb)


def forward_code(model, code_ids: torch.Tensor,
                 pad_mask: torch.Tensor) -> torch.Tensor:
    """Code-side pass returning the pooled representation [B, d]."""
    return model.forward_code(code_ids, pad_mask)


def project_soft_prompt(projection: torch.nn.Module,
                        query_outputs: torch.Tensor) -> torch.Tensor:
    """Map query outputs [Q, d_v] (or batched) into the LM embedding space."""
    if query_outputs.shape[-1] != projection.in_features:
        raise ShapeError(
            f"query outputs have dim {query_outputs.shape[-1]}, projection "
            f"expects {projection.in_features}")
    return projection(query_outputs)
