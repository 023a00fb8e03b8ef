"""Alignment objectives: contrastive, matching, generation, distribution.

The contrastive score between a graph's query outputs and a pooled code
vector is the best cosine over queries; matching averages per-query binary
logits; generation is next-token cross-entropy under the multimodal causal
mask; the distribution loss is a KL divergence between softmax-normalized
description-embedding rows and soft-prompt rows.
"""

from __future__ import annotations

import torch

from ..errors import (DegenerateBatchError, DomainError, EmptyCodeError,
                      ShapeError)


def alignment_scores(query_outputs: torch.Tensor,
                     code_vectors: torch.Tensor) -> torch.Tensor:
    """Best-query cosine matrix [B_g, B_c].

    ``query_outputs`` is [B_g, Q, d]; ``code_vectors`` is [B_c, d]. Entry
    (i, j) is the maximum over the Q cosines between i's query outputs and
    code vector j.
    """
    if query_outputs.ndim != 3 or code_vectors.ndim != 2:
        raise ShapeError("expected [B,Q,d] query outputs and [B,d] code vectors")
    if query_outputs.shape[-1] != code_vectors.shape[-1]:
        raise ShapeError("query and code dims differ")
    g = torch.nn.functional.normalize(query_outputs, dim=2)
    c = torch.nn.functional.normalize(code_vectors, dim=1)
    sims = torch.einsum("bqd,kd->bqk", g, c)
    return sims.max(dim=1).values


def gcc_loss(query_outputs: torch.Tensor, code_vectors: torch.Tensor,
             tau: float) -> torch.Tensor:
    """Symmetric in-batch contrastive loss over best-query alignment scores."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if query_outputs.shape[0] != code_vectors.shape[0]:
        raise ShapeError("graph and code batches differ in size")
    if query_outputs.shape[0] < 2:
        raise DomainError("contrastive batch needs at least 2 pairs")
    logits = alignment_scores(query_outputs, code_vectors) / tau
    targets = torch.arange(logits.shape[0], device=logits.device)
    graph_to_code = torch.nn.functional.cross_entropy(logits, targets)
    code_to_graph = torch.nn.functional.cross_entropy(logits.T, targets)
    return 0.5 * (graph_to_code + code_to_graph)


def mean_logit_score(per_query_logits: torch.Tensor) -> torch.Tensor:
    """Matching score: arithmetic mean of per-query logits, one per pair."""
    if per_query_logits.ndim != 2:
        raise ShapeError("expected [B, Q] per-query logits")
    return per_query_logits.mean(dim=1)


def gcm_loss(model, g_emb: torch.Tensor, code_ids: torch.Tensor,
             pad_mask: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy on mean-logit matching scores."""
    if labels.ndim != 1 or labels.shape[0] != g_emb.shape[0]:
        raise ShapeError("labels must align with the batch")
    unique = torch.unique(labels)
    if unique.numel() < 2:
        raise DegenerateBatchError("matching batch needs both labels")
    scores = mean_logit_score(model.matching_logits(g_emb, code_ids, pad_mask))
    return torch.nn.functional.binary_cross_entropy_with_logits(
        scores, labels.to(scores.dtype))


def gcg_loss(model, g_emb: torch.Tensor, code_ids: torch.Tensor,
             pad_mask: torch.Tensor,
             per_position: bool = False):
    """Next-token cross-entropy of code under the multimodal causal mask.

    Position p's loss predicts token p+1; pads are ignored. With
    ``per_position`` the unreduced [B, L-1] loss matrix is returned too.
    """
    if code_ids.shape[1] < 2:
        raise EmptyCodeError("generation needs at least 2 code tokens")
    _, code_out = model.forward_joint(g_emb, code_ids, pad_mask, causal=True)
    logits = model.lm_head(code_out[:, :-1])
    targets = code_ids[:, 1:]
    target_pad = pad_mask[:, 1:]
    losses = torch.nn.functional.cross_entropy(
        logits.transpose(1, 2), targets, reduction="none")
    losses = losses.masked_fill(target_pad, 0.0)
    denom = (~target_pad).sum().clamp(min=1)
    loss = losses.sum() / denom
    if per_position:
        return loss, losses
    return loss


def kl_distribution_loss(z: torch.Tensor, g: torch.Tensor,
                         mode: str = "row_mean") -> torch.Tensor:
    """KL(softmax(z_row) || softmax(g_row)) averaged over rows.

    ``z`` holds description-token embedding rows, ``g`` soft-prompt rows.
    When row counts differ under ``row_mean`` both sides collapse to their
    row mean first; ``per_row`` requires equal row counts.
    """
    if z.ndim != 2 or g.ndim != 2:
        raise ShapeError("inputs must be 2-d")
    if z.shape[1] != g.shape[1]:
        raise ShapeError(f"feature dims differ: {z.shape[1]} vs {g.shape[1]}")
    if z.shape[0] != g.shape[0]:
        if mode == "per_row":
            raise ShapeError(f"per_row pairing needs equal row counts, got "
                             f"{z.shape[0]} vs {g.shape[0]}")
        z = z.mean(dim=0, keepdim=True)
        g = g.mean(dim=0, keepdim=True)
    log_p = torch.log_softmax(z, dim=1)
    log_q = torch.log_softmax(g, dim=1)
    return (log_p.exp() * (log_p - log_q)).sum(dim=1).mean()
