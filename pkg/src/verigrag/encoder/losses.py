"""Temperature-scaled contrastive loss over paired embedding batches."""

from __future__ import annotations

import torch

from ..errors import DegenerateInputError, DomainError


def cosine_matrix(z1: torch.Tensor, z2: torch.Tensor) -> torch.Tensor:
    """Pairwise cosine similarities; normalization happens inside."""
    a = torch.nn.functional.normalize(z1, dim=1)
    b = torch.nn.functional.normalize(z2, dim=1)
    return a @ b.T


def info_nce(z1: torch.Tensor, z2: torch.Tensor, tau: float) -> torch.Tensor:
    """Mean over rows of -log softmax(sim(z1_i, z2_j)/tau) at the pair j=i.

    Row i of ``z1`` and row i of ``z2`` are the positive pair; every other
    row of ``z2`` is a negative. Stabilized through logsumexp.
    """
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if z1.shape != z2.shape:
        raise DomainError(f"shape mismatch {tuple(z1.shape)} vs {tuple(z2.shape)}")
    if z1.ndim != 2 or z1.shape[0] < 1:
        raise DomainError("inputs must be non-empty 2-d batches")
    with torch.no_grad():
        if (z1.norm(dim=1) == 0).any() or (z2.norm(dim=1) == 0).any():
            raise DegenerateInputError("zero-norm embedding row")
    logits = cosine_matrix(z1, z2) / tau
    positive = logits.diagonal()
    return (torch.logsumexp(logits, dim=1) - positive).mean()
