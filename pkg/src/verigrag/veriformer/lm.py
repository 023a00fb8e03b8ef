"""Tiny frozen decoder-only language model for desk-scale soft prompting.

The model is reached only through an embedding-level interface — embed
token ids, forward from input embeddings, sample with temperature — so any
language model honoring those three calls can replace it. Positions are
added inside the forward pass, which keeps prepended soft-prompt rows
position-consistent with ordinary tokens.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .. import checkpoint as ckpt
from ..errors import ConfigError, ShapeError
from ..text import CodeTokenizer


class _DecoderBlock(nn.Module):
    def __init__(self, d_model: int, nhead: int):
        super().__init__()
        self.attn = nn.MultiheadAttention(d_model, nhead, dropout=0.0,
                                          batch_first=True)
        self.norm_attn = nn.LayerNorm(d_model)
        self.norm_ffn = nn.LayerNorm(d_model)
        self.ffn = nn.Sequential(
            nn.Linear(d_model, 4 * d_model),
            nn.GELU(),
            nn.Linear(4 * d_model, d_model),
        )

    def forward(self, x: torch.Tensor, causal: torch.Tensor) -> torch.Tensor:
        h = self.norm_attn(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=causal, need_weights=False)
        x = x + attn_out
        return x + self.ffn(self.norm_ffn(x))


class TinyCausalLM(nn.Module):
    """Two-block causal transformer over the code tokenizer's vocabulary."""

    def __init__(self, tokenizer: CodeTokenizer, d_model: int = 96,
                 n_blocks: int = 2, nhead: int = 4, max_len: int = 256):
        super().__init__()
        self.tokenizer = tokenizer
        self.d_model = d_model
        self.max_len = max_len
        self.token_emb = nn.Embedding(tokenizer.vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.blocks = nn.ModuleList(_DecoderBlock(d_model, nhead)
                                    for _ in range(n_blocks))
        self.final_norm = nn.LayerNorm(d_model)
        self.lm_head = nn.Linear(d_model, tokenizer.vocab_size)

    @property
    def embed_dim(self) -> int:
        return self.d_model

    def embed_tokens(self, ids: torch.Tensor) -> torch.Tensor:
        """Token embeddings only; positions are applied in the forward pass."""
        return self.token_emb(ids)

    def forward_embeds(self, embeds: torch.Tensor) -> torch.Tensor:
        """Logits [B, S, V] from input embeddings [B, S, d]."""
        if embeds.ndim != 3 or embeds.shape[-1] != self.d_model:
            raise ShapeError(f"expected [B, S, {self.d_model}] embeddings, "
                             f"got {tuple(embeds.shape)}")
        seq_len = embeds.shape[1]
        if seq_len > self.max_len:
            raise ShapeError(f"sequence length {seq_len} exceeds max_len "
                             f"{self.max_len}")
        positions = torch.arange(seq_len, device=embeds.device)
        x = embeds + self.pos_emb(positions)
        causal = torch.triu(torch.ones(seq_len, seq_len, dtype=torch.bool,
                                       device=embeds.device), diagonal=1)
        for block in self.blocks:
            x = block(x, causal)
        return self.lm_head(self.final_norm(x))

    @torch.no_grad()
    def sample(self, prefix_embeds: torch.Tensor, max_new_tokens: int,
               temperature: float,
               generator: torch.Generator | None = None) -> list[int]:
        """Autoregressive ids from an embedding prefix; temperature 0 is greedy."""
        if prefix_embeds.ndim != 2:
            raise ShapeError("prefix must be [S, d]")
        embeds = prefix_embeds.unsqueeze(0)
        out: list[int] = []
        for _ in range(max_new_tokens):
            if embeds.shape[1] >= self.max_len:
                break
            logits = self.forward_embeds(embeds)[0, -1]
            if temperature <= 0.0:
                token = int(logits.argmax())
            else:
                probs = torch.softmax(logits / temperature, dim=0)
                token = int(torch.multinomial(probs, 1, generator=generator))
            if token == self.tokenizer.EOS:
                break
            out.append(token)
            next_emb = self.token_emb(torch.tensor([[token]]))
            embeds = torch.cat([embeds, next_emb], dim=1)
        return out


def pack_sequences(lm_tokenizer: CodeTokenizer, description: str,
                   code: str, max_len: int) -> tuple[list[int], list[int]]:
    """Canonical (description ids, bos+code+eos ids) packing for the LM."""
    desc_ids = lm_tokenizer.encode(description)
    code_ids = lm_tokenizer.encode(code, add_bos=True, add_eos=True)
    overflow = len(desc_ids) + len(code_ids) - max_len
    if overflow > 0:
        desc_ids = desc_ids[:max(1, len(desc_ids) - overflow)]
    return desc_ids, code_ids


def train_lm(samples: list[tuple[str, str]], d_model: int = 96,
             n_blocks: int = 2, nhead: int = 4, max_len: int = 256,
             max_vocab: int = 2048, epochs: int = 30, batch_size: int = 8,
             learning_rate: float = 1e-3, seed: int = 0) -> TinyCausalLM:
    """Pretrain the tiny LM on (description, code) concatenations."""
    if not samples:
        raise ConfigError("LM pretraining needs at least one sample")
    torch.manual_seed(seed)
    tokenizer = CodeTokenizer.build(
        [d for d, _ in samples] + [c for _, c in samples], max_vocab=max_vocab)
    lm = TinyCausalLM(tokenizer, d_model=d_model, n_blocks=n_blocks,
                      nhead=nhead, max_len=max_len)
    sequences = []
    for desc, code in samples:
        desc_ids, code_ids = pack_sequences(tokenizer, desc, code,
                                            max_len - 8)
        sequences.append(desc_ids + code_ids)
    optimizer = torch.optim.AdamW(lm.parameters(), lr=learning_rate)
    rng = np.random.default_rng(seed)
    pad = tokenizer.PAD
    for _ in range(epochs):
        order = rng.permutation(len(sequences))
        for start in range(0, len(sequences), batch_size):
            chunk = [sequences[i] for i in order[start:start + batch_size]]
            width = max(len(s) for s in chunk)
            ids = torch.full((len(chunk), width), pad, dtype=torch.long)
            for i, s in enumerate(chunk):
                ids[i, :len(s)] = torch.tensor(s, dtype=torch.long)
            logits = lm.forward_embeds(lm.embed_tokens(ids))
            targets = ids[:, 1:]
            loss = torch.nn.functional.cross_entropy(
                logits[:, :-1].transpose(1, 2), targets, ignore_index=pad)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    lm.eval()
    for p in lm.parameters():
        p.requires_grad_(False)
    return lm


def save_lm(path, lm: TinyCausalLM) -> None:
    config = {
        "tokenizer": lm.tokenizer.to_config(),
        "d_model": lm.d_model,
        "n_blocks": len(lm.blocks),
        "nhead": lm.blocks[0].attn.num_heads,
        "max_len": lm.max_len,
    }
    ckpt.save_checkpoint(path, kind="lm", config=config,
                         parameters=dict(lm.state_dict()))


def load_lm(path) -> TinyCausalLM:
    chk = ckpt.load_checkpoint(path, expected_kind="lm")
    tokenizer = CodeTokenizer.from_config(chk.config["tokenizer"])
    lm = TinyCausalLM(tokenizer, d_model=chk.config["d_model"],
                      n_blocks=chk.config["n_blocks"],
                      nhead=chk.config["nhead"],
                      max_len=chk.config["max_len"])
    lm.load_state_dict(chk.parameters)
    lm.eval()
    for p in lm.parameters():
        p.requires_grad_(False)
    return lm
