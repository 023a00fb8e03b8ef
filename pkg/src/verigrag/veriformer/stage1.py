"""Stage-1 alignment training: contrastive + matching + generation objectives.

Inputs are (graph embedding, Verilog code) pairs; the graph encoder that
produced the embeddings stays frozen by construction since only its
outputs enter here. All three objectives share the model and are summed
with unit weights. Matching batches contain the aligned pair, the hardest
in-batch negative by contrastive score, and one uniform random negative.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .. import checkpoint as ckpt
from ..errors import ConfigError, EmptyCodeError
from ..text import CodeTokenizer
from ..validation import check_embedding_matrix, check_pairs
from .core import VeriFormerModel
from .losses import alignment_scores, gcc_loss, gcg_loss, gcm_loss
from .ops import pad_code_batch

Stage1Pair = tuple[np.ndarray, str]


class VeriFormerStage1(BaseEstimator):
    """Fits the query-token transformer on (graph embedding, code) pairs."""

    def __init__(self, n_queries=8, d_model=64, n_blocks=2, nhead=4,
                 graph_dim=128, n_graph_tokens=8, max_code_len=96,
                 max_vocab=2048, temperature=0.07, epochs=40, batch_size=8,
                 learning_rate=1e-3, seed=0):
        self.n_queries = n_queries
        self.d_model = d_model
        self.n_blocks = n_blocks
        self.nhead = nhead
        self.graph_dim = graph_dim
        self.n_graph_tokens = n_graph_tokens
        self.max_code_len = max_code_len
        self.max_vocab = max_vocab
        self.temperature = temperature
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def _check_config(self) -> None:
        if self.epochs < 1 or self.batch_size < 2:
            raise ConfigError("need epochs >= 1 and batch_size >= 2")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")

    def _build(self, tokenizer: CodeTokenizer) -> None:
        torch.manual_seed(self.seed)
        self.tokenizer_ = tokenizer
        self.model_ = VeriFormerModel(
            vocab_size=tokenizer.vocab_size, d_model=self.d_model,
            n_blocks=self.n_blocks, nhead=self.nhead,
            n_queries=self.n_queries, graph_dim=self.graph_dim,
            n_graph_tokens=self.n_graph_tokens,
            max_len=self.max_code_len + self.n_queries)

    def _encode_codes(self, codes: list[str]) -> list[list[int]]:
        encoded = []
        for code in codes:
            ids = self.tokenizer_.encode(code, add_bos=True, add_eos=True)
            if len(ids) <= 2:
                raise EmptyCodeError("pair with empty code")
            encoded.append(ids[:self.max_code_len])
        return encoded

    def fit(self, pairs: list[Stage1Pair], y=None):
        check_pairs(pairs)
        self._check_config()
        if len(pairs) < self.batch_size:
            raise ConfigError(f"{len(pairs)} pairs cannot fill a batch of "
                              f"{self.batch_size}")
        embeddings = check_embedding_matrix(
            np.stack([np.asarray(p[0]) for p in pairs]), self.graph_dim)
        codes = [p[1] for p in pairs]
        self._build(CodeTokenizer.build(codes, max_vocab=self.max_vocab))
        encoded = self._encode_codes(codes)
        g_all = torch.from_numpy(embeddings)

        optimizer = torch.optim.AdamW(self.model_.parameters(),
                                      lr=self.learning_rate)
        rng = np.random.default_rng(self.seed)
        steps = len(pairs) // self.batch_size
        self.traces_ = {"gcc": [], "gcm": [], "gcg": []}
        for _ in range(self.epochs):
            order = rng.permutation(len(pairs))
            sums = {"gcc": 0.0, "gcm": 0.0, "gcg": 0.0}
            for s in range(steps):
                idx = order[s * self.batch_size:(s + 1) * self.batch_size]
                g = g_all[idx]
                ids, pad = pad_code_batch([encoded[i] for i in idx])

                query_out = self.model_.forward_graph(g)
                code_vec = self.model_.forward_code(ids, pad)
                contrastive = gcc_loss(query_out, code_vec, self.temperature)

                m_g, m_ids, m_pad, m_labels = self._matching_batch(
                    g, ids, pad, query_out, code_vec, rng)
                matching = gcm_loss(self.model_, m_g, m_ids, m_pad, m_labels)

                generation = gcg_loss(self.model_, g, ids, pad)

                loss = contrastive + matching + generation
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                sums["gcc"] += float(contrastive.detach())
                sums["gcm"] += float(matching.detach())
                sums["gcg"] += float(generation.detach())
            for key in sums:
                self.traces_[key].append(sums[key] / steps)
        self.model_.eval()
        return self

    def _matching_batch(self, g, ids, pad, query_out, code_vec, rng):
        """Positive, hardest in-batch negative, and one random negative each."""
        batch = g.shape[0]
        with torch.no_grad():
            scores = alignment_scores(query_out, code_vec)
            scores.fill_diagonal_(-torch.inf)
            hard = scores.argmax(dim=1)
        rand = torch.tensor(
            [(i + 1 + int(rng.integers(batch - 1))) % batch
             for i in range(batch)], dtype=torch.long)
        g_cat = torch.cat([g, g, g])
        ids_cat = torch.cat([ids, ids[hard], ids[rand]])
        pad_cat = torch.cat([pad, pad[hard], pad[rand]])
        labels = torch.cat([torch.ones(batch), torch.zeros(2 * batch)])
        return g_cat, ids_cat, pad_cat, labels

    # -- inference --
    def _require_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError("stage-1 model is not fitted")

    def forward_graph(self, embeddings) -> np.ndarray:
        """Query outputs [B, Q, d] for raw graph embeddings."""
        self._require_fitted()
        embeddings = check_embedding_matrix(np.atleast_2d(embeddings),
                                            self.graph_dim)
        with torch.no_grad():
            return self.model_.forward_graph(
                torch.from_numpy(embeddings)).numpy()

    def matching_accuracy(self, pairs: list[Stage1Pair], seed: int = 0) -> float:
        """Balanced positive/derangement-negative accuracy of the match head."""
        self._require_fitted()
        embeddings = check_embedding_matrix(
            np.stack([np.asarray(p[0]) for p in pairs]), self.graph_dim)
        encoded = self._encode_codes([p[1] for p in pairs])
        n = len(pairs)
        rng = np.random.default_rng(seed)
        shift = 1 + int(rng.integers(max(1, n - 1)))
        neg = [(i + shift) % n for i in range(n)]
        g = torch.from_numpy(np.concatenate([embeddings, embeddings]))
        ids, pad = pad_code_batch(encoded + [encoded[j] for j in neg])
        labels = np.concatenate([np.ones(n), np.zeros(n)])
        with torch.no_grad():
            logits = self.model_.matching_logits(g, ids, pad)
            scores = logits.mean(dim=1).numpy()
        return float(np.mean((scores > 0).astype(float) == labels))

    def save(self, path) -> None:
        self._require_fitted()
        config = self.get_params(deep=False)
        config["tokenizer"] = self.tokenizer_.to_config()
        ckpt.save_checkpoint(path, kind="veriformer_stage1", config=config,
                             parameters=dict(self.model_.state_dict()),
                             loss_trace=self.traces_)

    @classmethod
    def load(cls, path) -> "VeriFormerStage1":
        chk = ckpt.load_checkpoint(path, expected_kind="veriformer_stage1")
        config = dict(chk.config)
        tokenizer = CodeTokenizer.from_config(config.pop("tokenizer"))
        est = cls(**config)
        est._build(tokenizer)
        est.model_.load_state_dict(chk.parameters)
        est.model_.eval()
        est.traces_ = chk.loss_trace
        return est


def stage1_train(pairs: list[Stage1Pair], **config) -> VeriFormerStage1:
    return VeriFormerStage1(**config).fit(pairs)
