"""Training for the cross-modal retriever: contrastive teacher, distilled student.

The teacher scores (description, graph-embedding) pairs jointly and cannot
cache graph vectors; the student learns the same alignment with
independent towers by adding a mean-squared pull toward the frozen
teacher's pooled outputs on each aligned pair.
"""

from __future__ import annotations

import warnings

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .. import checkpoint as ckpt
from ..encoder.losses import info_nce
from ..errors import ConfigError, DegenerateInputWarning, EmptyQueryError
from ..text import HashedTextTokenizer
from ..validation import check_embedding_matrix, check_pairs
from .towers import CrossAttentionEncoder, DualEncoder, encode_queries

Pair = tuple[str, np.ndarray]


def _split_pairs(pairs: list[Pair]) -> tuple[list[str], np.ndarray]:
    check_pairs(pairs)
    descriptions = [p[0] for p in pairs]
    if any(not d.strip() for d in descriptions):
        raise EmptyQueryError("pair with empty description")
    embeddings = check_embedding_matrix(np.stack([np.asarray(p[1]) for p in pairs]))
    return descriptions, embeddings


def recall_at_k(score_matrix: np.ndarray, k: int) -> float:
    """Fraction of rows whose aligned column ranks in the top k."""
    order = np.argsort(-score_matrix, axis=1, kind="stable")
    hits = sum(int(i in order[i, :k]) for i in range(score_matrix.shape[0]))
    return hits / score_matrix.shape[0]


class _RetrieverBase(BaseEstimator):
    def _require_fitted(self, attr: str) -> None:
        if not hasattr(self, attr):
            raise NotFittedError(f"{type(self).__name__} is not fitted")

    def _check_common(self) -> None:
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")


class CrossAttentionTeacher(_RetrieverBase):
    """Jointly-attending retrieval scorer trained with in-batch contrast."""

    def __init__(self, graph_dim=128, d_model=128, out_dim=128, nhead=4,
                 num_layers=2, n_graph_tokens=8, vocab_size=2048, max_len=64,
                 temperature=0.07, epochs=120, batch_size=32,
                 learning_rate=1e-3, seed=0):
        self.graph_dim = graph_dim
        self.d_model = d_model
        self.out_dim = out_dim
        self.nhead = nhead
        self.num_layers = num_layers
        self.n_graph_tokens = n_graph_tokens
        self.vocab_size = vocab_size
        self.max_len = max_len
        self.temperature = temperature
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def _build(self) -> None:
        torch.manual_seed(self.seed)
        self.tokenizer_ = HashedTextTokenizer(self.vocab_size, seed=self.seed)
        self.net_ = CrossAttentionEncoder(
            vocab_size=self.vocab_size, graph_dim=self.graph_dim,
            d_model=self.d_model, out_dim=self.out_dim, nhead=self.nhead,
            num_layers=self.num_layers, n_graph_tokens=self.n_graph_tokens,
            max_len=self.max_len)

    def fit(self, pairs: list[Pair], y=None):
        self._check_common()
        descriptions, embeddings = _split_pairs(pairs)
        if len(pairs) < self.batch_size:
            raise ConfigError(f"{len(pairs)} pairs cannot fill a batch of "
                              f"{self.batch_size}")
        if embeddings.shape[1] != self.graph_dim:
            raise ConfigError(f"graph embeddings have dim {embeddings.shape[1]}, "
                              f"teacher expects {self.graph_dim}")
        self._build()
        g_all = torch.from_numpy(embeddings)
        optimizer = torch.optim.AdamW(self.net_.parameters(),
                                      lr=self.learning_rate)
        rng = np.random.default_rng(self.seed)
        steps = len(pairs) // self.batch_size
        self.loss_trace_ = []
        for _ in range(self.epochs):
            order = rng.permutation(len(pairs))
            epoch_losses = []
            for s in range(steps):
                idx = order[s * self.batch_size:(s + 1) * self.batch_size]
                batch_desc = [descriptions[i] for i in idx]
                if (len(set(batch_desc)) == 1
                        and len(np.unique(embeddings[idx], axis=0)) == 1):
                    warnings.warn("batch of identical pairs: every negative "
                                  "equals the positive", DegenerateInputWarning)
                ids, mask = encode_queries(self.tokenizer_, batch_desc,
                                           self.max_len)
                q_vec, g_vec = self.net_(ids, mask, g_all[idx])
                loss = info_nce(q_vec, g_vec, self.temperature)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                epoch_losses.append(float(loss.detach()))
            self.loss_trace_.append(float(np.mean(epoch_losses)))
        self.net_.eval()
        return self

    # -- scoring --
    def encode(self, query: str, g_emb) -> tuple[np.ndarray, np.ndarray]:
        """Joint forward of one (query, graph-embedding) pair."""
        self._require_fitted("net_")
        if not query.strip():
            raise EmptyQueryError("empty query")
        g = torch.from_numpy(check_embedding_matrix(
            np.asarray(g_emb, dtype=np.float32)[None, :], self.graph_dim))
        ids, mask = encode_queries(self.tokenizer_, [query], self.max_len)
        with torch.no_grad():
            q_vec, g_vec = self.net_(ids, mask, g)
        return q_vec[0].numpy(), g_vec[0].numpy()

    def score_matrix(self, queries: list[str], embeddings) -> np.ndarray:
        """Exhaustive pairwise cosine scores; O(Q x G) joint forwards."""
        self._require_fitted("net_")
        embeddings = check_embedding_matrix(embeddings, self.graph_dim)
        g_all = torch.from_numpy(embeddings)
        scores = np.zeros((len(queries), len(embeddings)), dtype=np.float32)
        with torch.no_grad():
            for qi, query in enumerate(queries):
                ids, mask = encode_queries(self.tokenizer_, [query],
                                           self.max_len)
                ids = ids.expand(len(embeddings), -1)
                mask = mask.expand(len(embeddings), -1)
                q_vec, g_vec = self.net_(ids, mask, g_all)
                q = torch.nn.functional.normalize(q_vec, dim=1)
                g = torch.nn.functional.normalize(g_vec, dim=1)
                scores[qi] = (q * g).sum(dim=1).numpy()
        return scores

    def save(self, path) -> None:
        self._require_fitted("net_")
        ckpt.save_checkpoint(path, kind="teacher", config=self.get_params(deep=False),
                             parameters=dict(self.net_.state_dict()),
                             loss_trace=self.loss_trace_)

    @classmethod
    def load(cls, path) -> "CrossAttentionTeacher":
        chk = ckpt.load_checkpoint(path, expected_kind="teacher")
        est = cls(**chk.config)
        est._build()
        est.net_.load_state_dict(chk.parameters)
        est.net_.eval()
        est.loss_trace_ = chk.loss_trace
        return est


def teacher_encode(teacher: CrossAttentionTeacher, query: str, g_emb):
    """Functional form of the teacher's joint encoding."""
    return teacher.encode(query, g_emb)


class DistilledDualEncoder(_RetrieverBase):
    """Cacheable dual encoder distilled from a frozen cross-attention teacher.

    Per batch the loss is the in-batch contrastive term plus
    ``mse_weight`` times the squared distance between student and teacher
    pooled vectors on both sides; ``mse_weight`` 0 reduces exactly to
    plain contrastive training.
    """

    def __init__(self, teacher: CrossAttentionTeacher | None = None,
                 mse_weight=1.0, graph_dim=128, d_model=128, out_dim=128,
                 nhead=4, num_layers=2, vocab_size=2048, max_len=64,
                 temperature=0.07, epochs=100, batch_size=8,
                 learning_rate=5e-4, seed=0):
        self.teacher = teacher
        self.mse_weight = mse_weight
        self.graph_dim = graph_dim
        self.d_model = d_model
        self.out_dim = out_dim
        self.nhead = nhead
        self.num_layers = num_layers
        self.vocab_size = vocab_size
        self.max_len = max_len
        self.temperature = temperature
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def _build(self) -> None:
        torch.manual_seed(self.seed + 1)
        self.tokenizer_ = HashedTextTokenizer(self.vocab_size, seed=self.seed)
        self.net_ = DualEncoder(vocab_size=self.vocab_size,
                                graph_dim=self.graph_dim,
                                d_model=self.d_model, out_dim=self.out_dim,
                                nhead=self.nhead, num_layers=self.num_layers,
                                max_len=self.max_len)

    def fit(self, pairs: list[Pair], y=None):
        self._check_common()
        if self.mse_weight < 0:
            raise ConfigError("mse_weight must be non-negative")
        if self.mse_weight > 0 and self.teacher is None:
            raise ConfigError("distillation requires a fitted teacher")
        descriptions, embeddings = _split_pairs(pairs)
        if len(pairs) < self.batch_size:
            raise ConfigError(f"{len(pairs)} pairs cannot fill a batch of "
                              f"{self.batch_size}")
        self._build()

        # teacher targets are fixed: frozen teacher, fixed aligned inputs
        if self.teacher is not None:
            t_q = np.zeros((len(pairs), self.teacher.out_dim), dtype=np.float32)
            t_g = np.zeros_like(t_q)
            for i, (desc, emb) in enumerate(zip(descriptions, embeddings)):
                t_q[i], t_g[i] = self.teacher.encode(desc, emb)
            teacher_q = torch.from_numpy(t_q)
            teacher_g = torch.from_numpy(t_g)
        else:
            teacher_q = teacher_g = None

        g_all = torch.from_numpy(embeddings)
        optimizer = torch.optim.AdamW(self.net_.parameters(),
                                      lr=self.learning_rate)
        rng = np.random.default_rng(self.seed)
        steps = len(pairs) // self.batch_size
        self.loss_trace_ = []
        self.mse_trace_ = []
        for epoch in range(self.epochs + 1):
            if teacher_q is not None:
                self.mse_trace_.append(self._mse_to_teacher(
                    descriptions, g_all, teacher_q, teacher_g))
            if epoch == self.epochs:
                break
            order = rng.permutation(len(pairs))
            epoch_losses = []
            for s in range(steps):
                idx = order[s * self.batch_size:(s + 1) * self.batch_size]
                ids, mask = encode_queries(
                    self.tokenizer_, [descriptions[i] for i in idx],
                    self.max_len)
                s_q = self.net_.encode_text(ids, mask)
                s_g = self.net_.encode_graph(g_all[idx])
                nce = info_nce(s_q, s_g, self.temperature)
                if self.mse_weight == 0:
                    loss = nce
                else:
                    mse = (torch.nn.functional.mse_loss(s_q, teacher_q[idx])
                           + torch.nn.functional.mse_loss(s_g, teacher_g[idx]))
                    loss = nce + self.mse_weight * mse
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                epoch_losses.append(float(loss.detach()))
            self.loss_trace_.append(float(np.mean(epoch_losses)))
        self.net_.eval()
        return self

    def _mse_to_teacher(self, descriptions, g_all, teacher_q, teacher_g) -> float:
        with torch.no_grad():
            ids, mask = encode_queries(self.tokenizer_, descriptions,
                                       self.max_len)
            s_q = self.net_.encode_text(ids, mask)
            s_g = self.net_.encode_graph(g_all)
            return float(torch.nn.functional.mse_loss(s_q, teacher_q)
                         + torch.nn.functional.mse_loss(s_g, teacher_g))

    # -- inference --
    def encode_text(self, queries: list[str]) -> np.ndarray:
        self._require_fitted("net_")
        ids, mask = encode_queries(self.tokenizer_, queries, self.max_len)
        with torch.no_grad():
            return self.net_.encode_text(ids, mask).numpy()

    def encode_graph(self, embeddings) -> np.ndarray:
        self._require_fitted("net_")
        embeddings = check_embedding_matrix(embeddings, self.graph_dim)
        with torch.no_grad():
            return self.net_.encode_graph(torch.from_numpy(embeddings)).numpy()

    def score_matrix(self, queries: list[str], embeddings) -> np.ndarray:
        q = self.encode_text(queries)
        g = self.encode_graph(embeddings)
        q = q / np.linalg.norm(q, axis=1, keepdims=True)
        g = g / np.linalg.norm(g, axis=1, keepdims=True)
        return q @ g.T

    def save(self, path) -> None:
        self._require_fitted("net_")
        config = self.get_params(deep=False)
        config.pop("teacher")  # the teacher ships in its own checkpoint
        ckpt.save_checkpoint(path, kind="student", config=config,
                             parameters=dict(self.net_.state_dict()),
                             loss_trace={"loss": self.loss_trace_,
                                         "mse_to_teacher": self.mse_trace_})

    @classmethod
    def load(cls, path) -> "DistilledDualEncoder":
        chk = ckpt.load_checkpoint(path, expected_kind="student")
        est = cls(teacher=None, **chk.config)
        est._build()
        est.net_.load_state_dict(chk.parameters)
        est.net_.eval()
        trace = chk.loss_trace or {}
        est.loss_trace_ = trace.get("loss", [])
        est.mse_trace_ = trace.get("mse_to_teacher", [])
        return est


def train_teacher(pairs: list[Pair], **config) -> CrossAttentionTeacher:
    return CrossAttentionTeacher(**config).fit(pairs)


def distill_student(pairs: list[Pair], teacher: CrossAttentionTeacher,
                    **config) -> DistilledDualEncoder:
    return DistilledDualEncoder(teacher=teacher, **config).fit(pairs)
