"""Stage-2 soft-prompt training against a frozen language model.

Only the graph-side pieces survive from stage 1 (query bank, graph
expansion, shared blocks); the code transformer is dropped. Each sample's
query outputs are projected to the LM embedding width and prepended to the
embedded description; the loss is the LM's next-token cross-entropy on the
target code plus ``alpha`` times the distribution loss between description
embeddings and prompt rows. The LM's parameters never receive gradients.
"""

from __future__ import annotations

import copy

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .. import checkpoint as ckpt
from ..errors import ConfigError
from ..validation import check_embedding, check_pairs
from .core import VeriFormerModel
from .lm import TinyCausalLM, pack_sequences
from .losses import kl_distribution_loss
from .ops import project_soft_prompt
from .stage1 import VeriFormerStage1

Stage2Sample = tuple[str, np.ndarray, str]  # (description, embedding, code)


class VeriFormerStage2(BaseEstimator):
    """Trains bank + graph transformer + projection; the LM stays frozen."""

    def __init__(self, stage1: VeriFormerStage1 | None = None,
                 lm: TinyCausalLM | None = None, alpha=0.1, epochs=8,
                 batch_size=8, learning_rate=1e-3, val_fraction=0.25,
                 patience=3, train_core=True, kl_mode="row_mean", seed=0):
        self.stage1 = stage1
        self.lm = lm
        self.alpha = alpha
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.val_fraction = val_fraction
        self.patience = patience
        self.train_core = train_core
        self.kl_mode = kl_mode
        self.seed = seed

    def _check_config(self) -> None:
        if self.stage1 is None or not hasattr(self.stage1, "model_"):
            raise ConfigError("stage 2 needs a fitted stage-1 model")
        if self.lm is None:
            raise ConfigError("stage 2 needs the frozen language model")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in [0, 1)")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")

    def _build(self) -> None:
        torch.manual_seed(self.seed + 2)
        src = self.stage1.model_
        self.model_ = copy.deepcopy(src)
        self.model_.train()
        self.projection_ = torch.nn.Linear(src.d_model, self.lm.embed_dim)
        self.d_llm_ = self.lm.embed_dim

    def _trainable_parameters(self):
        params = [self.model_.query_bank]
        params.extend(self.model_.graph_expand.parameters())
        params.extend(self.projection_.parameters())
        if self.train_core:
            params.extend(self.model_.core.blocks.parameters())
            params.extend(self.model_.core.final_norm.parameters())
        return params

    def _sample_losses(self, description: str, embedding: torch.Tensor,
                       code: str) -> tuple[torch.Tensor, torch.Tensor]:
        """(generation loss, distribution loss) for one sample."""
        lm = self.lm
        prompt = project_soft_prompt(
            self.projection_, self.model_.forward_graph(embedding[None])[0])
        desc_ids, code_ids = pack_sequences(
            lm.tokenizer, description, code,
            lm.max_len - prompt.shape[0])
        desc_t = torch.tensor(desc_ids, dtype=torch.long)
        code_t = torch.tensor(code_ids, dtype=torch.long)
        desc_emb = lm.embed_tokens(desc_t)
        code_emb = lm.embed_tokens(code_t)
        seq = torch.cat([prompt, desc_emb, code_emb], dim=0)
        logits = lm.forward_embeds(seq[None])[0]
        # logits at position s predict the token at s+1; code tokens start
        # right after the prompt and description rows
        code_start = prompt.shape[0] + desc_emb.shape[0]
        gen = torch.nn.functional.cross_entropy(
            logits[code_start:code_start + len(code_ids) - 1], code_t[1:])
        dist = kl_distribution_loss(desc_emb, prompt, mode=self.kl_mode)
        return gen, dist

    def fit(self, samples: list[Stage2Sample], y=None):
        check_pairs(samples, "stage-2 samples")
        self._check_config()
        self._build()
        lm_params_before = ckpt.module_hash(self.lm)

        rng = np.random.default_rng(self.seed)
        order = rng.permutation(len(samples))
        n_val = int(len(samples) * self.val_fraction)
        val_idx = list(order[:n_val])
        train_idx = list(order[n_val:])
        if not train_idx:
            raise ConfigError("no training samples after validation split")

        tensors = [(d, torch.from_numpy(check_embedding(e)), c)
                   for d, e, c in samples]
        optimizer = torch.optim.AdamW(self._trainable_parameters(),
                                      lr=self.learning_rate)
        self.trace_ = {"total": [], "gen": [], "dist": [], "val": []}
        best_val = float("inf")
        best_state = None
        bad_epochs = 0
        for _ in range(self.epochs):
            rng.shuffle(train_idx)
            sums = {"total": 0.0, "gen": 0.0, "dist": 0.0}
            for start in range(0, len(train_idx), self.batch_size):
                chunk = train_idx[start:start + self.batch_size]
                gens, dists = [], []
                for i in chunk:
                    gen, dist = self._sample_losses(*tensors[i])
                    gens.append(gen)
                    dists.append(dist)
                gen = torch.stack(gens).mean()
                dist = torch.stack(dists).mean()
                loss = gen if self.alpha == 0 else gen + self.alpha * dist
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                sums["total"] += float(loss.detach()) * len(chunk)
                sums["gen"] += float(gen.detach()) * len(chunk)
                sums["dist"] += float(dist.detach()) * len(chunk)
            for key in sums:
                self.trace_[key].append(sums[key] / len(train_idx))

            val_loss = self._eval_split(tensors, val_idx or train_idx)
            self.trace_["val"].append(val_loss)
            if val_loss < best_val - 1e-9:
                best_val = val_loss
                best_state = (copy.deepcopy(self.model_.state_dict()),
                              copy.deepcopy(self.projection_.state_dict()))
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs > self.patience:
                    break
        if best_state is not None:
            self.model_.load_state_dict(best_state[0])
            self.projection_.load_state_dict(best_state[1])
        self.model_.eval()

        if ckpt.module_hash(self.lm) != lm_params_before:
            raise ConfigError("frozen LM parameters changed during stage 2")
        return self

    @torch.no_grad()
    def _eval_split(self, tensors, idx) -> float:
        totals = []
        for i in idx:
            gen, dist = self._sample_losses(*tensors[i])
            loss = gen if self.alpha == 0 else gen + self.alpha * dist
            totals.append(float(loss))
        return float(np.mean(totals))

    # -- inference --
    def _require_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError("stage-2 model is not fitted")

    def soft_prompt(self, embedding) -> np.ndarray:
        """Soft prompt rows [Q, d_llm] for one raw graph embedding."""
        self._require_fitted()
        emb = torch.from_numpy(check_embedding(embedding))
        with torch.no_grad():
            queries = self.model_.forward_graph(emb[None])[0]
            return project_soft_prompt(self.projection_, queries).numpy()

    def save(self, path) -> None:
        self._require_fitted()
        config = {k: v for k, v in self.get_params(deep=False).items()
                  if k not in ("stage1", "lm")}
        config["stage1_config"] = {
            k: v for k, v in self.stage1.get_params().items()}
        config["stage1_config"]["tokenizer"] = self.stage1.tokenizer_.to_config()
        config["d_llm"] = self.d_llm_
        params = {f"model.{k}": v for k, v in self.model_.state_dict().items()}
        params.update({f"projection.{k}": v
                       for k, v in self.projection_.state_dict().items()})
        ckpt.save_checkpoint(path, kind="veriformer_stage2", config=config,
                             parameters=params, loss_trace=self.trace_)

    @classmethod
    def load(cls, path) -> "VeriFormerStage2":
        from ..text import CodeTokenizer
        chk = ckpt.load_checkpoint(path, expected_kind="veriformer_stage2")
        config = dict(chk.config)
        s1_config = config.pop("stage1_config")
        tokenizer = CodeTokenizer.from_config(s1_config.pop("tokenizer"))
        d_llm = config.pop("d_llm")
        est = cls(**config)
        est.model_ = VeriFormerModel(
            vocab_size=tokenizer.vocab_size, d_model=s1_config["d_model"],
            n_blocks=s1_config["n_blocks"], nhead=s1_config["nhead"],
            n_queries=s1_config["n_queries"],
            graph_dim=s1_config["graph_dim"],
            n_graph_tokens=s1_config["n_graph_tokens"],
            max_len=s1_config["max_code_len"] + s1_config["n_queries"])
        est.projection_ = torch.nn.Linear(s1_config["d_model"], d_llm)
        est.d_llm_ = d_llm
        model_state = {k[len("model."):]: v for k, v in chk.parameters.items()
                       if k.startswith("model.")}
        proj_state = {k[len("projection."):]: v
                      for k, v in chk.parameters.items()
                      if k.startswith("projection.")}
        est.model_.load_state_dict(model_state)
        est.projection_.load_state_dict(proj_state)
        est.model_.eval()
        est.trace_ = chk.loss_trace
        return est


def stage2_train(samples: list[Stage2Sample], stage1: VeriFormerStage1,
                 lm: TinyCausalLM, **config) -> VeriFormerStage2:
    return VeriFormerStage2(stage1=stage1, lm=lm, **config).fit(samples)
