"""Query-token alignment between graph embeddings and the frozen LM."""

from .core import (VeriFormerBlock, VeriFormerCore, VeriFormerModel,
                   generation_mask)
from .lm import TinyCausalLM, load_lm, pack_sequences, save_lm, train_lm
from .losses import (alignment_scores, gcc_loss, gcg_loss, gcm_loss,
                     kl_distribution_loss, mean_logit_score)
from .ops import (forward_code, forward_graph, pad_code_batch,
                  project_soft_prompt)
from .stage1 import VeriFormerStage1, stage1_train
from .stage2 import VeriFormerStage2, stage2_train

__all__ = [
    "VeriFormerBlock", "VeriFormerCore", "VeriFormerModel", "generation_mask",
    "TinyCausalLM", "train_lm", "save_lm", "load_lm", "pack_sequences",
    "alignment_scores", "gcc_loss", "gcg_loss", "gcm_loss",
    "kl_distribution_loss", "mean_logit_score", "forward_code",
    "forward_graph", "pad_code_batch", "project_soft_prompt",
    "VeriFormerStage1", "stage1_train", "VeriFormerStage2", "stage2_train",
]
