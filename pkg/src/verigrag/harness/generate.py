"""Sampling code from the frozen LM under a retrieved soft prompt.

Per task: rank the index against the task description, look up the top
graph's raw embedding, build the soft prompt, prepend it to the embedded
description, and draw n samples cycling through the temperature list. An
empty index degrades to promptless generation with a warning.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import PipelineConfigError, RetrievalEmptyWarning
from ..retrieval.index import RetrievalIndex, retrieve
from ..retrieval.train import DistilledDualEncoder
from ..veriformer.lm import TinyCausalLM
from ..veriformer.stage2 import VeriFormerStage2
from .tasks import BenchmarkTask


@dataclass
class SampleRecord:
    task_id: str
    sample_index: int
    temperature: float
    code: str
    syntax_pass: bool = False
    function_pass: bool = False
    no_prompt: bool = False
    timed_out: bool = False
    retrieved_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "sample_index": self.sample_index,
            "temperature": self.temperature,
            "code": self.code,
            "syntax_pass": self.syntax_pass,
            "function_pass": self.function_pass,
            "no_prompt": self.no_prompt,
            "timed_out": self.timed_out,
            "retrieved_id": self.retrieved_id,
        }


@dataclass
class GenerationPipeline:
    """Everything generation needs, with dimensions checked once."""

    student: DistilledDualEncoder
    index: RetrievalIndex
    embeddings: dict[str, np.ndarray]  # graph id -> raw graph embedding
    stage2: VeriFormerStage2
    lm: TinyCausalLM
    max_new_tokens: int = 120
    _checked: bool = field(default=False, repr=False)

    def validate(self) -> None:
        if self._checked:
            return
        graph_dim = self.stage2.model_.graph_expand.in_features
        if self.embeddings:
            dim = next(iter(self.embeddings.values())).shape[0]
            if dim != graph_dim:
                raise PipelineConfigError(
                    f"graph embeddings have dim {dim}, alignment model "
                    f"expects {graph_dim}")
            if self.student.graph_dim != dim:
                raise PipelineConfigError(
                    f"student graph tower expects dim {self.student.graph_dim}, "
                    f"embeddings have {dim}")
        if len(self.index) and self.index.dim != self.student.out_dim:
            raise PipelineConfigError(
                f"index rows have dim {self.index.dim}, student produces "
                f"{self.student.out_dim}")
        if self.stage2.d_llm_ != self.lm.embed_dim:
            raise PipelineConfigError(
                f"soft prompts have dim {self.stage2.d_llm_}, LM embeds "
                f"{self.lm.embed_dim}")
        self._checked = True


def _sample_seed(seed: int, task_id: str, sample_index: int) -> int:
    digest = hashlib.blake2b(f"{seed}:{task_id}:{sample_index}".encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little") % (2**63 - 1)


def generate_samples(task: BenchmarkTask, pipeline: GenerationPipeline,
                     n: int, temperatures: list[float],
                     seed: int = 0) -> list[SampleRecord]:
    if n < 1:
        raise PipelineConfigError("n must be at least 1")
    if not temperatures:
        raise PipelineConfigError("temperature list is empty")
    pipeline.validate()

    prompt = None
    retrieved_id = None
    if len(pipeline.index):
        hits = retrieve(pipeline.index, task.description, pipeline.student, 1)
        retrieved_id = hits[0][0]
        emb = pipeline.embeddings.get(retrieved_id)
        if emb is None:
            raise PipelineConfigError(
                f"retrieved id {retrieved_id!r} has no stored embedding")
        prompt = torch.from_numpy(pipeline.stage2.soft_prompt(emb))
    else:
        warnings.warn("retrieval index is empty; generating without a "
                      "soft prompt", RetrievalEmptyWarning)

    lm = pipeline.lm
    desc_ids = lm.tokenizer.encode(task.description)
    desc_emb = lm.embed_tokens(torch.tensor(desc_ids, dtype=torch.long))
    bos_emb = lm.embed_tokens(torch.tensor([lm.tokenizer.BOS]))
    parts = [desc_emb, bos_emb] if prompt is None else [prompt, desc_emb,
                                                        bos_emb]
    prefix = torch.cat(parts, dim=0)

    records = []
    for i in range(n):
        temperature = float(temperatures[i % len(temperatures)])
        generator = torch.Generator()
        generator.manual_seed(_sample_seed(seed, task.task_id, i))
        ids = lm.sample(prefix, pipeline.max_new_tokens, temperature,
                        generator=generator)
        records.append(SampleRecord(
            task_id=task.task_id, sample_index=i, temperature=temperature,
            code=lm.tokenizer.decode(ids), no_prompt=prompt is None,
            retrieved_id=retrieved_id))
    return records
