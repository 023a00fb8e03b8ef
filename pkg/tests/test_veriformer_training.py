import numpy as np
import pytest
import torch

from verigrag.checkpoint import module_hash
from verigrag.errors import ConfigError
from verigrag.veriformer import (VeriFormerModel, VeriFormerStage1,
                                 VeriFormerStage2, gcg_loss)
from verigrag.veriformer.ops import pad_code_batch


def test_stage1_losses_decrease(stage1_model):
    for name, trace in stage1_model.traces_.items():
        assert trace[-1] < trace[0], f"{name} did not decrease"


def test_stage1_matching_accuracy(stage1_model, stage1_pairs):
    assert stage1_model.matching_accuracy(stage1_pairs) >= 0.8


def test_stage1_forward_graph_shape(stage1_model, stage1_pairs):
    out = stage1_model.forward_graph(stage1_pairs[0][0])
    assert out.shape == (1, stage1_model.n_queries, stage1_model.d_model)
    assert np.isfinite(out).all()


def test_stage1_config_errors(stage1_pairs):
    with pytest.raises(ConfigError):
        VeriFormerStage1(batch_size=1).fit(stage1_pairs)
    with pytest.raises(ConfigError):
        VeriFormerStage1(batch_size=256).fit(stage1_pairs)


def test_stage1_save_load(tmp_path, stage1_model, stage1_pairs):
    path = tmp_path / "vf1.ckpt"
    stage1_model.save(path)
    loaded = VeriFormerStage1.load(path)
    emb = stage1_pairs[0][0]
    assert np.allclose(loaded.forward_graph(emb),
                       stage1_model.forward_graph(emb), atol=1e-6)


def test_gcg_overfit_one_sample_canary():
    """Teacher-forced copy of a single pair drives the loss under 0.1."""
    torch.manual_seed(0)
    model = VeriFormerModel(vocab_size=24, d_model=32, n_blocks=2, nhead=4,
                            n_queries=4, graph_dim=8, n_graph_tokens=4,
                            max_len=32)
    g = torch.randn(1, 8)
    ids, pad = pad_code_batch([[1, 5, 6, 7, 8, 9, 10, 2]])
    optimizer = torch.optim.Adam(model.parameters(), lr=3e-3)
    loss = None
    for _ in range(300):
        loss = gcg_loss(model, g, ids, pad)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if float(loss.detach()) < 0.05:
            break
    assert float(loss.detach()) < 0.1


def test_stage2_alpha_zero_total_equals_gen(stage2_samples, stage1_model,
                                            tiny_lm):
    model = VeriFormerStage2(stage1=stage1_model, lm=tiny_lm, alpha=0.0,
                             epochs=2, seed=0).fit(stage2_samples[:16])
    assert model.trace_["total"] == model.trace_["gen"]


def test_stage2_lm_frozen(stage2_model, tiny_lm):
    # fit() re-verifies internally; re-check from the outside
    for p in tiny_lm.parameters():
        assert not p.requires_grad


def test_stage2_dist_loss_not_increasing(stage2_model):
    trace = stage2_model.trace_["dist"]
    assert trace[-1] <= trace[0]


def test_stage2_soft_prompt_shape(stage2_model, stage2_samples, tiny_lm):
    prompt = stage2_model.soft_prompt(stage2_samples[0][1])
    assert prompt.shape == (stage2_model.model_.n_queries, tiny_lm.embed_dim)
    assert np.isfinite(prompt).all()


def test_stage2_early_stopping_keeps_best(stage2_samples, stage1_model,
                                          tiny_lm):
    model = VeriFormerStage2(stage1=stage1_model, lm=tiny_lm, alpha=0.1,
                             epochs=30, patience=1, seed=0)
    model.fit(stage2_samples[:16])
    assert len(model.trace_["val"]) <= 30


def test_stage2_core_freeze_flag(stage2_samples, stage1_model, tiny_lm):
    frozen = VeriFormerStage2(stage1=stage1_model, lm=tiny_lm, alpha=0.1,
                              epochs=2, train_core=False, seed=0)
    frozen.fit(stage2_samples[:16])
    src = stage1_model.model_.core.blocks.state_dict()
    dst = frozen.model_.core.blocks.state_dict()
    for key in src:
        assert torch.equal(src[key], dst[key])


def test_stage2_config_errors(stage2_samples, stage1_model, tiny_lm):
    with pytest.raises(ConfigError):
        VeriFormerStage2(stage1=None, lm=tiny_lm).fit(stage2_samples)
    with pytest.raises(ConfigError):
        VeriFormerStage2(stage1=stage1_model, lm=None).fit(stage2_samples)
    with pytest.raises(ConfigError):
        VeriFormerStage2(stage1=stage1_model, lm=tiny_lm, alpha=-1.0).fit(
            stage2_samples)


def test_stage2_save_load(tmp_path, stage2_model, stage2_samples):
    path = tmp_path / "vf2.ckpt"
    stage2_model.save(path)
    loaded = VeriFormerStage2.load(path)
    emb = stage2_samples[0][1]
    assert np.allclose(loaded.soft_prompt(emb),
                       stage2_model.soft_prompt(emb), atol=1e-6)


def test_stage1_deterministic(stage1_pairs):
    a = VeriFormerStage1(epochs=2, seed=3).fit(stage1_pairs[:16])
    b = VeriFormerStage1(epochs=2, seed=3).fit(stage1_pairs[:16])
    assert a.traces_ == b.traces_
