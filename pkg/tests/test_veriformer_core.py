import numpy as np
import pytest
import torch

from verigrag.errors import EmptyCodeError, ShapeError
from verigrag.veriformer import VeriFormerModel, generation_mask
from verigrag.veriformer.ops import pad_code_batch


@pytest.fixture()
def model():
    torch.manual_seed(0)
    return VeriFormerModel(vocab_size=40, d_model=32, n_blocks=2, nhead=4,
                           n_queries=4, graph_dim=16, n_graph_tokens=4,
                           max_len=64)


def test_forward_graph_deterministic(model):
    g = torch.randn(2, 16)
    out1 = model.forward_graph(g)
    out2 = model.forward_graph(g)
    assert torch.equal(out1, out2)
    assert out1.shape == (2, 4, 32)


def test_forward_graph_sensitivity(model):
    g1 = torch.randn(1, 16)
    g2 = torch.randn(1, 16)
    out1 = model.forward_graph(g1)
    out2 = model.forward_graph(g2)
    assert float((out1 - out2).norm()) > 1e-6


def test_zero_graph_embedding_degenerates_cross_attention(model):
    """With zero embedding and zero expansion bias every graph token is
    equal, so cross-attention output is constant across query positions."""
    with torch.no_grad():
        model.graph_expand.bias.zero_()
    tokens = model.graph_tokens(torch.zeros(1, 16))
    assert torch.all(tokens == 0)
    block = model.core.blocks[0]
    queries = torch.randn(1, 4, 32)
    out, _ = block.cross_attn(queries, tokens, tokens, need_weights=False)
    spread = (out - out.mean(dim=1, keepdim=True)).abs().max()
    assert float(spread) <= 1e-6


def test_forward_code_single_token(model):
    ids, pad = pad_code_batch([[7]])
    pooled = model.forward_code(ids, pad)
    states = model.core.run(model.core.embed_code(ids), 0,
                            key_padding_mask=pad)
    assert torch.allclose(pooled[0], states[0, 0], atol=1e-6)


def test_forward_code_pad_invariance(model):
    # same content, one batch padded further by a longer sibling
    ids_a, pad_a = pad_code_batch([[5, 6, 7]])
    ids_b, pad_b = pad_code_batch([[5, 6, 7], [5, 6, 7, 8, 9, 10]])
    out_a = model.forward_code(ids_a, pad_a)
    out_b = model.forward_code(ids_b, pad_b)
    assert torch.allclose(out_a[0], out_b[0], atol=1e-5)


def test_forward_code_distinct_inputs(model):
    ids, pad = pad_code_batch([[5, 6, 7], [7, 6, 5]])
    out = model.forward_code(ids, pad)
    assert float((out[0] - out[1]).norm()) > 1e-6


def test_forward_code_empty_rejected(model):
    ids = torch.zeros((1, 3), dtype=torch.long)
    pad = torch.ones((1, 3), dtype=torch.bool)
    with pytest.raises(EmptyCodeError):
        model.forward_code(ids, pad)


def test_generation_mask_structure():
    mask = generation_mask(3, 4)
    # query rows: queries visible, code blocked
    assert not mask[:3, :3].any()
    assert mask[:3, 3:].all()
    # code row t: all queries visible, code causal (self included)
    for t in range(4):
        row = mask[3 + t]
        assert not row[:3].any()
        assert not row[3:3 + t + 1].any()
        assert row[3 + t + 1:].all()


def test_self_attention_shared_between_passes(model):
    """One parameter set serves the graph pass and the code pass."""
    g = torch.randn(2, 16)
    ids, pad = pad_code_batch([[4, 5, 6], [7, 8, 9]])

    out_before = model.forward_graph(g).detach().clone()
    loss = model.forward_code(ids, pad).sum()
    model.zero_grad()
    loss.backward()
    attn_grad = model.core.blocks[0].self_attn.in_proj_weight.grad
    assert attn_grad is not None and float(attn_grad.abs().sum()) > 0

    with torch.no_grad():  # a code-pass update moves the graph pass too
        for p in model.core.blocks[0].self_attn.parameters():
            if p.grad is not None:
                p -= 0.5 * p.grad
    out_after = model.forward_graph(g)
    assert float((out_before - out_after).norm()) > 1e-6


def test_joint_pass_shapes(model):
    g = torch.randn(2, 16)
    ids, pad = pad_code_batch([[4, 5, 6], [7, 8]])
    q_out, c_out = model.forward_joint(g, ids, pad, causal=True)
    assert q_out.shape == (2, 4, 32)
    assert c_out.shape == (2, 3, 32)


def test_graph_tokens_shape_error(model):
    with pytest.raises(ShapeError):
        model.graph_tokens(torch.randn(16))
