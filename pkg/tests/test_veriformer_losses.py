import math

import numpy as np
import pytest
import torch

from verigrag.errors import (DegenerateBatchError, DomainError,
                             EmptyCodeError, ShapeError)
from verigrag.veriformer import (VeriFormerModel, alignment_scores, gcc_loss,
                                 gcg_loss, gcm_loss, kl_distribution_loss,
                                 mean_logit_score)
from verigrag.veriformer.ops import pad_code_batch


def _small_model(dtype=torch.float32, vocab=30):
    torch.manual_seed(1)
    # 2 blocks: graph context reaches code positions through the second
    # block's shared self-attention
    model = VeriFormerModel(vocab_size=vocab, d_model=16, n_blocks=2, nhead=2,
                            n_queries=3, graph_dim=8, n_graph_tokens=2,
                            max_len=32)
    return model.to(dtype)


# --- alignment scores / gcc ---

def test_alignment_score_one_when_query_equals_code():
    g = torch.zeros(1, 3, 4)
    g[0, 1] = torch.tensor([0.5, -0.5, 0.5, -0.5])
    c = torch.tensor([[0.5, -0.5, 0.5, -0.5]])
    assert float(alignment_scores(g, c)[0, 0]) == pytest.approx(1.0, abs=1e-6)


def test_alignment_score_zero_when_orthogonal():
    g = torch.zeros(2, 2, 4)
    g[:, :, 0] = 1.0
    c = torch.zeros(2, 4)
    c[:, 1] = 1.0
    scores = alignment_scores(g, c)
    assert torch.allclose(scores, torch.zeros(2, 2), atol=1e-7)


def test_alignment_max_over_queries_brute_force():
    rng = np.random.default_rng(0)
    g_np = rng.standard_normal((3, 5, 6))
    c_np = rng.standard_normal((3, 6))
    scores = alignment_scores(torch.tensor(g_np), torch.tensor(c_np)).numpy()
    for i in range(3):
        for j in range(3):
            best = max(
                float(np.dot(g_np[i, q], c_np[j])
                      / (np.linalg.norm(g_np[i, q]) * np.linalg.norm(c_np[j])))
                for q in range(5))
            assert scores[i, j] == pytest.approx(best, abs=1e-6)


def test_gcc_binary_case_value():
    g = torch.zeros(2, 2, 4)
    g[0, 0] = torch.tensor([1.0, 0, 0, 0])
    g[1, 0] = torch.tensor([0, 0, 1.0, 0])
    c = torch.zeros(2, 4)
    c[0, 0] = 1.0
    c[1, 2] = 1.0
    expected = math.log(1 + math.exp(-1))
    assert float(gcc_loss(g, c, 1.0)) == pytest.approx(expected, abs=1e-5)


def test_gcc_domain_errors():
    g = torch.randn(2, 3, 4)
    c = torch.randn(2, 4)
    with pytest.raises(DomainError):
        gcc_loss(g, c, 0.0)
    with pytest.raises(DomainError):
        gcc_loss(g[:1], c[:1], 1.0)
    with pytest.raises(ShapeError):
        gcc_loss(g, torch.randn(3, 4), 1.0)


def test_gcc_gradient_finite_differences():
    rng = np.random.default_rng(2)
    g_np = rng.standard_normal((3, 2, 5))
    c_np = rng.standard_normal((3, 5))
    tau = 0.4
    g = torch.tensor(g_np, requires_grad=True)
    loss = gcc_loss(g, torch.tensor(c_np), tau)
    loss.backward()
    analytic = g.grad.numpy()

    h = 1e-5
    flat = g_np.reshape(-1)
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = float(gcc_loss(torch.tensor(g_np), torch.tensor(c_np), tau))
        flat[i] = orig - h
        down = float(gcc_loss(torch.tensor(g_np), torch.tensor(c_np), tau))
        flat[i] = orig
        numeric[i] = (up - down) / (2 * h)
    numeric = numeric.reshape(analytic.shape)
    mask = np.abs(numeric) > 1e-6
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8)
    assert rel[mask].max() <= 1e-3


# --- matching ---

def test_mean_logit_score_is_arithmetic_mean():
    logits = torch.tensor([[2.0, -1.0, 0.5]])
    assert float(mean_logit_score(logits)) == pytest.approx(0.5, abs=1e-6)


def test_gcm_degenerate_batch():
    model = _small_model()
    g = torch.randn(2, 8)
    ids, pad = pad_code_batch([[4, 5], [6, 7]])
    with pytest.raises(DegenerateBatchError):
        gcm_loss(model, g, ids, pad, torch.ones(2))


def test_gcm_chance_level_on_random_model():
    torch.manual_seed(3)
    model = _small_model()
    rng = np.random.default_rng(3)
    n = 200
    g = torch.randn(n, 8)
    ids, pad = pad_code_batch([[int(rng.integers(4, 30)) for _ in range(5)]
                               for _ in range(n)])
    labels = torch.tensor(rng.integers(0, 2, size=n).astype(np.float32))
    with torch.no_grad():
        scores = mean_logit_score(model.matching_logits(g, ids, pad))
    accuracy = float(((scores > 0).float() == labels).float().mean())
    assert abs(accuracy - 0.5) <= 0.15


def test_gcm_gradient_finite_differences():
    model = _small_model(torch.float64)
    g = torch.randn(3, 8, dtype=torch.float64)
    ids, pad = pad_code_batch([[4, 5, 6], [7, 8], [9, 10, 11]])
    labels = torch.tensor([1.0, 0.0, 0.0], dtype=torch.float64)

    weight = model.match_head.weight
    loss = gcm_loss(model, g, ids, pad, labels)
    model.zero_grad()
    loss.backward()
    analytic = weight.grad.detach().clone().numpy()

    h = 1e-6
    numeric = np.zeros_like(analytic)
    with torch.no_grad():
        flat_w = weight.view(-1)
        for i in range(flat_w.numel()):
            orig = float(flat_w[i])
            flat_w[i] = orig + h
            up = float(gcm_loss(model, g, ids, pad, labels))
            flat_w[i] = orig - h
            down = float(gcm_loss(model, g, ids, pad, labels))
            flat_w[i] = orig
            numeric.reshape(-1)[i] = (up - down) / (2 * h)
    mask = np.abs(numeric) > 1e-7
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-9)
    assert rel[mask].max() <= 1e-3


# --- generation ---

def test_gcg_uniform_distribution_gives_log_vocab():
    model = _small_model(vocab=25)
    with torch.no_grad():
        model.lm_head.weight.zero_()
        model.lm_head.bias.zero_()
    g = torch.randn(2, 8)
    ids, pad = pad_code_batch([[4, 5, 6, 7], [8, 9, 10]])
    loss = gcg_loss(model, g, ids, pad)
    assert float(loss) == pytest.approx(math.log(25), abs=1e-5)


def test_gcg_requires_two_tokens():
    model = _small_model()
    ids, pad = pad_code_batch([[4]])
    with pytest.raises(EmptyCodeError):
        gcg_loss(model, torch.randn(1, 8), ids, pad)


def test_gcg_causal_mask_isolation():
    """Perturbing code token t's embedding leaves losses at positions <= t
    unchanged and changes some later position."""
    model = _small_model()
    g = torch.randn(1, 8)
    # token id 29 appears exactly once, at position t=2
    ids, pad = pad_code_batch([[4, 5, 29, 6, 7, 8]])
    t = 2
    _, base = gcg_loss(model, g, ids, pad, per_position=True)
    with torch.no_grad():
        # single-component bump; a uniform shift would vanish in LayerNorm
        model.core.token_emb.weight[29, 3] += 1.0
    _, bumped = gcg_loss(model, g, ids, pad, per_position=True)
    base = base[0].detach().numpy()
    bumped = bumped[0].detach().numpy()
    # column j predicts token j+1: unchanged for j < t, changed after
    assert np.allclose(base[:t], bumped[:t], atol=1e-7)
    assert np.abs(base[t:] - bumped[t:]).max() > 1e-6


def test_gcg_queries_visible_to_code():
    model = _small_model()
    g1 = torch.randn(1, 8)
    g2 = torch.randn(1, 8) * 3
    ids, pad = pad_code_batch([[4, 5, 6, 7]])
    l1 = float(gcg_loss(model, g1, ids, pad))
    l2 = float(gcg_loss(model, g2, ids, pad))
    assert abs(l1 - l2) > 1e-8  # graph context reaches code predictions


# --- distribution loss ---

def test_kl_identical_is_zero():
    z = torch.randn(4, 6)
    assert float(kl_distribution_loss(z, z)) == 0.0


def test_kl_hand_case():
    z = torch.zeros(1, 2)  # softmax -> [0.5, 0.5]
    g = torch.log(torch.tensor([[0.9, 0.1]]))
    expected = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
    assert float(kl_distribution_loss(z, g)) == pytest.approx(expected,
                                                              abs=1e-5)
    assert expected == pytest.approx(0.510826, abs=1e-6)


def test_kl_nonnegative_on_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        rows_z = int(rng.integers(1, 6))
        rows_g = int(rng.integers(1, 6))
        d = int(rng.integers(2, 8))
        z = torch.tensor(rng.standard_normal((rows_z, d)) * 3)
        g = torch.tensor(rng.standard_normal((rows_g, d)) * 3)
        assert float(kl_distribution_loss(z, g)) >= -1e-9


def test_kl_shape_errors():
    with pytest.raises(ShapeError):
        kl_distribution_loss(torch.randn(2, 3), torch.randn(2, 4))
    with pytest.raises(ShapeError):
        kl_distribution_loss(torch.randn(2, 3), torch.randn(3, 3),
                             mode="per_row")


def test_kl_per_row_mode():
    z = torch.randn(3, 4)
    g = torch.randn(3, 4)
    per_row = float(kl_distribution_loss(z, g, mode="per_row"))
    assert per_row >= -1e-9


def test_kl_gradient_finite_differences():
    rng = np.random.default_rng(4)
    z_np = rng.standard_normal((2, 5))
    g_np = rng.standard_normal((2, 5))
    g = torch.tensor(g_np, requires_grad=True)
    loss = kl_distribution_loss(torch.tensor(z_np), g)
    loss.backward()
    analytic = g.grad.numpy()

    h = 1e-5
    flat = g_np.reshape(-1)
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = float(kl_distribution_loss(torch.tensor(z_np),
                                        torch.tensor(g_np)))
        flat[i] = orig - h
        down = float(kl_distribution_loss(torch.tensor(z_np),
                                          torch.tensor(g_np)))
        flat[i] = orig
        numeric[i] = (up - down) / (2 * h)
    numeric = numeric.reshape(analytic.shape)
    mask = np.abs(numeric) > 1e-7
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-9)
    assert rel[mask].max() <= 1e-3
