import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from verigrag.encoder import info_nce
from verigrag.errors import DegenerateInputError, DomainError


def test_single_pair_loss_exactly_zero():
    z = torch.tensor([[0.3, -0.7, 1.1]])
    assert float(info_nce(z, z, 0.5)) == 0.0


def test_orthonormal_pair_value():
    z = torch.eye(2)
    expected = math.log(1 + math.exp(-1))
    assert float(info_nce(z, z, 1.0)) == pytest.approx(expected, abs=1e-5)


def test_small_tau_pushes_loss_to_zero():
    z = torch.eye(2)
    assert float(info_nce(z, z, 0.01)) < 1e-3


def test_tau_domain():
    z = torch.eye(2)
    for tau in (0.0, -1.0):
        with pytest.raises(DomainError):
            info_nce(z, z, tau)


def test_zero_norm_row_rejected():
    z1 = torch.tensor([[1.0, 0.0], [0.0, 0.0]])
    z2 = torch.eye(2)
    with pytest.raises(DegenerateInputError):
        info_nce(z1, z2, 0.5)


def test_shape_mismatch_rejected():
    with pytest.raises(DomainError):
        info_nce(torch.randn(3, 4), torch.randn(2, 4), 0.5)


def finite_difference_gradient(f, x, h=1e-4):
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        out[i] = (up - down) / (2 * h)
    return grad


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    z1 = rng.standard_normal((4, 8))
    z2 = rng.standard_normal((4, 8))
    tau = 0.3

    z1_t = torch.tensor(z1, requires_grad=True, dtype=torch.float64)
    loss = info_nce(z1_t, torch.tensor(z2, dtype=torch.float64), tau)
    loss.backward()
    analytic = z1_t.grad.numpy()

    def f(arr):
        return float(info_nce(torch.tensor(arr, dtype=torch.float64),
                              torch.tensor(z2, dtype=torch.float64), tau))

    numeric = finite_difference_gradient(f, z1.copy())
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8)
    mask = np.abs(numeric) > 1e-6
    assert rel[mask].max() <= 1e-3


@given(st.integers(min_value=1, max_value=6),
       st.integers(min_value=2, max_value=8),
       st.floats(min_value=0.05, max_value=2.0),
       st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_upper_bound_ln_b_plus_2_over_tau(batch, dim, tau, seed):
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal((batch, dim)) + 0.01
    z2 = rng.standard_normal((batch, dim)) + 0.01
    loss = float(info_nce(torch.tensor(z1), torch.tensor(z2), tau))
    assert loss <= math.log(batch) + 2.0 / tau + 1e-6
