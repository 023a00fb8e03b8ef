"""Unbiased pass@k estimator.

pass@k = 1 - C(n-c, k)/C(n, k): the chance that a uniform k-subset of the
n samples contains at least one passing sample. Computed as a running
product so no binomial coefficient is ever materialized.
"""

from __future__ import annotations

from ..errors import DomainError


def pass_at_k(n: int, c: int, k: int) -> float:
    if not (isinstance(n, int) and isinstance(c, int) and isinstance(k, int)):
        raise DomainError("n, c, k must be integers")
    if not 0 <= c <= n:
        raise DomainError(f"need 0 <= c <= n, got c={c}, n={n}")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if c == 0:
        return 0.0
    if n - c < k:
        return 1.0
    # C(n-c, k)/C(n, k) = prod_{i=0}^{k-1} (n-c-i)/(n-i)
    ratio = 1.0
    for i in range(k):
        ratio *= (n - c - i) / (n - i)
    return 1.0 - ratio
