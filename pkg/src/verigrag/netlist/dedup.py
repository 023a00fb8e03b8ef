"""Near-duplicate filtering with MinHash-estimated Jaccard similarity.

Sources are shingled into token 3-grams (comments stripped, whitespace
collapsed), hashed into fixed-length MinHash signatures, and scanned
greedily in input order: a source is dropped when its estimated similarity
to any retained source reaches the threshold.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from .source import VerilogSource

MERSENNE31 = (1 << 31) - 1

_COMMENT_RE = re.compile(r"//[^\n]*|/\*.*?\*/", re.DOTALL)


def shingle_text(text: str, n: int = 3) -> frozenset[str]:
    """Token n-gram shingles of comment-stripped, whitespace-collapsed text."""
    tokens = _COMMENT_RE.sub(" ", text).split()
    if len(tokens) < n:
        return frozenset({"\x1f".join(tokens)})
    return frozenset("\x1f".join(tokens[i:i + n])
                     for i in range(len(tokens) - n + 1))


def _shingle_ints(shingles) -> np.ndarray:
    out = np.empty(len(shingles), dtype=np.uint64)
    for i, s in enumerate(sorted(shingles)):
        digest = hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest()
        out[i] = int.from_bytes(digest, "little") % MERSENNE31
    return out


class MinHasher:
    """Family of ``num_hashes`` universal hash functions over a 31-bit space."""

    def __init__(self, num_hashes: int = 256, seed: int = 0):
        if num_hashes < 1:
            raise ValueError("num_hashes must be positive")
        rng = np.random.default_rng(seed)
        self.num_hashes = num_hashes
        self.a = rng.integers(1, MERSENNE31, size=num_hashes, dtype=np.uint64)
        self.b = rng.integers(0, MERSENNE31, size=num_hashes, dtype=np.uint64)

    def signature(self, shingles) -> np.ndarray:
        """MinHash signature of a shingle set (uint64 vector)."""
        x = _shingle_ints(shingles)
        # products stay below 2**62, safely inside uint64
        hashed = (self.a[:, None] * x[None, :] + self.b[:, None]) % MERSENNE31
        return hashed.min(axis=1)


def estimate_jaccard(sig_a: np.ndarray, sig_b: np.ndarray) -> float:
    """Fraction of matching signature slots, an unbiased Jaccard estimate."""
    if sig_a.shape != sig_b.shape:
        raise ValueError("signatures have different lengths")
    return float(np.mean(sig_a == sig_b))


def exact_jaccard(a, b) -> float:
    union = len(frozenset(a) | frozenset(b))
    if union == 0:
        return 1.0
    return len(frozenset(a) & frozenset(b)) / union


def jaccard_minhash_dedup(sources: list[VerilogSource], threshold: float,
                          num_hashes: int = 256, seed: int = 0,
                          ) -> list[VerilogSource]:
    """Greedy in-order scan dropping near-duplicates of retained sources.

    ``threshold`` compares against the MinHash estimate: 0 keeps only the
    first source, values above 1 keep everything.
    """
    if not sources:
        raise ValueError("sources must be non-empty")
    if threshold > 1.0:
        return list(sources)
    hasher = MinHasher(num_hashes=num_hashes, seed=seed)
    retained: list[VerilogSource] = []
    signatures: list[np.ndarray] = []
    for src in sources:
        sig = hasher.signature(shingle_text(src.text))
        if any(estimate_jaccard(sig, kept) >= threshold for kept in signatures):
            continue
        retained.append(src)
        signatures.append(sig)
    return retained
