import numpy as np
import pytest

from verigrag.netlist import (MinHasher, VerilogSource, estimate_jaccard,
                              exact_jaccard, jaccard_minhash_dedup,
                              shingle_text)


def _src(text, path="a.v"):
    return VerilogSource.from_text(text, path)


def test_identical_pair_dropped():
    a = _src("module m(input x, output y); assign y = x; endmodule", "a.v")
    b = _src(a.text, "b.v")
    kept = jaccard_minhash_dedup([a, b], threshold=0.8)
    assert [s.path for s in kept] == ["a.v"]


def test_single_source_unchanged():
    a = _src("module m(input x, output y); assign y = x; endmodule")
    assert jaccard_minhash_dedup([a], threshold=0.8) == [a]


def test_threshold_zero_keeps_only_first():
    sources = [_src(f"module m{i}(input a, output y); assign y = a; "
                    f"endmodule", f"{i}.v") for i in range(4)]
    kept = jaccard_minhash_dedup(sources, threshold=0.0)
    assert len(kept) == 1


def test_threshold_above_one_keeps_all():
    a = _src("module m(input x, output y); assign y = x; endmodule", "a.v")
    b = _src(a.text, "b.v")
    assert len(jaccard_minhash_dedup([a, b], threshold=1.1)) == 2


def test_empty_source_list_rejected():
    with pytest.raises(ValueError):
        jaccard_minhash_dedup([], threshold=0.8)


def test_overlapping_shingle_sets_estimate():
    # shingle sets {a,b,c} vs {b,c,d}: exact Jaccard 2/4 = 0.5
    hasher = MinHasher(num_hashes=256, seed=0)
    sig1 = hasher.signature(frozenset({"a", "b", "c"}))
    sig2 = hasher.signature(frozenset({"b", "c", "d"}))
    estimate = estimate_jaccard(sig1, sig2)
    assert abs(estimate - 0.5) <= 0.1
    assert exact_jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5


def test_comments_and_whitespace_ignored():
    plain = "module m (input x, output y); assign y = x; endmodule"
    noisy = ("// a comment\nmodule m (input x,\n\t output y); /* block */\n"
             "assign   y =\nx;\nendmodule")
    assert shingle_text(plain) == shingle_text(noisy)


def test_signature_determinism():
    hasher = MinHasher(num_hashes=64, seed=3)
    shingles = shingle_text("module m(input a, output y); endmodule")
    assert np.array_equal(hasher.signature(shingles),
                          hasher.signature(shingles))


def test_dedup_soundness_no_near_duplicate_pairs_survive():
    """No retained pair may have exact Jaccard >= threshold + 0.1."""
    rng = np.random.default_rng(11)
    words = [f"tok{i}" for i in range(40)]
    sources = []
    base = " ".join(rng.choice(words, size=60).tolist())
    sources.append(_src(base, "base.v"))
    for i in range(20):
        tokens = base.split()
        for _ in range(int(rng.integers(0, 25))):
            tokens[int(rng.integers(len(tokens)))] = words[
                int(rng.integers(len(words)))]
        sources.append(_src(" ".join(tokens), f"v{i}.v"))
    threshold = 0.8
    kept = jaccard_minhash_dedup(sources, threshold=threshold,
                                 num_hashes=256, seed=0)
    shingles = [shingle_text(s.text) for s in kept]
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            assert exact_jaccard(shingles[i], shingles[j]) < threshold + 0.1


def test_estimate_tracks_exact_jaccard():
    hasher = MinHasher(num_hashes=256, seed=5)
    rng = np.random.default_rng(5)
    universe = [f"s{i}" for i in range(60)]
    for _ in range(10):
        a = frozenset(x for x in universe if rng.random() < 0.5)
        b = frozenset(x for x in universe if rng.random() < 0.5)
        if not a or not b:
            continue
        est = estimate_jaccard(hasher.signature(a), hasher.signature(b))
        assert abs(est - exact_jaccard(a, b)) <= 0.15
