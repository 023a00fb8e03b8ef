"""Tokenizers shared by the retriever, the alignment module, and the LM.

``HashedTextTokenizer`` maps description text into a fixed hashed
vocabulary (no fitting, not invertible). ``CodeTokenizer`` keeps an
explicit token table built from a corpus so generated ids can be decoded
back to text; sized Verilog literals stay single tokens so decoded output
re-lexes cleanly.
"""

from __future__ import annotations

import hashlib
import re

TOKEN_RE = re.compile(r"\d+'[bBdDhHoO][0-9a-fA-F_]+|==|<=|\w+|[^\w\s]")


def split_tokens(text: str) -> list[str]:
    return TOKEN_RE.findall(text)


class HashedTextTokenizer:
    """Whitespace+punctuation tokens hashed into [1, vocab_size); 0 pads."""

    PAD = 0

    def __init__(self, vocab_size: int = 2048, seed: int = 0):
        if vocab_size < 2:
            raise ValueError("vocab_size must be at least 2")
        self.vocab_size = vocab_size
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)

    def encode(self, text: str) -> list[int]:
        ids = []
        for token in split_tokens(text.lower()):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                                     key=self._key).digest()
            ids.append(1 + int.from_bytes(digest, "little") % (self.vocab_size - 1))
        return ids


class CodeTokenizer:
    """Invertible tokenizer with a corpus-built vocabulary."""

    PAD, BOS, EOS, UNK = 0, 1, 2, 3
    _SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]

    def __init__(self, vocab: list[str] | None = None):
        self.tokens = list(self._SPECIALS)
        if vocab:
            self.tokens.extend(vocab)
        self.index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def vocab_size(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts, max_vocab: int = 4096) -> "CodeTokenizer":
        counts: dict[str, int] = {}
        for text in texts:
            for token in split_tokens(text):
                counts[token] = counts.get(token, 0) + 1
        ranked = sorted(counts, key=lambda t: (-counts[t], t))
        return cls(vocab=ranked[:max_vocab - len(cls._SPECIALS)])

    def encode(self, text: str, add_bos: bool = False,
               add_eos: bool = False) -> list[int]:
        ids = [self.index.get(t, self.UNK) for t in split_tokens(text)]
        if add_bos:
            ids.insert(0, self.BOS)
        if add_eos:
            ids.append(self.EOS)
        return ids

    def decode(self, ids) -> str:
        words = []
        for i in ids:
            if i == self.EOS:
                break
            if i in (self.PAD, self.BOS):
                continue
            words.append(self.tokens[i] if 0 <= i < len(self.tokens) else "<unk>")
        return " ".join(words)

    def to_config(self) -> dict:
        return {"vocab": self.tokens[len(self._SPECIALS):]}

    @classmethod
    def from_config(cls, config: dict) -> "CodeTokenizer":
        return cls(vocab=list(config["vocab"]))
