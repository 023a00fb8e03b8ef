"""Raw Verilog source files and their content hashes."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class VerilogSource:
    """One source file: identifier, raw text, and the sha256 of that text.

    Construction is permissive (empty text is representable so the parser
    can report it properly); ingestion code decides what to skip.
    """

    path: str
    text: str
    sha256: str

    @classmethod
    def from_text(cls, text: str, path: str = "<memory>") -> "VerilogSource":
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return cls(path=path, text=text, sha256=digest)

    @classmethod
    def from_file(cls, path) -> "VerilogSource":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_text(text, path=str(path))
