"""Corpus-level extraction: directory of .v files to a graphs.jsonl corpus.

Files are processed in sorted path order; per-file failures are recorded
and skipped so one bad file never aborts a batch. The corpus-wide maximum
wire width is computed first so every graph's ``width_norm`` shares the
same scale, recorded in the manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import (ElaborationError, SchemaError, UnsupportedConstruct,
                      VerilogSyntaxError)
from .dedup import jaccard_minhash_dedup
from .elaborate import _build_structure, finish_graph
from .graph import DataPathGraph
from .parser import parse_verilog
from .source import VerilogSource

MANIFEST_SCHEMA_VERSION = 1

# threshold above 1 estimates can never reach: the documented keep-all value
KEEP_ALL_THRESHOLD = 1.1


@dataclass
class SkipRecord:
    path: str
    error_kind: str  # 'syntax' | 'unsupported' | 'elaboration'
    message: str


@dataclass
class DedupConfig:
    threshold: float = 0.8
    num_hashes: int = 256
    seed: int = 0


@dataclass
class ExtractionResult:
    graphs: list[DataPathGraph]
    w_max: int
    dedup: DedupConfig
    skipped: list[SkipRecord] = field(default_factory=list)

    def manifest(self) -> dict:
        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "w_max": self.w_max,
            "num_graphs": len(self.graphs),
            "dedup": {
                "threshold": self.dedup.threshold,
                "num_hashes": self.dedup.num_hashes,
                "seed": self.dedup.seed,
            },
        }


def _classify(exc: Exception) -> str:
    if isinstance(exc, UnsupportedConstruct):
        return "unsupported"
    if isinstance(exc, VerilogSyntaxError):
        return "syntax"
    return "elaboration"


def collect_sources(src_dir) -> tuple[list[VerilogSource], list[SkipRecord]]:
    """Read every .v file under ``src_dir`` in sorted relative-path order."""
    root = Path(src_dir)
    sources = []
    skipped = []
    paths = sorted(root.rglob("*.v"),
                   key=lambda p: p.relative_to(root).as_posix())
    for path in paths:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            skipped.append(SkipRecord(rel, "syntax", f"unreadable: {exc}"))
            continue
        if not text.strip():
            skipped.append(SkipRecord(rel, "syntax", "empty file"))
            continue
        sources.append(VerilogSource(path=rel, text=text,
                                     sha256=VerilogSource.from_text(text).sha256))
    return sources, skipped


def extract_corpus(src_dir, dedup: DedupConfig | None = None,
                   apply_dedup: bool = True) -> ExtractionResult:
    """Parse, optionally dedup, and elaborate a source directory."""
    if dedup is None:
        dedup = DedupConfig()
    if not apply_dedup:
        dedup = DedupConfig(threshold=KEEP_ALL_THRESHOLD,
                            num_hashes=dedup.num_hashes, seed=dedup.seed)
    sources, skipped = collect_sources(src_dir)
    if sources and dedup.threshold <= 1.0:
        sources = jaccard_minhash_dedup(sources, dedup.threshold,
                                        dedup.num_hashes, dedup.seed)

    parsed = []  # (source, registry, modules)
    for src in sources:
        try:
            modules = parse_verilog(src)
        except (VerilogSyntaxError, UnsupportedConstruct) as exc:
            skipped.append(SkipRecord(src.path, _classify(exc), str(exc)))
            continue
        registry = {m.name: m for m in modules}
        parsed.append((src, registry, modules))

    # structures are built once; the corpus-wide maximum edge width is only
    # known afterwards, so width normalization is applied in a second pass
    w_max = 1
    survivors = []
    for src, registry, modules in parsed:
        try:
            structures = [(ast, _build_structure(ast, registry))
                          for ast in modules]
        except (ElaborationError, UnsupportedConstruct) as exc:
            skipped.append(SkipRecord(src.path, _classify(exc), str(exc)))
            continue
        for _, (_, edges) in structures:
            w_max = max(w_max, max((w for _, _, w in edges), default=1))
        survivors.append((src, structures))

    graphs = []
    for src, structures in survivors:
        for ast, structure in structures:
            graphs.append(finish_graph(structure, ast.name, w_max,
                                       source_sha256=src.sha256))
    return ExtractionResult(graphs=graphs, w_max=w_max, dedup=dedup,
                            skipped=skipped)


def write_manifest(path, result: ExtractionResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.manifest(), fh, separators=(",", ":"))
        fh.write("\n")


def load_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise SchemaError(f"unknown manifest schema_version "
                          f"{manifest.get('schema_version')!r}")
    for key in ("w_max", "num_graphs", "dedup"):
        if key not in manifest:
            raise SchemaError(f"manifest missing field {key!r}")
    return manifest


def write_skip_log(path, skipped: list[SkipRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in skipped:
            fh.write(json.dumps({"path": record.path,
                                 "error_kind": record.error_kind,
                                 "message": record.message}))
            fh.write("\n")


def module_code(source: VerilogSource, ast) -> str:
    """Exact source slice of one module, for pairing code with its graph."""
    start, end = ast.span
    return source.text[start:end]
