"""Verilog-subset front end: parsing, elaboration, dedup, serialization."""

from .dedup import (MinHasher, estimate_jaccard, exact_jaccard,
                    jaccard_minhash_dedup, shingle_text)
from .corpus import (DedupConfig, ExtractionResult, SkipRecord,
                     extract_corpus, load_manifest, module_code,
                     write_manifest)
from .elaborate import elaborate_to_graph, max_edge_width, normalize_edge_width
from .graph import (DataPathGraph, GraphEdge, GraphNode, load_graph,
                    read_graphs_jsonl, serialize_graph, validate_graph,
                    write_graphs_jsonl)
from .parser import ModuleAST, parse_text, parse_verilog
from .source import VerilogSource

__all__ = [
    "DataPathGraph", "GraphEdge", "GraphNode", "ModuleAST", "VerilogSource",
    "DedupConfig", "ExtractionResult", "SkipRecord", "MinHasher",
    "parse_verilog", "parse_text", "elaborate_to_graph", "max_edge_width",
    "normalize_edge_width", "serialize_graph", "load_graph", "validate_graph",
    "write_graphs_jsonl", "read_graphs_jsonl", "jaccard_minhash_dedup",
    "shingle_text", "estimate_jaccard", "exact_jaccard", "extract_corpus",
    "write_manifest", "load_manifest", "module_code",
]
