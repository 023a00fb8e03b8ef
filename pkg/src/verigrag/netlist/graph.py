"""Data-path graph types and their canonical JSON serialization.

One graph describes one Verilog module: ports, cells and constants as
nodes, wire connections as directed edges annotated with bit widths. The
serialized form is one JSON object per line with a fixed key order and
floats printed at 6 significant digits, so identical graphs always produce
byte-identical text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import SchemaError

SCHEMA_VERSION = 1

NODE_KINDS = ("port_in", "port_out", "cell", "const")


def canonical_float(x: float) -> str:
    """Format a float at 6 significant digits, always with a decimal marker."""
    s = f"{float(x):.6g}"
    if "." not in s and "e" not in s and "E" not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def round6g(x: float) -> float:
    """Round to the value that survives canonical 6-significant-digit printing."""
    return float(f"{float(x):.6g}")


@dataclass(frozen=True)
class GraphNode:
    id: int
    kind: str
    op_type: str
    io_type: str | None = None
    port_names: tuple[str, ...] = ()
    params: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    width: int
    width_norm: float


@dataclass
class DataPathGraph:
    module_name: str
    source_sha256: str
    nodes: list[GraphNode] = field(default_factory=list)
    edges: list[GraphEdge] = field(default_factory=list)

    @property
    def graph_id(self) -> str:
        """Corpus-unique identifier: module name plus a source-hash prefix."""
        return f"{self.module_name}:{self.source_sha256[:12]}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataPathGraph):
            return NotImplemented
        return (self.module_name == other.module_name
                and self.source_sha256 == other.source_sha256
                and self.nodes == other.nodes
                and self.edges == other.edges)


def validate_graph(graph: DataPathGraph) -> None:
    """Check the structural invariants every serialized graph must satisfy."""
    if not graph.nodes:
        raise SchemaError("graph has no nodes")
    ids = [n.id for n in graph.nodes]
    if ids != list(range(len(graph.nodes))):
        raise SchemaError("node ids are not contiguous 0..N-1")
    for n in graph.nodes:
        if n.kind not in NODE_KINDS:
            raise SchemaError(f"unknown node kind {n.kind!r}")
    for e in graph.edges:
        if not (0 <= e.src < len(ids)) or not (0 <= e.dst < len(ids)):
            raise SchemaError(f"edge ({e.src},{e.dst}) references missing node")
        if e.width < 1:
            raise SchemaError(f"edge ({e.src},{e.dst}) has non-positive width")
        if not (0.0 < e.width_norm <= 1.0):
            raise SchemaError(f"edge ({e.src},{e.dst}) width_norm outside (0,1]")
        if graph.nodes[e.dst].kind == "port_in":
            raise SchemaError("edge enters a port_in node")
        if graph.nodes[e.src].kind == "port_out":
            raise SchemaError("edge leaves a port_out node")


def serialize_graph(graph: DataPathGraph) -> str:
    """Render one graph as a single canonical JSON line.

    Keys appear in schema order and ``width_norm`` is printed with
    ``canonical_float`` so serialization is byte-deterministic.
    """
    validate_graph(graph)
    parts = [f'{{"schema_version":{SCHEMA_VERSION}',
             f',"module_name":{json.dumps(graph.module_name)}',
             f',"source_sha256":{json.dumps(graph.source_sha256)}',
             ',"nodes":[']
    node_parts = []
    for n in graph.nodes:
        io = json.dumps(n.io_type) if n.io_type is not None else "null"
        ports = "[" + ",".join(json.dumps(p) for p in n.port_names) + "]"
        params = "[" + ",".join(
            f"[{json.dumps(k)},{json.dumps(v)}]" for k, v in n.params) + "]"
        node_parts.append(
            f'{{"id":{n.id},"kind":{json.dumps(n.kind)},'
            f'"op_type":{json.dumps(n.op_type)},"io_type":{io},'
            f'"port_names":{ports},"params":{params}}}')
    parts.append(",".join(node_parts))
    parts.append('],"edges":[')
    edge_parts = [
        f'{{"src":{e.src},"dst":{e.dst},"width":{e.width},'
        f'"width_norm":{canonical_float(e.width_norm)}}}'
        for e in graph.edges
    ]
    parts.append(",".join(edge_parts))
    parts.append("]}")
    return "".join(parts)


def _require(record: dict, key: str, types) -> object:
    if key not in record:
        raise SchemaError(f"missing field {key!r}")
    value = record[key]
    if not isinstance(value, types):
        raise SchemaError(f"field {key!r} has wrong type")
    return value


def load_graph(text: str) -> DataPathGraph:
    """Parse one canonical JSON line back into a :class:`DataPathGraph`."""
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise SchemaError("graph record is not a JSON object")
    version = _require(record, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unknown schema_version {version}")
    name = _require(record, "module_name", str)
    sha = _require(record, "source_sha256", str)
    raw_nodes = _require(record, "nodes", list)
    raw_edges = _require(record, "edges", list)

    nodes = []
    for rn in raw_nodes:
        if not isinstance(rn, dict):
            raise SchemaError("node record is not a JSON object")
        io = rn.get("io_type")
        if io is not None and not isinstance(io, str):
            raise SchemaError("field 'io_type' has wrong type")
        nodes.append(GraphNode(
            id=_require(rn, "id", int),
            kind=_require(rn, "kind", str),
            op_type=_require(rn, "op_type", str),
            io_type=io,
            port_names=tuple(_require(rn, "port_names", list)),
            params=tuple((k, v) for k, v in _require(rn, "params", list)),
        ))
    edges = []
    for re_ in raw_edges:
        if not isinstance(re_, dict):
            raise SchemaError("edge record is not a JSON object")
        edges.append(GraphEdge(
            src=_require(re_, "src", int),
            dst=_require(re_, "dst", int),
            width=_require(re_, "width", int),
            width_norm=float(_require(re_, "width_norm", (int, float))),
        ))
    graph = DataPathGraph(module_name=name, source_sha256=sha,
                          nodes=nodes, edges=edges)
    validate_graph(graph)
    return graph


def write_graphs_jsonl(path, graphs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            fh.write(serialize_graph(g))
            fh.write("\n")


def read_graphs_jsonl(path) -> list[DataPathGraph]:
    graphs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                graphs.append(load_graph(line))
    return graphs
