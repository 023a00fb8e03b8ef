"""Elaborate a module AST into its data-path graph.

Nodes are created for ports (declaration order), then per item in source
order: constants and operator applications in post-order, followed by the
item's own cell (register or instance). Wires never become nodes; each
reader connects straight to the wire's driver, and every output port gets
one final edge from its driver. This node/edge ordering is normative so
repeated extraction is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..errors import DomainError, ElaborationError, UnsupportedConstruct
from .graph import DataPathGraph, GraphEdge, GraphNode, round6g
from .parser import (AlwaysItem, AssignItem, Binary, Concat, Expr, Ident,
                     InstanceItem, Literal, ModuleAST, Ternary, Unary)

_BINARY_OPS = {"&": "and", "|": "or", "^": "xor", "+": "add", "-": "sub",
               "==": "eq"}
_UNARY_OPS = {"~": "not", "-": "neg"}


def normalize_edge_width(width: int, w_max: int) -> float:
    """Normalized wire width in (0, 1]: width / w_max."""
    if width <= 0 or w_max <= 0:
        raise DomainError(f"widths must be positive, got ({width}, {w_max})")
    if width > w_max:
        raise DomainError(f"width {width} exceeds corpus maximum {w_max}")
    return width / w_max


# A signal producer: either a finished node id or a net name resolved later.
@dataclass(frozen=True)
class _Ref:
    node: int | None = None
    net: str | None = None


@dataclass
class _EdgeRequest:
    src: _Ref
    dst: int
    width: int


@dataclass
class _Builder:
    ast: ModuleAST
    registry: Mapping[str, ModuleAST] | None
    nodes: list[GraphNode] = field(default_factory=list)
    requests: list[_EdgeRequest] = field(default_factory=list)
    drivers: dict[str, _Ref] = field(default_factory=dict)
    driver_desc: dict[str, str] = field(default_factory=dict)

    def add_node(self, kind, op_type, io_type=None, port_names=(), params=()) -> int:
        nid = len(self.nodes)
        self.nodes.append(GraphNode(id=nid, kind=kind, op_type=op_type,
                                    io_type=io_type,
                                    port_names=tuple(port_names),
                                    params=tuple(params)))
        return nid

    def set_driver(self, net: str, ref: _Ref, what: str) -> None:
        if net in self.drivers:
            raise ElaborationError(
                f"net {net!r} driven by both {self.driver_desc[net]} and {what}")
        self.drivers[net] = ref
        self.driver_desc[net] = what

    def width_of(self, expr: Expr) -> int:
        if isinstance(expr, Ident):
            w = self.ast.signal_width(expr.name)
            assert w is not None  # parser guarantees declarations
            return w
        if isinstance(expr, Literal):
            return expr.width
        if isinstance(expr, Unary):
            return self.width_of(expr.operand)
        if isinstance(expr, Binary):
            if expr.op == "==":
                return 1
            return max(self.width_of(expr.left), self.width_of(expr.right))
        if isinstance(expr, Ternary):
            return max(self.width_of(expr.then), self.width_of(expr.other))
        if isinstance(expr, Concat):
            return sum(self.width_of(p) for p in expr.parts)
        raise AssertionError(f"unknown expression {expr!r}")

    def emit_expr(self, expr: Expr) -> tuple[_Ref, int]:
        """Create operator/const nodes in post-order; return (ref, width)."""
        if isinstance(expr, Ident):
            return _Ref(net=expr.name), self.width_of(expr)
        if isinstance(expr, Literal):
            nid = self.add_node("const", "const",
                                params=(("value", str(expr.value)),))
            return _Ref(node=nid), expr.width
        if isinstance(expr, Unary):
            ref, w = self.emit_expr(expr.operand)
            nid = self.add_node("cell", _UNARY_OPS[expr.op],
                                port_names=("a", "y"))
            self.requests.append(_EdgeRequest(ref, nid, w))
            return _Ref(node=nid), w
        if isinstance(expr, Binary):
            lref, lw = self.emit_expr(expr.left)
            rref, rw = self.emit_expr(expr.right)
            nid = self.add_node("cell", _BINARY_OPS[expr.op],
                                port_names=("a", "b", "y"))
            self.requests.append(_EdgeRequest(lref, nid, lw))
            self.requests.append(_EdgeRequest(rref, nid, rw))
            width = 1 if expr.op == "==" else max(lw, rw)
            return _Ref(node=nid), width
        if isinstance(expr, Ternary):
            cref, cw = self.emit_expr(expr.cond)
            tref, tw = self.emit_expr(expr.then)
            eref, ew = self.emit_expr(expr.other)
            nid = self.add_node("cell", "mux",
                                port_names=("sel", "a", "b", "y"))
            self.requests.append(_EdgeRequest(cref, nid, cw))
            self.requests.append(_EdgeRequest(tref, nid, tw))
            self.requests.append(_EdgeRequest(eref, nid, ew))
            return _Ref(node=nid), max(tw, ew)
        if isinstance(expr, Concat):
            refs = [self.emit_expr(p) for p in expr.parts]
            names = tuple(f"i{i}" for i in range(len(refs))) + ("y",)
            nid = self.add_node("cell", "concat", port_names=names)
            for ref, w in refs:
                self.requests.append(_EdgeRequest(ref, nid, w))
            return _Ref(node=nid), sum(w for _, w in refs)
        raise AssertionError(f"unknown expression {expr!r}")


def _build_structure(ast: ModuleAST, registry=None) -> tuple[list[GraphNode],
                                                             list[tuple[int, int, int]]]:
    """Produce nodes plus raw edges (src, dst, width), before normalization."""
    b = _Builder(ast, registry)
    port_dirs = {p.name: p.direction for p in ast.ports}
    port_node: dict[str, int] = {}

    for p in ast.ports:
        if p.direction == "inout":
            raise UnsupportedConstruct(f"inout port {p.name!r}")
        kind = "port_in" if p.direction == "in" else "port_out"
        io = "input" if p.direction == "in" else "output"
        nid = b.add_node(kind, "port", io_type=io, port_names=(p.name,))
        port_node[p.name] = nid
        if p.direction == "in":
            b.set_driver(p.name, _Ref(node=nid), f"input port {p.name!r}")

    for item in ast.items:
        if isinstance(item, AssignItem):
            if port_dirs.get(item.target) == "in":
                raise ElaborationError(
                    f"assign drives input port {item.target!r}")
            ref, _ = b.emit_expr(item.expr)
            b.set_driver(item.target, ref, f"assign at line {item.line}")
        elif isinstance(item, AlwaysItem):
            if port_dirs.get(item.target) == "in":
                raise ElaborationError(
                    f"register update drives input port {item.target!r}")
            dref, dw = b.emit_expr(item.expr)
            nid = b.add_node("cell", "dff", port_names=("clk", "d", "q"))
            clk_w = ast.signal_width(item.clock)
            b.requests.append(_EdgeRequest(_Ref(net=item.clock), nid, clk_w))
            b.requests.append(_EdgeRequest(dref, nid, dw))
            b.set_driver(item.target, _Ref(node=nid),
                         f"register at line {item.line}")
        elif isinstance(item, InstanceItem):
            _emit_instance(b, item, port_dirs)

    # one edge per output port, from whatever drives it
    for p in ast.ports:
        if p.direction != "out":
            continue
        if p.name not in b.drivers:
            raise ElaborationError(f"output port {p.name!r} is never driven")
        b.requests.append(_EdgeRequest(_Ref(net=p.name), port_node[p.name],
                                       p.width))

    if not b.nodes:
        raise ElaborationError(
            f"module {ast.name!r} elaborates to an empty graph")

    edges = [(_resolve(b, req), req.dst, req.width) for req in b.requests]
    _reject_combinational_cycles(b.nodes, edges, ast.name)
    return b.nodes, edges


def _emit_instance(b: _Builder, item: InstanceItem, port_dirs) -> None:
    if b.registry is None or item.module_name not in b.registry:
        raise UnsupportedConstruct(
            f"instance of unknown module {item.module_name!r}", item.line)
    target = b.registry[item.module_name]
    target_ports = {p.name: p for p in target.ports}

    # resolve positional connections to the target's declaration order
    conns: list[tuple[str, Expr | None]] = []
    if item.conns and item.conns[0][0] is None:
        if len(item.conns) > len(target.ports):
            raise ElaborationError(
                f"instance {item.instance_name!r} has more connections than "
                f"module {item.module_name!r} has ports")
        for port, (_, expr) in zip(target.ports, item.conns):
            conns.append((port.name, expr))
    else:
        for port_name, expr in item.conns:
            if port_name not in target_ports:
                raise ElaborationError(
                    f"module {item.module_name!r} has no port {port_name!r}")
            conns.append((port_name, expr))

    input_refs: list[tuple[_Ref, int]] = []
    output_nets: list[tuple[str, int]] = []
    connected: list[str] = []
    for port_name, expr in conns:
        if expr is None:
            continue
        port = target_ports[port_name]
        connected.append(port_name)
        if port.direction == "inout":
            raise UnsupportedConstruct(
                f"connection to inout port {port_name!r}", item.line)
        if port.direction == "in":
            ref, w = b.emit_expr(expr)
            input_refs.append((ref, w))
        else:
            if not isinstance(expr, Ident):
                raise ElaborationError(
                    f"output port {port_name!r} of instance "
                    f"{item.instance_name!r} must connect to a plain net")
            if port_dirs.get(expr.name) == "in":
                raise ElaborationError(
                    f"instance output drives input port {expr.name!r}")
            width = b.ast.signal_width(expr.name)
            output_nets.append((expr.name, width))

    nid = b.add_node("cell", item.module_name, port_names=tuple(connected))
    for ref, w in input_refs:
        b.requests.append(_EdgeRequest(ref, nid, w))
    for net, width in output_nets:
        b.set_driver(net, _Ref(node=nid),
                     f"instance {item.instance_name!r}")


def _resolve(b: _Builder, req: _EdgeRequest) -> int:
    ref = req.src
    seen: set[str] = set()
    while ref.node is None:
        net = ref.net
        if net in seen:
            raise ElaborationError(
                f"combinational loop through net {net!r}")
        seen.add(net)
        if net not in b.drivers:
            raise ElaborationError(f"net {net!r} is read but never driven")
        ref = b.drivers[net]
    return ref.node


def _reject_combinational_cycles(nodes, edges, module_name) -> None:
    # drop edges sourced at registers, then Kahn's algorithm on the rest
    n = len(nodes)
    adj: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for src, dst, _ in edges:
        if nodes[src].op_type == "dff":
            continue
        adj[src].append(dst)
        indeg[dst] += 1
    queue = [i for i in range(n) if indeg[i] == 0]
    visited = 0
    while queue:
        u = queue.pop()
        visited += 1
        for v in adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if visited != n:
        raise ElaborationError(
            f"combinational loop in module {module_name!r}")


def max_edge_width(ast: ModuleAST, registry=None) -> int:
    """Largest wire width the module's graph will carry (≥ 1)."""
    _, edges = _build_structure(ast, registry)
    return max((w for _, _, w in edges), default=1)


def finish_graph(structure: tuple[list[GraphNode], list[tuple[int, int, int]]],
                 module_name: str, w_max: int,
                 source_sha256: str = "") -> DataPathGraph:
    """Normalize a prebuilt structure's widths; avoids re-elaboration when
    the corpus-wide maximum is only known after a first pass."""
    if w_max <= 0:
        raise DomainError(f"w_max must be positive, got {w_max}")
    nodes, raw_edges = structure
    edges = []
    for src, dst, width in raw_edges:
        norm = round6g(normalize_edge_width(width, w_max))
        edges.append(GraphEdge(src=src, dst=dst, width=width, width_norm=norm))
    return DataPathGraph(module_name=module_name, source_sha256=source_sha256,
                         nodes=nodes, edges=edges)


def elaborate_to_graph(ast: ModuleAST, w_max: int,
                       registry: Mapping[str, ModuleAST] | None = None,
                       source_sha256: str = "") -> DataPathGraph:
    """Build the data-path graph with widths normalized by ``w_max``.

    ``registry`` maps module names to ASTs so instance port directions can
    be resolved; instances of unknown modules are outside the subset.
    """
    if w_max <= 0:
        raise DomainError(f"w_max must be positive, got {w_max}")
    return finish_graph(_build_structure(ast, registry), ast.name, w_max,
                        source_sha256)
