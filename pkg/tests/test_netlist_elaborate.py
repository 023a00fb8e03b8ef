import pytest

from verigrag.errors import DomainError, ElaborationError, UnsupportedConstruct
from verigrag.netlist import (elaborate_to_graph, normalize_edge_width,
                              parse_text, validate_graph)


def _graph(text, w_max=None, module=0):
    mods = parse_text(text)
    registry = {m.name: m for m in mods}
    ast = mods[module]
    if w_max is None:
        from verigrag.netlist import max_edge_width
        w_max = max(max_edge_width(m, registry) for m in mods)
    return elaborate_to_graph(ast, w_max, registry)


def test_flip_flop_nodes_and_edges(flip_flop_graph):
    g = flip_flop_graph
    kinds = [(n.kind, n.op_type, n.port_names[0] if n.port_names else None)
             for n in g.nodes]
    assert kinds == [("port_in", "port", "clk"), ("port_in", "port", "d"),
                     ("port_out", "port", "q"), ("cell", "dff", "clk")]
    edge_set = {(e.src, e.dst) for e in g.edges}
    assert edge_set == {(0, 3), (1, 3), (3, 2)}
    assert all(e.width_norm == 1.0 for e in g.edges)
    assert len(g.nodes) == 4 and len(g.edges) == 3


def test_single_assign_buffer():
    g = _graph("module b(input [7:0] a, output [7:0] y);\n"
               "  assign y = a;\nendmodule", w_max=8)
    assert len(g.nodes) == 2
    assert len(g.edges) == 1
    e = g.edges[0]
    assert (e.src, e.dst, e.width, e.width_norm) == (0, 1, 8, 1.0)


def test_operator_nodes_in_post_order():
    g = _graph("module m(input a, input b, input c, output y);\n"
               "  assign y = a & b | c;\nendmodule")
    ops = [n.op_type for n in g.nodes if n.kind == "cell"]
    assert ops == ["and", "or"]  # children before parents


def test_constant_node():
    g = _graph("module m(input [3:0] a, output [3:0] y);\n"
               "  assign y = a + 4'd3;\nendmodule")
    consts = [n for n in g.nodes if n.kind == "const"]
    assert len(consts) == 1
    assert consts[0].params == (("value", "3"),)


def test_register_feedback_allows_self_reference():
    g = _graph("module c(input clk, output reg [3:0] q);\n"
               "  always @(posedge clk) q <= q + 1;\nendmodule")
    dff = next(n for n in g.nodes if n.op_type == "dff")
    add = next(n for n in g.nodes if n.op_type == "add")
    assert (dff.id, add.id) in {(e.src, e.dst) for e in g.edges}
    validate_graph(g)


def test_undriven_output_rejected():
    with pytest.raises(ElaborationError):
        _graph("module m(input a, output y);\n  wire t;\n"
               "  assign t = a;\nendmodule")


def test_read_of_undriven_wire_rejected():
    with pytest.raises(ElaborationError):
        _graph("module m(input a, output y);\n  wire t;\n"
               "  assign y = t;\nendmodule")


def test_multiply_driven_net_rejected():
    with pytest.raises(ElaborationError):
        _graph("module m(input a, input b, output y);\n"
               "  assign y = a;\n  assign y = b;\nendmodule")


def test_combinational_loop_rejected():
    with pytest.raises(ElaborationError):
        _graph("module m(input a, output y);\n  wire p, q;\n"
               "  assign p = q & a;\n  assign q = p;\n"
               "  assign y = q;\nendmodule")


def test_drive_input_port_rejected():
    with pytest.raises(ElaborationError):
        _graph("module m(input a, output y);\n"
               "  assign a = y;\nendmodule")


def test_inout_port_unsupported():
    with pytest.raises(UnsupportedConstruct):
        _graph("module m(inout a, output y);\n  assign y = a;\nendmodule")


def test_instance_wiring_with_registry():
    g = _graph(
        "module leaf(input i, output o); assign o = ~i; endmodule\n"
        "module top(input x, output z);\n  wire t;\n"
        "  leaf u1 (.i(x), .o(t));\n  leaf u2 (t, z);\nendmodule",
        module=1)
    cells = [n for n in g.nodes if n.kind == "cell"]
    assert [c.op_type for c in cells] == ["leaf", "leaf"]
    assert cells[0].port_names == ("i", "o")
    edges = {(e.src, e.dst) for e in g.edges}
    # x -> u1, u1 -> u2, u2 -> z
    assert (0, cells[0].id) in edges
    assert (cells[0].id, cells[1].id) in edges
    assert (cells[1].id, 1) in edges


def test_instance_of_unknown_module_unsupported():
    mods = parse_text("module top(input x, output z);\n"
                      "  mystery u (.a(x), .y(z));\nendmodule")
    with pytest.raises(UnsupportedConstruct):
        elaborate_to_graph(mods[0], 1, {m.name: m for m in mods})


def test_instance_output_must_be_identifier():
    with pytest.raises(ElaborationError):
        _graph("module leaf(input i, output o); assign o = i; endmodule\n"
               "module top(input x, output z);\n"
               "  leaf u (.i(x), .o(z & x));\nendmodule", module=1)


def test_empty_module_rejected():
    with pytest.raises(ElaborationError):
        _graph("module nothing; endmodule", w_max=1)


def test_port_direction_invariant(toy_graphs):
    for g in toy_graphs:
        for e in g.edges:
            assert g.nodes[e.dst].kind != "port_in"
            assert g.nodes[e.src].kind != "port_out"


def test_dag_after_removing_register_edges(toy_graphs):
    for g in toy_graphs:
        adj = {n.id: [] for n in g.nodes}
        indeg = {n.id: 0 for n in g.nodes}
        for e in g.edges:
            if g.nodes[e.src].op_type == "dff":
                continue
            adj[e.src].append(e.dst)
            indeg[e.dst] += 1
        queue = [i for i, d in indeg.items() if d == 0]
        seen = 0
        while queue:
            u = queue.pop()
            seen += 1
            for v in adj[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        assert seen == len(g.nodes)


def test_normalize_edge_width_values():
    assert normalize_edge_width(64, 64) == 1.0
    assert normalize_edge_width(1, 64) == 0.015625
    assert normalize_edge_width(8, 32) == 0.25


@pytest.mark.parametrize("width,w_max", [(65, 64), (0, 8), (4, 0), (-1, 8)])
def test_normalize_edge_width_domain(width, w_max):
    with pytest.raises(DomainError):
        normalize_edge_width(width, w_max)


def test_w_max_below_module_width_rejected():
    mods = parse_text("module m(input [7:0] a, output [7:0] y);\n"
                      "  assign y = a;\nendmodule")
    with pytest.raises(DomainError):
        elaborate_to_graph(mods[0], 4)
