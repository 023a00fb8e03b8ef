import pytest

from verigrag.errors import UnsupportedConstruct, VerilogSyntaxError
from verigrag.netlist import VerilogSource, parse_text, parse_verilog
from verigrag.netlist.parser import AlwaysItem, AssignItem, InstanceItem


def test_flip_flop_module(flip_flop_source):
    modules = parse_verilog(flip_flop_source)
    assert len(modules) == 1
    mod = modules[0]
    assert mod.name == "flip_flop"
    assert [(p.name, p.direction) for p in mod.ports] == [
        ("clk", "in"), ("d", "in"), ("q", "out")]
    assert mod.ports[2].is_reg
    assert len(mod.items) == 1
    assert isinstance(mod.items[0], AlwaysItem)


def test_empty_string_is_syntax_error():
    with pytest.raises(VerilogSyntaxError):
        parse_verilog(VerilogSource.from_text(""))


def test_whitespace_only_is_syntax_error():
    with pytest.raises(VerilogSyntaxError):
        parse_text("   \n\t  ")


def test_two_modules_in_source_order():
    modules = parse_text(
        "module first(input a, output y); assign y = a; endmodule\n"
        "module second(input b, output z); assign z = ~b; endmodule\n")
    assert [m.name for m in modules] == ["first", "second"]


def test_ansi_ports_with_ranges():
    mod = parse_text(
        "module m(input wire [7:0] a, output reg [15:0] y);\n"
        "  always @(posedge a) y <= a;\nendmodule")[0]
    assert mod.ports[0].width == 8
    assert mod.ports[1].width == 16
    assert mod.ports[1].is_reg


def test_expression_precedence_matches_verilog():
    mod = parse_text(
        "module m(input a, input b, input c, output y);\n"
        "  assign y = a | b & c;\nendmodule")[0]
    expr = mod.items[0].expr
    # | binds loosest: a | (b & c)
    assert expr.op == "|"
    assert expr.right.op == "&"


def test_concat_and_ternary():
    mod = parse_text(
        "module m(input s, input [3:0] a, input [3:0] b, output [8:0] y);\n"
        "  assign y = s ? {a, b, 1'b1} : {b, a, 1'b0};\nendmodule")[0]
    assert isinstance(mod.items[0], AssignItem)


def test_instance_named_and_positional():
    mods = parse_text(
        "module leaf(input a, output y); assign y = a; endmodule\n"
        "module top(input x, output z);\n"
        "  wire t;\n"
        "  leaf u1 (.a(x), .y(t));\n"
        "  leaf u2 (t, z);\n"
        "endmodule")
    top = mods[1]
    insts = [i for i in top.items if isinstance(i, InstanceItem)]
    assert len(insts) == 2
    assert insts[0].conns[0][0] == "a"
    assert insts[1].conns[0][0] is None


@pytest.mark.parametrize("snippet,construct", [
    ("module m(input a, output y); always @(negedge a) y <= a; endmodule",
     "negedge"),
    ("module m(input a, output reg y);\n"
     "  always @(posedge a) if (a) y <= a;\nendmodule", "if"),
    ("module m(input a, output reg y);\n"
     "  always @(posedge a) y = a;\nendmodule", "blocking"),
    ("module m(input [3:0] a, output y); assign y = a[0]; endmodule",
     "select"),
    ("module m(input a, output y); assign y = a * a; endmodule", "operator"),
    ("module m; initial begin end endmodule", "initial"),
    ("module m(input a, output y); parameter W = 4; assign y = a; endmodule",
     "parameter"),
    ("`define W 4\nmodule m(input a, output y); assign y = a; endmodule",
     "directive"),
    ("module m(input a, output y); assign y = \\esc~ped ; endmodule",
     "escaped"),
    ("module m(input a, output y); assign y = 1'bx; endmodule", "x/z"),
    ("module m(input a, output y); assign y = undeclared; endmodule",
     "implicit"),
    ("module m(input [0:3] a, output y); assign y = a; endmodule",
     "ascending"),
])
def test_unsupported_constructs(snippet, construct):
    with pytest.raises(UnsupportedConstruct):
        parse_text(snippet)


@pytest.mark.parametrize("snippet", [
    "module m(input a, output y); assign y = a endmodule",  # missing ;
    "module m(input a, output y; assign y = a; endmodule",  # bad header
    "module m(input a, input a, output y); assign y = a; endmodule",
    "module m(a, y); input a; assign y = a; endmodule",  # y undirected
    "module m(input a, output reg y); assign y = a; endmodule",  # assign reg
    "module m(input a, output y); always @(posedge a) y <= a; endmodule",
    "module m(input a, output y); assign y = (a; endmodule",
    "garbage tokens here",
])
def test_syntax_errors(snippet):
    with pytest.raises(VerilogSyntaxError):
        parse_text(snippet)


def test_syntax_error_carries_location():
    try:
        parse_text("module m(input a, output y);\n  assign y = ;\nendmodule")
    except VerilogSyntaxError as exc:
        assert exc.line == 2
        assert exc.col > 0
    else:
        pytest.fail("expected VerilogSyntaxError")


def test_duplicate_module_names_rejected():
    with pytest.raises(VerilogSyntaxError):
        parse_text("module m(input a, output y); assign y = a; endmodule\n"
                   "module m(input b, output z); assign z = b; endmodule")


def test_module_span_covers_source():
    text = ("// header\nmodule one(input a, output y); assign y = a; "
            "endmodule\nmodule two(input b, output z); assign z = b; "
            "endmodule\n")
    mods = parse_text(text)
    start, end = mods[0].span
    assert text[start:end].startswith("module one")
    assert text[start:end].endswith("endmodule")
    assert "two" not in text[start:end]
