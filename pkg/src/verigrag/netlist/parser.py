"""Recursive-descent parser producing module ASTs for the Verilog subset.

Supported constructs: module/endmodule, ANSI and non-ANSI port
declarations, wire/reg declarations with descending ranges, continuous
assigns over {~, unary -, &, |, ^, +, -, ==, ?:, concatenation}, single
posedge-clocked nonblocking register updates, and instantiations of
modules with named or positional connections. Everything else is either a
:class:`VerilogSyntaxError` (malformed input) or an
:class:`UnsupportedConstruct` (valid Verilog outside the subset).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnsupportedConstruct, VerilogSyntaxError
from .lexer import Token, parse_sized_literal, tokenize
from .source import VerilogSource

DIRECTIONS = {"input": "in", "output": "out", "inout": "inout"}


# --- expression nodes ---------------------------------------------------

@dataclass(frozen=True)
class Ident:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Literal:
    value: int
    width: int
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Unary:
    op: str  # '~' or '-'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # '&' '|' '^' '+' '-' '=='
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class Concat:
    parts: tuple["Expr", ...]


Expr = Ident | Literal | Unary | Binary | Ternary | Concat


# --- module items -------------------------------------------------------

@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # 'in' | 'out' | 'inout'
    width: int
    is_reg: bool = False


@dataclass(frozen=True)
class Net:
    name: str
    width: int
    is_reg: bool = False


@dataclass(frozen=True)
class AssignItem:
    target: str
    expr: Expr
    line: int = 0


@dataclass(frozen=True)
class AlwaysItem:
    clock: str
    target: str
    expr: Expr
    line: int = 0


@dataclass(frozen=True)
class InstanceItem:
    module_name: str
    instance_name: str
    # (port_name or None for positional, expr or None for unconnected)
    conns: tuple[tuple[str | None, Expr | None], ...]
    line: int = 0


Item = AssignItem | AlwaysItem | InstanceItem


@dataclass
class ModuleAST:
    name: str
    ports: list[Port]
    nets: list[Net]  # internal wires/regs, excluding ports
    items: list[Item]
    span: tuple[int, int] = (0, 0)  # [start, end) char offsets in source text

    def signal_width(self, name: str) -> int | None:
        for p in self.ports:
            if p.name == name:
                return p.width
        for n in self.nets:
            if n.name == name:
                return n.width
        return None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers --
    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            self._fail(f"expected {text!r}, found {tok.text!r}", tok)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind == "unsupported_kw":
            raise UnsupportedConstruct(f"keyword {tok.text!r}", tok.line, tok.col)
        if tok.kind != "ident":
            self._fail(f"expected {what}, found {tok.text!r}", tok)
        return self.advance()

    def _fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        shown = tok.text if tok.text else "end of input"
        raise VerilogSyntaxError(message.replace("found ''", f"found {shown}"),
                                 tok.line, tok.col)

    def _unsupported_here(self) -> None:
        tok = self.peek()
        if tok.kind == "unsupported_kw":
            raise UnsupportedConstruct(f"keyword {tok.text!r}", tok.line, tok.col)

    # -- grammar --
    def parse_source(self) -> list[ModuleAST]:
        modules = []
        while self.peek().kind != "eof":
            self._unsupported_here()
            tok = self.peek()
            if tok.text != "module":
                self._fail(f"expected 'module', found {tok.text!r}", tok)
            modules.append(self.parse_module())
        if not modules:
            tok = self.peek()
            raise VerilogSyntaxError("no module declaration found", tok.line, tok.col)
        names = set()
        for m in modules:
            if m.name in names:
                raise VerilogSyntaxError(f"duplicate module name {m.name!r}")
            names.add(m.name)
        return modules

    def parse_module(self) -> ModuleAST:
        start_tok = self.expect("module")
        start_offset = self._offset_of(start_tok)
        name = self.expect_ident("module name").text

        header_order: list[str] = []
        ansi_ports: dict[str, Port] = {}
        if self.peek().text == "(":
            self.advance()
            if self.peek().text != ")":
                if self.peek().text in DIRECTIONS:
                    self._parse_ansi_ports(header_order, ansi_ports)
                else:
                    while True:
                        header_order.append(self.expect_ident("port name").text)
                        if self.peek().text != ",":
                            break
                        self.advance()
            self.expect(")")
        self.expect(";")

        body_ports: dict[str, Port] = {}
        nets: dict[str, Net] = {}
        items: list[Item] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                self._fail("missing 'endmodule'", tok)
            if tok.text == "endmodule":
                end_tok = self.advance()
                break
            self._parse_item(tok, ansi_ports, body_ports, nets, items)

        ports = self._resolve_ports(name, header_order, ansi_ports, body_ports, nets)
        ast = ModuleAST(name=name, ports=ports, nets=list(nets.values()),
                        items=items,
                        span=(start_offset, self._offset_of(end_tok) + len("endmodule")))
        self._check_references(ast)
        return ast

    def _offset_of(self, tok: Token) -> int:
        # Recover the char offset from (line, col); lines are 1-based.
        offset = 0
        for _ in range(tok.line - 1):
            offset = self.text.index("\n", offset) + 1
        return offset + tok.col - 1

    def _parse_ansi_ports(self, order: list[str], ports: dict[str, Port]) -> None:
        direction = "in"
        is_reg = False
        width = 1
        while True:
            tok = self.peek()
            if tok.text in DIRECTIONS:
                direction = DIRECTIONS[self.advance().text]
                is_reg = False
                width = 1
                if self.peek().text == "wire":
                    self.advance()
                elif self.peek().text == "reg":
                    self.advance()
                    is_reg = True
                width = self._parse_optional_range()
            name_tok = self.expect_ident("port name")
            if name_tok.text in ports:
                self._fail(f"duplicate port {name_tok.text!r}", name_tok)
            ports[name_tok.text] = Port(name_tok.text, direction, width, is_reg)
            order.append(name_tok.text)
            if self.peek().text != ",":
                return
            self.advance()

    def _parse_optional_range(self) -> int:
        if self.peek().text != "[":
            return 1
        open_tok = self.advance()
        msb_tok = self.peek()
        if msb_tok.kind != "number":
            raise UnsupportedConstruct("non-constant range bound",
                                       msb_tok.line, msb_tok.col)
        msb = int(self.advance().text.replace("_", ""))
        self.expect(":")
        lsb_tok = self.peek()
        if lsb_tok.kind != "number":
            raise UnsupportedConstruct("non-constant range bound",
                                       lsb_tok.line, lsb_tok.col)
        lsb = int(self.advance().text.replace("_", ""))
        self.expect("]")
        if msb < lsb:
            raise UnsupportedConstruct("ascending range", open_tok.line, open_tok.col)
        return msb - lsb + 1

    def _parse_item(self, tok: Token, ansi_ports, body_ports, nets, items) -> None:
        if tok.kind == "unsupported_kw":
            raise UnsupportedConstruct(f"keyword {tok.text!r}", tok.line, tok.col)
        if tok.text in DIRECTIONS:
            self._parse_direction_decl(ansi_ports, body_ports, nets)
        elif tok.text in ("wire", "reg"):
            self._parse_net_decl(nets, ansi_ports, body_ports)
        elif tok.text == "assign":
            items.append(self._parse_assign())
        elif tok.text == "always":
            items.append(self._parse_always())
        elif tok.kind == "ident":
            items.append(self._parse_instance())
        else:
            self._fail(f"unexpected {tok.text!r} in module body", tok)

    def _parse_direction_decl(self, ansi_ports, body_ports, nets) -> None:
        direction = DIRECTIONS[self.advance().text]
        is_reg = False
        if self.peek().text == "wire":
            self.advance()
        elif self.peek().text == "reg":
            self.advance()
            is_reg = True
        width = self._parse_optional_range()
        while True:
            name_tok = self.expect_ident("port name")
            name = name_tok.text
            if name in ansi_ports or name in body_ports:
                self._fail(f"duplicate declaration of {name!r}", name_tok)
            this_reg = is_reg
            if name in nets:
                # 'reg q;' appearing before 'output q;'
                net = nets.pop(name)
                if net.is_reg and not is_reg and net.width == width:
                    this_reg = True
                else:
                    self._fail(f"duplicate declaration of {name!r}", name_tok)
            body_ports[name] = Port(name, direction, width, this_reg)
            if self.peek().text != ",":
                break
            self.advance()
        self.expect(";")

    def _parse_net_decl(self, nets, ansi_ports, body_ports) -> None:
        is_reg = self.advance().text == "reg"
        width = self._parse_optional_range()
        while True:
            name_tok = self.expect_ident("net name")
            name = name_tok.text
            if name in nets:
                self._fail(f"duplicate declaration of {name!r}", name_tok)
            if name in ansi_ports:
                self._fail(f"{name!r} already declared as a port", name_tok)
            if name in body_ports:
                # non-ANSI 'output reg q' spelled as separate decls
                port = body_ports[name]
                if is_reg and not port.is_reg and port.width == width:
                    body_ports[name] = Port(port.name, port.direction, width, True)
                else:
                    self._fail(f"duplicate declaration of {name!r}", name_tok)
            else:
                nets[name] = Net(name, width, is_reg)
            if self.peek().text != ",":
                break
            self.advance()
        self.expect(";")

    def _parse_assign(self) -> AssignItem:
        kw = self.expect("assign")
        target_tok = self.expect_ident("assign target")
        if self.peek().text == "[":
            tok = self.peek()
            raise UnsupportedConstruct("bit/part select on assign target",
                                       tok.line, tok.col)
        self.expect("=")
        expr = self._parse_expr()
        if self.peek().text == ",":
            tok = self.peek()
            raise UnsupportedConstruct("multiple assignments in one statement",
                                       tok.line, tok.col)
        self.expect(";")
        return AssignItem(target=target_tok.text, expr=expr, line=kw.line)

    def _parse_always(self) -> AlwaysItem:
        kw = self.expect("always")
        self.expect("@")
        self.expect("(")
        tok = self.peek()
        if tok.text == "*":
            raise UnsupportedConstruct("combinational always block", tok.line, tok.col)
        if tok.text != "posedge":
            if tok.kind == "unsupported_kw":
                raise UnsupportedConstruct(f"sensitivity {tok.text!r}",
                                           tok.line, tok.col)
            raise UnsupportedConstruct("non-posedge sensitivity list",
                                       tok.line, tok.col)
        self.advance()
        clock = self.expect_ident("clock name").text
        tok = self.peek()
        if tok.text in (",", "or"):
            raise UnsupportedConstruct("multiple events in sensitivity list",
                                       tok.line, tok.col)
        self.expect(")")

        has_begin = False
        if self.peek().text == "begin":
            self.advance()
            has_begin = True
        self._unsupported_here()
        target_tok = self.expect_ident("register name")
        tok = self.peek()
        if tok.text == "=":
            raise UnsupportedConstruct("blocking assignment in always block",
                                       tok.line, tok.col)
        if tok.text != "<=":
            self._fail(f"expected '<=', found {tok.text!r}", tok)
        self.advance()
        expr = self._parse_expr()
        self.expect(";")
        if has_begin:
            tok = self.peek()
            if tok.text != "end":
                raise UnsupportedConstruct(
                    "multiple statements in always block", tok.line, tok.col)
            self.advance()
        return AlwaysItem(clock=clock, target=target_tok.text, expr=expr,
                          line=kw.line)

    def _parse_instance(self) -> InstanceItem:
        mod_tok = self.expect_ident("module name")
        inst_tok = self.expect_ident("instance name")
        if self.peek().text == "[":
            tok = self.peek()
            raise UnsupportedConstruct("instance array", tok.line, tok.col)
        self.expect("(")
        conns: list[tuple[str | None, Expr | None]] = []
        if self.peek().text != ")":
            named = self.peek().text == "."
            while True:
                if named:
                    self.expect(".")
                    port_name = self.expect_ident("port name").text
                    self.expect("(")
                    expr = None if self.peek().text == ")" else self._parse_expr()
                    self.expect(")")
                    conns.append((port_name, expr))
                else:
                    conns.append((None, self._parse_expr()))
                if self.peek().text != ",":
                    break
                self.advance()
                if named and self.peek().text != ".":
                    self._fail("cannot mix named and positional connections")
        self.expect(")")
        self.expect(";")
        return InstanceItem(module_name=mod_tok.text, instance_name=inst_tok.text,
                            conns=tuple(conns), line=mod_tok.line)

    # -- expressions, lowest to highest precedence --
    def _parse_expr(self) -> Expr:
        return self._parse_ternary()

    def _parse_ternary(self) -> Expr:
        cond = self._parse_or()
        if self.peek().text == "?":
            self.advance()
            then = self._parse_expr()
            self.expect(":")
            other = self._parse_expr()
            result = Ternary(cond, then, other)
        else:
            result = cond
        trailing = self.peek()
        if trailing.text in self._UNSUPPORTED_OPS:
            raise UnsupportedConstruct(f"operator {trailing.text!r}",
                                       trailing.line, trailing.col)
        return result

    def _parse_or(self) -> Expr:
        left = self._parse_xor()
        while self.peek().text == "|":
            self.advance()
            left = Binary("|", left, self._parse_xor())
        return left

    def _parse_xor(self) -> Expr:
        left = self._parse_and()
        while self.peek().text == "^":
            self.advance()
            left = Binary("^", left, self._parse_and())
        return left

    def _parse_and(self) -> Expr:
        left = self._parse_eq()
        while self.peek().text == "&":
            self.advance()
            left = Binary("&", left, self._parse_eq())
        return left

    def _parse_eq(self) -> Expr:
        left = self._parse_add()
        if self.peek().text == "==":
            self.advance()
            return Binary("==", left, self._parse_add())
        return left

    def _parse_add(self) -> Expr:
        left = self._parse_unary()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            left = Binary(op, left, self._parse_unary())
        return left

    _UNSUPPORTED_OPS = {"*", "/", "%", "<<", ">>", "<<<", ">>>", "&&", "||",
                        "!", "<", ">", "!=", "===", "!==", "**"}

    def _parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.text in ("~", "-"):
            self.advance()
            return Unary(tok.text, self._parse_unary())
        if tok.text in self._UNSUPPORTED_OPS:
            raise UnsupportedConstruct(f"operator {tok.text!r}", tok.line, tok.col)
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.text in self._UNSUPPORTED_OPS:
            raise UnsupportedConstruct(f"operator {tok.text!r}", tok.line, tok.col)
        if tok.kind == "unsupported_kw":
            raise UnsupportedConstruct(f"keyword {tok.text!r}", tok.line, tok.col)
        if tok.kind == "ident":
            self.advance()
            if self.peek().text == "[":
                nxt = self.peek()
                raise UnsupportedConstruct("bit/part select", nxt.line, nxt.col)
            return Ident(tok.text, tok.line, tok.col)
        if tok.kind == "sized":
            self.advance()
            value, width = parse_sized_literal(tok)
            return Literal(value, width, tok.line, tok.col)
        if tok.kind == "number":
            self.advance()
            value = int(tok.text.replace("_", ""))
            width = max(1, value.bit_length())
            return Literal(value, width, tok.line, tok.col)
        if tok.text == "(":
            self.advance()
            inner = self._parse_expr()
            self.expect(")")
            return inner
        if tok.text == "{":
            self.advance()
            parts = [self._parse_expr()]
            while self.peek().text == ",":
                self.advance()
                parts.append(self._parse_expr())
            if self.peek().text == "{":
                nxt = self.peek()
                raise UnsupportedConstruct("replication operator", nxt.line, nxt.col)
            self.expect("}")
            return Concat(tuple(parts))
        self._fail(f"expected expression, found {tok.text!r}", tok)

    # -- post-parse validation --
    def _resolve_ports(self, module_name, header_order, ansi_ports, body_ports,
                       nets) -> list[Port]:
        if ansi_ports:
            if body_ports:
                raise VerilogSyntaxError(
                    f"module {module_name!r} mixes ANSI and non-ANSI port "
                    "declarations")
            return [ansi_ports[n] for n in header_order]
        ports = []
        for n in header_order:
            if n not in body_ports:
                raise VerilogSyntaxError(
                    f"port {n!r} has no direction declaration in module "
                    f"{module_name!r}")
            ports.append(body_ports[n])
        for n in body_ports:
            if n not in header_order:
                raise VerilogSyntaxError(
                    f"{n!r} declared as a port but missing from the port list "
                    f"of module {module_name!r}")
        return ports

    def _check_references(self, ast: ModuleAST) -> None:
        declared = {p.name for p in ast.ports} | {n.name for n in ast.nets}
        is_reg = {p.name: p.is_reg for p in ast.ports}
        is_reg.update({n.name: n.is_reg for n in ast.nets})

        def check_expr(expr: Expr) -> None:
            if isinstance(expr, Ident):
                if expr.name not in declared:
                    raise UnsupportedConstruct(
                        f"implicit net {expr.name!r}", expr.line, expr.col)
            elif isinstance(expr, Unary):
                check_expr(expr.operand)
            elif isinstance(expr, Binary):
                check_expr(expr.left)
                check_expr(expr.right)
            elif isinstance(expr, Ternary):
                check_expr(expr.cond)
                check_expr(expr.then)
                check_expr(expr.other)
            elif isinstance(expr, Concat):
                for p in expr.parts:
                    check_expr(p)

        for item in ast.items:
            if isinstance(item, AssignItem):
                if item.target not in declared:
                    raise UnsupportedConstruct(f"implicit net {item.target!r}",
                                               item.line)
                if is_reg[item.target]:
                    raise VerilogSyntaxError(
                        f"assign target {item.target!r} is a reg", item.line)
                check_expr(item.expr)
            elif isinstance(item, AlwaysItem):
                for name in (item.clock, item.target):
                    if name not in declared:
                        raise UnsupportedConstruct(f"implicit net {name!r}",
                                                   item.line)
                if not is_reg[item.target]:
                    raise VerilogSyntaxError(
                        f"nonblocking target {item.target!r} is not a reg",
                        item.line)
                check_expr(item.expr)
            elif isinstance(item, InstanceItem):
                for _, expr in item.conns:
                    if expr is not None:
                        check_expr(expr)


def parse_verilog(source: VerilogSource) -> list[ModuleAST]:
    """Parse a source file into one AST per module declaration, in order."""
    return _Parser(source.text).parse_source()


def parse_text(text: str) -> list[ModuleAST]:
    return parse_verilog(VerilogSource.from_text(text))
