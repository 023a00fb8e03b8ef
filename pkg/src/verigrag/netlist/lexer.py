"""Tokenizer for the supported Verilog subset.

Comments are stripped, sized literals are kept as single tokens, and every
token carries its line/column so parse errors point at the offending text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import UnsupportedConstruct, VerilogSyntaxError

KEYWORDS = frozenset({
    "module", "endmodule", "input", "output", "inout",
    "wire", "reg", "assign", "always", "posedge", "begin", "end",
})

# Verilog keywords we recognize but deliberately do not implement. Seeing
# one of these is an UnsupportedConstruct, not a syntax error, so corpus
# ingestion can skip the file and keep going.
UNSUPPORTED_KEYWORDS = frozenset({
    "negedge", "if", "else", "case", "casex", "casez", "endcase", "default",
    "for", "while", "repeat", "forever", "initial", "function", "endfunction",
    "task", "endtask", "parameter", "localparam", "defparam", "generate",
    "endgenerate", "genvar", "integer", "real", "realtime", "time", "signed",
    "supply0", "supply1", "tri", "tri0", "tri1", "triand", "trior", "trireg",
    "wand", "wor", "specify", "endspecify", "primitive", "endprimitive",
    "and", "or", "not", "nand", "nor", "xor", "xnor", "buf", "bufif0",
    "bufif1", "notif0", "notif1", "pmos", "nmos", "cmos", "event", "wait",
    "fork", "join", "disable", "deassign", "force", "release", "assign_",
    "scalared", "vectored", "small", "medium", "large", "highz0", "highz1",
    "pull0", "pull1", "pulldown", "pullup", "strong0", "strong1", "weak0",
    "weak1", "edge", "ifnone", "macromodule", "table", "endtable", "automatic",
})

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<ws>\s+)
  | (?P<sized>\d+\s*'\s*[a-zA-Z][0-9a-zA-Z_?]*)
  | (?P<based>'\s*[a-zA-Z][0-9a-zA-Z_?]*)
  | (?P<number>\d[\d_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<escaped>\\[^\s]+)
  | (?P<system>\$[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<directive>`[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|==|!=|<<<|>>>|<<|>>|&&|\|\||\*\*|===|!==|[-+~&|^(){}\[\];:,.?=<>!*/%@#])
    """,
    re.VERBOSE | re.DOTALL,
)

_SIZED_VALUE_RE = re.compile(r"(\d+)\s*'\s*([bBdDhHoO])([0-9a-fA-F_]+)\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # 'kw', 'ident', 'number', 'sized', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    """Lex source text into tokens, raising on characters outside the subset."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise VerilogSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        group = m.lastgroup
        tok_text = m.group()
        col = pos - line_start + 1
        if group in ("comment", "ws"):
            newlines = tok_text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + tok_text.rfind("\n") + 1
        elif group == "escaped":
            raise UnsupportedConstruct("escaped identifier", line, col)
        elif group == "system":
            raise UnsupportedConstruct(f"system task {tok_text}", line, col)
        elif group == "directive":
            raise UnsupportedConstruct(f"compiler directive {tok_text}", line, col)
        elif group == "based":
            raise UnsupportedConstruct("unsized based literal", line, col)
        elif group == "ident":
            kind = "kw" if tok_text in KEYWORDS else "ident"
            if tok_text in UNSUPPORTED_KEYWORDS:
                kind = "unsupported_kw"
            tokens.append(Token(kind, tok_text, line, col))
        elif group == "number":
            tokens.append(Token("number", tok_text, line, col))
        elif group == "sized":
            tokens.append(Token("sized", tok_text, line, col))
        else:
            tokens.append(Token("op", tok_text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, n - line_start + 1))
    return tokens


def parse_sized_literal(tok: Token) -> tuple[int, int]:
    """Decode a sized literal token to (value, width).

    Only 2-state values are representable; x/z digits are outside the subset.
    """
    m = _SIZED_VALUE_RE.match(tok.text)
    if m is None:
        if re.search(r"[xXzZ?]", tok.text):
            raise UnsupportedConstruct("literal with x/z digits", tok.line, tok.col)
        raise UnsupportedConstruct(f"literal {tok.text!r}", tok.line, tok.col)
    size_s, base, digits = m.groups()
    width = int(size_s)
    if width < 1:
        raise VerilogSyntaxError("literal size must be positive", tok.line, tok.col)
    digits = digits.replace("_", "")
    base_map = {"b": 2, "d": 10, "h": 16, "o": 8}
    try:
        value = int(digits, base_map[base.lower()])
    except ValueError:
        raise VerilogSyntaxError(f"bad digits in literal {tok.text!r}",
                                 tok.line, tok.col) from None
    value &= (1 << width) - 1
    return value, width
