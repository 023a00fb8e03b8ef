/** Tokenizer for the supported Verilog subset (see docs/verilog_subset.md).
 *
 * Hand-rolled scanner: this module is the throughput-critical reimplementation,
 * so tokens are produced with charCode dispatch instead of a master regex.
 * Tokenization decisions match the reference exactly (including quirks like
 * `===` splitting into `==` + `=`).
 */

import { syntaxError, unsupported } from "./errors.js";

export type TokenKind =
  | "kw"
  | "unsupported_kw"
  | "ident"
  | "number"
  | "sized"
  | "op"
  | "eof";

export interface Token {
  kind: TokenKind;
  text: string;
  line: number;
  col: number;
}

const KEYWORDS = new Set([
  "module", "endmodule", "input", "output", "inout",
  "wire", "reg", "assign", "always", "posedge", "begin", "end",
]);

const UNSUPPORTED_KEYWORDS = new Set([
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
]);

const C_NL = 10;
const C_QUOTE = 39; // '
const C_DOLLAR = 36;
const C_BACKTICK = 96;
const C_BACKSLASH = 92;
const C_UNDERSCORE = 95;
const C_SLASH = 47;
const C_STAR = 42;

const SINGLE_OPS = new Set("-+~&|^(){}[];:,.?=<>!*/%@#".split("")
  .map((c) => c.charCodeAt(0)));

function isSpace(c: number): boolean {
  return c === 32 || c === 9 || c === 10 || c === 13 || c === 11 || c === 12;
}

function isDigit(c: number): boolean {
  return c >= 48 && c <= 57;
}

function isIdentStart(c: number): boolean {
  return (c >= 97 && c <= 122) || (c >= 65 && c <= 90) || c === C_UNDERSCORE;
}

function isIdentPart(c: number): boolean {
  return isIdentStart(c) || isDigit(c) || c === C_DOLLAR;
}

function isLetter(c: number): boolean {
  return (c >= 97 && c <= 122) || (c >= 65 && c <= 90);
}

function isAlnumLiteral(c: number): boolean {
  // [0-9a-zA-Z_?] — the character class inside sized/based literal bodies
  return isDigit(c) || (c >= 97 && c <= 122) || (c >= 65 && c <= 90)
    || c === C_UNDERSCORE || c === 63;
}

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  const n = text.length;
  let pos = 0;
  let line = 1;
  let lineStart = 0;

  const skipWsAndNewlines = (from: number, to: number): void => {
    for (let i = from; i < to; i += 1) {
      if (text.charCodeAt(i) === C_NL) {
        line += 1;
        lineStart = i + 1;
      }
    }
  };

  while (pos < n) {
    const c = text.charCodeAt(pos);
    const col = pos - lineStart + 1;

    if (isSpace(c)) {
      if (c === C_NL) {
        line += 1;
        lineStart = pos + 1;
      }
      pos += 1;
      continue;
    }

    if (c === C_SLASH && pos + 1 < n) {
      const c2 = text.charCodeAt(pos + 1);
      if (c2 === C_SLASH) {
        let end = text.indexOf("\n", pos + 2);
        if (end < 0) end = n;
        pos = end;
        continue;
      }
      if (c2 === C_STAR) {
        const end = text.indexOf("*/", pos + 2);
        if (end >= 0) {
          skipWsAndNewlines(pos, end + 2);
          pos = end + 2;
          continue;
        }
        // unterminated: '/' falls through and lexes as an operator, the
        // same way the reference's comment pattern fails to match
      }
    }

    if (isIdentStart(c)) {
      let end = pos + 1;
      while (end < n && isIdentPart(text.charCodeAt(end))) end += 1;
      const word = text.slice(pos, end);
      let kind: TokenKind = KEYWORDS.has(word) ? "kw" : "ident";
      if (UNSUPPORTED_KEYWORDS.has(word)) kind = "unsupported_kw";
      tokens.push({ kind, text: word, line, col });
      pos = end;
      continue;
    }

    if (isDigit(c)) {
      let end = pos + 1;
      while (end < n) {
        const cc = text.charCodeAt(end);
        if (!isDigit(cc) && cc !== C_UNDERSCORE) break;
        end += 1;
      }
      // lookahead across whitespace for a base quote: sized literal
      let probe = end;
      while (probe < n && isSpace(text.charCodeAt(probe))) probe += 1;
      if (probe < n && text.charCodeAt(probe) === C_QUOTE) {
        let body = probe + 1;
        while (body < n && isSpace(text.charCodeAt(body))) body += 1;
        if (body < n && isLetter(text.charCodeAt(body))) {
          let litEnd = body + 1;
          while (litEnd < n && isAlnumLiteral(text.charCodeAt(litEnd))) {
            litEnd += 1;
          }
          // line tracking intentionally skips literal-internal whitespace,
          // mirroring the reference tokenizer
          tokens.push({ kind: "sized", text: text.slice(pos, litEnd),
                        line, col });
          pos = litEnd;
          continue;
        }
      }
      tokens.push({ kind: "number", text: text.slice(pos, end), line, col });
      pos = end;
      continue;
    }

    if (c === C_QUOTE) {
      let body = pos + 1;
      while (body < n && isSpace(text.charCodeAt(body))) body += 1;
      if (body < n && isLetter(text.charCodeAt(body))) {
        throw unsupported("unsized based literal", line, col);
      }
      throw syntaxError("unexpected character \"'\"", line, col);
    }

    if (c === C_BACKSLASH) {
      throw unsupported("escaped identifier", line, col);
    }
    if (c === C_DOLLAR) {
      let end = pos + 1;
      while (end < n && isIdentPart(text.charCodeAt(end))) end += 1;
      throw unsupported(`system task ${text.slice(pos, end)}`, line, col);
    }
    if (c === C_BACKTICK) {
      let end = pos + 1;
      while (end < n && isIdentPart(text.charCodeAt(end))) end += 1;
      throw unsupported(`compiler directive ${text.slice(pos, end)}`,
                        line, col);
    }

    // operators: multi-character forms first, in reference order
    const two = pos + 1 < n ? text.slice(pos, pos + 2) : "";
    const three = pos + 2 < n ? text.slice(pos, pos + 3) : "";
    let op: string | null = null;
    if (two === "<=" || two === "==" || two === "!=") {
      op = two;
    } else if (three === "<<<" || three === ">>>") {
      op = three;
    } else if (two === "<<" || two === ">>" || two === "&&" || two === "||"
               || two === "**") {
      op = two;
    } else if (SINGLE_OPS.has(c)) {
      op = text[pos];
    }
    if (op !== null) {
      tokens.push({ kind: "op", text: op, line, col });
      pos += op.length;
      continue;
    }

    throw syntaxError(`unexpected character '${text[pos]}'`, line, col);
  }
  tokens.push({ kind: "eof", text: "", line, col: n - lineStart + 1 });
  return tokens;
}

const SIZED_VALUE_RE = /^(\d+)\s*'\s*([bBdDhHoO])([0-9a-fA-F_]+)$/;

/** Decode a sized literal to (value, width); x/z digits are unsupported. */
export function parseSizedLiteral(tok: Token): { value: bigint; width: number } {
  const m = SIZED_VALUE_RE.exec(tok.text);
  if (m === null) {
    if (/[xXzZ?]/.test(tok.text)) {
      throw unsupported("literal with x/z digits", tok.line, tok.col);
    }
    throw unsupported(`literal '${tok.text}'`, tok.line, tok.col);
  }
  const width = parseInt(m[1], 10);
  if (width < 1) {
    throw syntaxError("literal size must be positive", tok.line, tok.col);
  }
  const digits = m[3].replace(/_/g, "");
  const bases: Record<string, number> = { b: 2, d: 10, h: 16, o: 8 };
  const base = bases[m[2].toLowerCase()];
  let value = 0n;
  for (const ch of digits) {
    const digit = parseInt(ch, 16);
    if (Number.isNaN(digit) || digit >= base) {
      throw syntaxError(`bad digits in literal '${tok.text}'`, tok.line, tok.col);
    }
    value = value * BigInt(base) + BigInt(digit);
  }
  value &= (1n << BigInt(width)) - 1n;
  return { value, width };
}
