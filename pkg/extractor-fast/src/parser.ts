/** Recursive-descent parser, behavior-identical to the reference extractor. */

import { Expr, Item, ModuleAst, Net, Port } from "./ast.js";
import { syntaxError, unsupported } from "./errors.js";
import { parseSizedLiteral, Token, tokenize } from "./lexer.js";

const DIRECTIONS: Record<string, "in" | "out" | "inout"> = {
  input: "in",
  output: "out",
  inout: "inout",
};

const UNSUPPORTED_OPS = new Set([
  "*", "/", "%", "<<", ">>", "<<<", ">>>", "&&", "||", "!", "<", ">",
  "!=", "===", "!==", "**",
]);

class Parser {
  private tokens: Token[];
  private pos = 0;

  constructor(text: string) {
    this.tokens = tokenize(text);
  }

  private peek(offset = 0): Token {
    const i = Math.min(this.pos + offset, this.tokens.length - 1);
    return this.tokens[i];
  }

  private advance(): Token {
    const tok = this.tokens[this.pos];
    if (tok.kind !== "eof") this.pos += 1;
    return tok;
  }

  private expect(text: string): Token {
    const tok = this.peek();
    if (tok.text !== text) this.fail(`expected '${text}', found '${tok.text}'`, tok);
    return this.advance();
  }

  private expectIdent(what = "identifier"): Token {
    const tok = this.peek();
    if (tok.kind === "unsupported_kw") {
      throw unsupported(`keyword '${tok.text}'`, tok.line, tok.col);
    }
    if (tok.kind !== "ident") this.fail(`expected ${what}, found '${tok.text}'`, tok);
    return this.advance();
  }

  private fail(message: string, tok?: Token): never {
    const at = tok ?? this.peek();
    const shown = at.text === "" ? "end of input" : at.text;
    throw syntaxError(message.replace("found ''", `found ${shown}`), at.line, at.col);
  }

  private rejectUnsupportedHere(): void {
    const tok = this.peek();
    if (tok.kind === "unsupported_kw") {
      throw unsupported(`keyword '${tok.text}'`, tok.line, tok.col);
    }
  }

  parseSource(): ModuleAst[] {
    const modules: ModuleAst[] = [];
    while (this.peek().kind !== "eof") {
      this.rejectUnsupportedHere();
      const tok = this.peek();
      if (tok.text !== "module") this.fail(`expected 'module', found '${tok.text}'`, tok);
      modules.push(this.parseModule());
    }
    if (modules.length === 0) {
      const tok = this.peek();
      throw syntaxError("no module declaration found", tok.line, tok.col);
    }
    const names = new Set<string>();
    for (const m of modules) {
      if (names.has(m.name)) throw syntaxError(`duplicate module name '${m.name}'`);
      names.add(m.name);
    }
    return modules;
  }

  private parseModule(): ModuleAst {
    this.expect("module");
    const name = this.expectIdent("module name").text;

    const headerOrder: string[] = [];
    const ansiPorts = new Map<string, Port>();
    if (this.peek().text === "(") {
      this.advance();
      if (this.peek().text !== ")") {
        if (this.peek().text in DIRECTIONS) {
          this.parseAnsiPorts(headerOrder, ansiPorts);
        } else {
          for (;;) {
            headerOrder.push(this.expectIdent("port name").text);
            if (this.peek().text !== ",") break;
            this.advance();
          }
        }
      }
      this.expect(")");
    }
    this.expect(";");

    const bodyPorts = new Map<string, Port>();
    const nets = new Map<string, Net>();
    const items: Item[] = [];
    for (;;) {
      const tok = this.peek();
      if (tok.kind === "eof") this.fail("missing 'endmodule'", tok);
      if (tok.text === "endmodule") {
        this.advance();
        break;
      }
      this.parseItem(tok, ansiPorts, bodyPorts, nets, items);
    }

    const ports = this.resolvePorts(name, headerOrder, ansiPorts, bodyPorts);
    const ast: ModuleAst = { name, ports, nets: [...nets.values()], items };
    this.checkReferences(ast);
    return ast;
  }

  private parseAnsiPorts(order: string[], ports: Map<string, Port>): void {
    let direction: "in" | "out" | "inout" = "in";
    let isReg = false;
    let width = 1;
    for (;;) {
      const tok = this.peek();
      if (tok.text in DIRECTIONS) {
        direction = DIRECTIONS[this.advance().text];
        isReg = false;
        width = 1;
        if (this.peek().text === "wire") {
          this.advance();
        } else if (this.peek().text === "reg") {
          this.advance();
          isReg = true;
        }
        width = this.parseOptionalRange();
      }
      const nameTok = this.expectIdent("port name");
      if (ports.has(nameTok.text)) {
        this.fail(`duplicate port '${nameTok.text}'`, nameTok);
      }
      ports.set(nameTok.text, { name: nameTok.text, direction, width, isReg });
      order.push(nameTok.text);
      if (this.peek().text !== ",") return;
      this.advance();
    }
  }

  private parseOptionalRange(): number {
    if (this.peek().text !== "[") return 1;
    const openTok = this.advance();
    const msbTok = this.peek();
    if (msbTok.kind !== "number") {
      throw unsupported("non-constant range bound", msbTok.line, msbTok.col);
    }
    const msb = parseInt(this.advance().text.replace(/_/g, ""), 10);
    this.expect(":");
    const lsbTok = this.peek();
    if (lsbTok.kind !== "number") {
      throw unsupported("non-constant range bound", lsbTok.line, lsbTok.col);
    }
    const lsb = parseInt(this.advance().text.replace(/_/g, ""), 10);
    this.expect("]");
    if (msb < lsb) throw unsupported("ascending range", openTok.line, openTok.col);
    return msb - lsb + 1;
  }

  private parseItem(
    tok: Token,
    ansiPorts: Map<string, Port>,
    bodyPorts: Map<string, Port>,
    nets: Map<string, Net>,
    items: Item[],
  ): void {
    if (tok.kind === "unsupported_kw") {
      throw unsupported(`keyword '${tok.text}'`, tok.line, tok.col);
    }
    if (tok.text in DIRECTIONS) {
      this.parseDirectionDecl(ansiPorts, bodyPorts, nets);
    } else if (tok.text === "wire" || tok.text === "reg") {
      this.parseNetDecl(nets, ansiPorts, bodyPorts);
    } else if (tok.text === "assign") {
      items.push(this.parseAssign());
    } else if (tok.text === "always") {
      items.push(this.parseAlways());
    } else if (tok.kind === "ident") {
      items.push(this.parseInstance());
    } else {
      this.fail(`unexpected '${tok.text}' in module body`, tok);
    }
  }

  private parseDirectionDecl(
    ansiPorts: Map<string, Port>,
    bodyPorts: Map<string, Port>,
    nets: Map<string, Net>,
  ): void {
    const direction = DIRECTIONS[this.advance().text];
    let isReg = false;
    if (this.peek().text === "wire") {
      this.advance();
    } else if (this.peek().text === "reg") {
      this.advance();
      isReg = true;
    }
    const width = this.parseOptionalRange();
    for (;;) {
      const nameTok = this.expectIdent("port name");
      const name = nameTok.text;
      if (ansiPorts.has(name) || bodyPorts.has(name)) {
        this.fail(`duplicate declaration of '${name}'`, nameTok);
      }
      let thisReg = isReg;
      const net = nets.get(name);
      if (net !== undefined) {
        nets.delete(name);
        if (net.isReg && !isReg && net.width === width) {
          thisReg = true;
        } else {
          this.fail(`duplicate declaration of '${name}'`, nameTok);
        }
      }
      bodyPorts.set(name, { name, direction, width, isReg: thisReg });
      if (this.peek().text !== ",") break;
      this.advance();
    }
    this.expect(";");
  }

  private parseNetDecl(
    nets: Map<string, Net>,
    ansiPorts: Map<string, Port>,
    bodyPorts: Map<string, Port>,
  ): void {
    const isReg = this.advance().text === "reg";
    const width = this.parseOptionalRange();
    for (;;) {
      const nameTok = this.expectIdent("net name");
      const name = nameTok.text;
      if (nets.has(name)) this.fail(`duplicate declaration of '${name}'`, nameTok);
      if (ansiPorts.has(name)) {
        this.fail(`'${name}' already declared as a port`, nameTok);
      }
      const port = bodyPorts.get(name);
      if (port !== undefined) {
        if (isReg && !port.isReg && port.width === width) {
          bodyPorts.set(name, { ...port, isReg: true });
        } else {
          this.fail(`duplicate declaration of '${name}'`, nameTok);
        }
      } else {
        nets.set(name, { name, width, isReg });
      }
      if (this.peek().text !== ",") break;
      this.advance();
    }
    this.expect(";");
  }

  private parseAssign(): Item {
    const kw = this.expect("assign");
    const targetTok = this.expectIdent("assign target");
    if (this.peek().text === "[") {
      const tok = this.peek();
      throw unsupported("bit/part select on assign target", tok.line, tok.col);
    }
    this.expect("=");
    const expr = this.parseExpr();
    if (this.peek().text === ",") {
      const tok = this.peek();
      throw unsupported("multiple assignments in one statement", tok.line, tok.col);
    }
    this.expect(";");
    return { t: "assign", target: targetTok.text, expr, line: kw.line };
  }

  private parseAlways(): Item {
    const kw = this.expect("always");
    this.expect("@");
    this.expect("(");
    let tok = this.peek();
    if (tok.text === "*") {
      throw unsupported("combinational always block", tok.line, tok.col);
    }
    if (tok.text !== "posedge") {
      if (tok.kind === "unsupported_kw") {
        throw unsupported(`sensitivity '${tok.text}'`, tok.line, tok.col);
      }
      throw unsupported("non-posedge sensitivity list", tok.line, tok.col);
    }
    this.advance();
    const clock = this.expectIdent("clock name").text;
    tok = this.peek();
    if (tok.text === "," || tok.text === "or") {
      throw unsupported("multiple events in sensitivity list", tok.line, tok.col);
    }
    this.expect(")");

    let hasBegin = false;
    if (this.peek().text === "begin") {
      this.advance();
      hasBegin = true;
    }
    this.rejectUnsupportedHere();
    const targetTok = this.expectIdent("register name");
    tok = this.peek();
    if (tok.text === "=") {
      throw unsupported("blocking assignment in always block", tok.line, tok.col);
    }
    if (tok.text !== "<=") this.fail(`expected '<=', found '${tok.text}'`, tok);
    this.advance();
    const expr = this.parseExpr();
    this.expect(";");
    if (hasBegin) {
      tok = this.peek();
      if (tok.text !== "end") {
        throw unsupported("multiple statements in always block", tok.line, tok.col);
      }
      this.advance();
    }
    return { t: "always", clock, target: targetTok.text, expr, line: kw.line };
  }

  private parseInstance(): Item {
    const modTok = this.expectIdent("module name");
    const instTok = this.expectIdent("instance name");
    if (this.peek().text === "[") {
      const tok = this.peek();
      throw unsupported("instance array", tok.line, tok.col);
    }
    this.expect("(");
    const conns: Array<{ port: string | null; expr: Expr | null }> = [];
    if (this.peek().text !== ")") {
      const named = this.peek().text === ".";
      for (;;) {
        if (named) {
          this.expect(".");
          const portName = this.expectIdent("port name").text;
          this.expect("(");
          const expr = this.peek().text === ")" ? null : this.parseExpr();
          this.expect(")");
          conns.push({ port: portName, expr });
        } else {
          conns.push({ port: null, expr: this.parseExpr() });
        }
        if (this.peek().text !== ",") break;
        this.advance();
        if (named && this.peek().text !== ".") {
          this.fail("cannot mix named and positional connections");
        }
      }
    }
    this.expect(")");
    this.expect(";");
    return {
      t: "instance",
      moduleName: modTok.text,
      instanceName: instTok.text,
      conns,
      line: modTok.line,
    };
  }

  // expressions, loosest to tightest
  private parseExpr(): Expr {
    return this.parseTernary();
  }

  private parseTernary(): Expr {
    const cond = this.parseOr();
    let result: Expr;
    if (this.peek().text === "?") {
      this.advance();
      const then = this.parseExpr();
      this.expect(":");
      const other = this.parseExpr();
      result = { t: "ternary", cond, then, other };
    } else {
      result = cond;
    }
    const trailing = this.peek();
    if (UNSUPPORTED_OPS.has(trailing.text)) {
      throw unsupported(`operator '${trailing.text}'`, trailing.line, trailing.col);
    }
    return result;
  }

  private parseOr(): Expr {
    let left = this.parseXor();
    while (this.peek().text === "|") {
      this.advance();
      left = { t: "binary", op: "|", left, right: this.parseXor() };
    }
    return left;
  }

  private parseXor(): Expr {
    let left = this.parseAnd();
    while (this.peek().text === "^") {
      this.advance();
      left = { t: "binary", op: "^", left, right: this.parseAnd() };
    }
    return left;
  }

  private parseAnd(): Expr {
    let left = this.parseEq();
    while (this.peek().text === "&") {
      this.advance();
      left = { t: "binary", op: "&", left, right: this.parseEq() };
    }
    return left;
  }

  private parseEq(): Expr {
    const left = this.parseAdd();
    if (this.peek().text === "==") {
      this.advance();
      return { t: "binary", op: "==", left, right: this.parseAdd() };
    }
    return left;
  }

  private parseAdd(): Expr {
    let left = this.parseUnary();
    while (this.peek().text === "+" || this.peek().text === "-") {
      const op = this.advance().text as "+" | "-";
      left = { t: "binary", op, left, right: this.parseUnary() };
    }
    return left;
  }

  private parseUnary(): Expr {
    const tok = this.peek();
    if (tok.text === "~" || tok.text === "-") {
      this.advance();
      return { t: "unary", op: tok.text as "~" | "-", operand: this.parseUnary() };
    }
    if (UNSUPPORTED_OPS.has(tok.text)) {
      throw unsupported(`operator '${tok.text}'`, tok.line, tok.col);
    }
    return this.parsePrimary();
  }

  private parsePrimary(): Expr {
    const tok = this.peek();
    if (UNSUPPORTED_OPS.has(tok.text)) {
      throw unsupported(`operator '${tok.text}'`, tok.line, tok.col);
    }
    if (tok.kind === "unsupported_kw") {
      throw unsupported(`keyword '${tok.text}'`, tok.line, tok.col);
    }
    if (tok.kind === "ident") {
      this.advance();
      if (this.peek().text === "[") {
        const nxt = this.peek();
        throw unsupported("bit/part select", nxt.line, nxt.col);
      }
      return { t: "ident", name: tok.text, line: tok.line, col: tok.col };
    }
    if (tok.kind === "sized") {
      this.advance();
      const { value, width } = parseSizedLiteral(tok);
      return { t: "literal", value, width };
    }
    if (tok.kind === "number") {
      this.advance();
      const value = BigInt(tok.text.replace(/_/g, ""));
      const width = value === 0n ? 1 : value.toString(2).length;
      return { t: "literal", value, width };
    }
    if (tok.text === "(") {
      this.advance();
      const inner = this.parseExpr();
      this.expect(")");
      return inner;
    }
    if (tok.text === "{") {
      this.advance();
      const parts = [this.parseExpr()];
      while (this.peek().text === ",") {
        this.advance();
        parts.push(this.parseExpr());
      }
      if (this.peek().text === "{") {
        const nxt = this.peek();
        throw unsupported("replication operator", nxt.line, nxt.col);
      }
      this.expect("}");
      return { t: "concat", parts };
    }
    this.fail(`expected expression, found '${tok.text}'`, tok);
  }

  private resolvePorts(
    moduleName: string,
    headerOrder: string[],
    ansiPorts: Map<string, Port>,
    bodyPorts: Map<string, Port>,
  ): Port[] {
    if (ansiPorts.size > 0) {
      if (bodyPorts.size > 0) {
        throw syntaxError(
          `module '${moduleName}' mixes ANSI and non-ANSI port declarations`);
      }
      return headerOrder.map((n) => ansiPorts.get(n)!);
    }
    const ports: Port[] = [];
    for (const n of headerOrder) {
      const port = bodyPorts.get(n);
      if (port === undefined) {
        throw syntaxError(
          `port '${n}' has no direction declaration in module '${moduleName}'`);
      }
      ports.push(port);
    }
    for (const n of bodyPorts.keys()) {
      if (!headerOrder.includes(n)) {
        throw syntaxError(
          `'${n}' declared as a port but missing from the port list of ` +
          `module '${moduleName}'`);
      }
    }
    return ports;
  }

  private checkReferences(ast: ModuleAst): void {
    const isReg = new Map<string, boolean>();
    for (const p of ast.ports) isReg.set(p.name, p.isReg);
    for (const n of ast.nets) isReg.set(n.name, n.isReg);

    const checkExpr = (expr: Expr): void => {
      switch (expr.t) {
        case "ident":
          if (!isReg.has(expr.name)) {
            throw unsupported(`implicit net '${expr.name}'`, expr.line, expr.col);
          }
          break;
        case "unary":
          checkExpr(expr.operand);
          break;
        case "binary":
          checkExpr(expr.left);
          checkExpr(expr.right);
          break;
        case "ternary":
          checkExpr(expr.cond);
          checkExpr(expr.then);
          checkExpr(expr.other);
          break;
        case "concat":
          expr.parts.forEach(checkExpr);
          break;
        default:
          break;
      }
    };

    for (const item of ast.items) {
      if (item.t === "assign") {
        if (!isReg.has(item.target)) {
          throw unsupported(`implicit net '${item.target}'`, item.line, 0);
        }
        if (isReg.get(item.target)) {
          throw syntaxError(`assign target '${item.target}' is a reg`, item.line, 0);
        }
        checkExpr(item.expr);
      } else if (item.t === "always") {
        for (const name of [item.clock, item.target]) {
          if (!isReg.has(name)) {
            throw unsupported(`implicit net '${name}'`, item.line, 0);
          }
        }
        if (!isReg.get(item.target)) {
          throw syntaxError(
            `nonblocking target '${item.target}' is not a reg`, item.line, 0);
        }
        checkExpr(item.expr);
      } else {
        for (const conn of item.conns) {
          if (conn.expr !== null) checkExpr(conn.expr);
        }
      }
    }
  }
}

export function parseSource(text: string): ModuleAst[] {
  return new Parser(text).parseSource();
}
