/** Module AST to data-path graph, following the normative elaboration rules.

Hot path: signal references are encoded as integers (node id when >= 0,
otherwise -(netId + 1)) and edge requests live in parallel flat arrays, so
elaboration allocates almost nothing beyond the node records themselves.
*/

import { Expr, Item, ModuleAst, signalWidth } from "./ast.js";
import { elaborationError, unsupported } from "./errors.js";

export interface GraphNode {
  id: number;
  kind: "port_in" | "port_out" | "cell" | "const";
  opType: string;
  ioType: string | null;
  portNames: string[];
  params: Array<[string, string]>;
}

export interface RawEdge {
  src: number;
  dst: number;
  width: number;
}

export interface GraphStructure {
  moduleName: string;
  nodes: GraphNode[];
  edges: RawEdge[];
}

const BINARY_OPS: Record<string, string> = {
  "&": "and", "|": "or", "^": "xor", "+": "add", "-": "sub", "==": "eq",
};
const UNARY_OPS: Record<string, string> = { "~": "not", "-": "neg" };

const NO_DRIVER = -0x7fffffff;

class Builder {
  nodes: GraphNode[] = [];
  reqSrc: number[] = [];
  reqDst: number[] = [];
  reqWidth: number[] = [];
  private netIds = new Map<string, number>();
  private netNames: string[] = [];
  private netDriver: number[] = [];
  private netDriverDesc: string[] = [];
  private widths = new Map<string, number>();

  constructor(readonly ast: ModuleAst) {
    for (const p of ast.ports) this.widths.set(p.name, p.width);
    for (const n of ast.nets) this.widths.set(n.name, n.width);
  }

  netRef(name: string): number {
    let id = this.netIds.get(name);
    if (id === undefined) {
      id = this.netNames.length;
      this.netIds.set(name, id);
      this.netNames.push(name);
      this.netDriver.push(NO_DRIVER);
      this.netDriverDesc.push("");
    }
    return -(id + 1);
  }

  addNode(
    kind: GraphNode["kind"],
    opType: string,
    ioType: string | null = null,
    portNames: string[] = [],
    params: Array<[string, string]> = [],
  ): number {
    const id = this.nodes.length;
    this.nodes.push({ id, kind, opType, ioType, portNames, params });
    return id;
  }

  request(src: number, dst: number, width: number): void {
    this.reqSrc.push(src);
    this.reqDst.push(dst);
    this.reqWidth.push(width);
  }

  setDriver(net: string, ref: number, what: string): void {
    const id = -this.netRef(net) - 1;
    if (this.netDriver[id] !== NO_DRIVER) {
      throw elaborationError(
        `net '${net}' driven by both ${this.netDriverDesc[id]} and ${what}`);
    }
    this.netDriver[id] = ref;
    this.netDriverDesc[id] = what;
  }

  hasDriver(net: string): boolean {
    const id = -this.netRef(net) - 1;
    return this.netDriver[id] !== NO_DRIVER;
  }

  widthOfName(name: string): number {
    return this.widths.get(name)!;
  }

  /** Width of the most recently emitted expression. */
  lastWidth = 0;

  /** Create operator/const nodes post-order; returns the producing ref.
   * The expression's width lands in ``lastWidth`` to avoid tuple churn. */
  emitExpr(expr: Expr): number {
    switch (expr.t) {
      case "ident": {
        this.lastWidth = this.widthOfName(expr.name);
        return this.netRef(expr.name);
      }
      case "literal": {
        const id = this.addNode("const", "const", null, [],
          [["value", expr.value.toString(10)]]);
        this.lastWidth = expr.width;
        return id;
      }
      case "unary": {
        const ref = this.emitExpr(expr.operand);
        const width = this.lastWidth;
        const id = this.addNode("cell", UNARY_OPS[expr.op], null, ["a", "y"]);
        this.request(ref, id, width);
        this.lastWidth = width;
        return id;
      }
      case "binary": {
        const left = this.emitExpr(expr.left);
        const leftWidth = this.lastWidth;
        const right = this.emitExpr(expr.right);
        const rightWidth = this.lastWidth;
        const id = this.addNode("cell", BINARY_OPS[expr.op], null,
          ["a", "b", "y"]);
        this.request(left, id, leftWidth);
        this.request(right, id, rightWidth);
        this.lastWidth = expr.op === "=="
          ? 1
          : Math.max(leftWidth, rightWidth);
        return id;
      }
      case "ternary": {
        const cond = this.emitExpr(expr.cond);
        const condWidth = this.lastWidth;
        const then = this.emitExpr(expr.then);
        const thenWidth = this.lastWidth;
        const other = this.emitExpr(expr.other);
        const otherWidth = this.lastWidth;
        const id = this.addNode("cell", "mux", null, ["sel", "a", "b", "y"]);
        this.request(cond, id, condWidth);
        this.request(then, id, thenWidth);
        this.request(other, id, otherWidth);
        this.lastWidth = Math.max(thenWidth, otherWidth);
        return id;
      }
      case "concat": {
        const refs: number[] = [];
        const widths: number[] = [];
        for (const part of expr.parts) {
          refs.push(this.emitExpr(part));
          widths.push(this.lastWidth);
        }
        const names = refs.map((_, i) => `i${i}`);
        names.push("y");
        const id = this.addNode("cell", "concat", null, names);
        let total = 0;
        for (let i = 0; i < refs.length; i += 1) {
          this.request(refs[i], id, widths[i]);
          total += widths[i];
        }
        this.lastWidth = total;
        return id;
      }
    }
  }

  resolve(ref: number): number {
    let guard = 0;
    const limit = this.netNames.length + 1;
    while (ref < 0) {
      const id = -ref - 1;
      guard += 1;
      if (guard > limit) {
        throw elaborationError(
          `combinational loop through net '${this.netNames[id]}'`);
      }
      const driver = this.netDriver[id];
      if (driver === NO_DRIVER) {
        throw elaborationError(
          `net '${this.netNames[id]}' is read but never driven`);
      }
      ref = driver;
    }
    return ref;
  }
}

function emitInstance(
  b: Builder,
  item: Extract<Item, { t: "instance" }>,
  portDirs: Map<string, string>,
  registry: Map<string, ModuleAst>,
): void {
  const target = registry.get(item.moduleName);
  if (target === undefined) {
    throw unsupported(
      `instance of unknown module '${item.moduleName}'`, item.line, 0);
  }
  const targetPorts = new Map(target.ports.map((p) => [p.name, p]));

  const conns: Array<{ port: string; expr: Expr | null }> = [];
  if (item.conns.length > 0 && item.conns[0].port === null) {
    if (item.conns.length > target.ports.length) {
      throw elaborationError(
        `instance '${item.instanceName}' has more connections than module ` +
        `'${item.moduleName}' has ports`);
    }
    item.conns.forEach((conn, i) => {
      conns.push({ port: target.ports[i].name, expr: conn.expr });
    });
  } else {
    for (const conn of item.conns) {
      if (!targetPorts.has(conn.port!)) {
        throw elaborationError(
          `module '${item.moduleName}' has no port '${conn.port}'`);
      }
      conns.push({ port: conn.port!, expr: conn.expr });
    }
  }

  const inputRefs: number[] = [];
  const inputWidths: number[] = [];
  const outputNets: string[] = [];
  const connected: string[] = [];
  for (const { port, expr } of conns) {
    if (expr === null) continue;
    const targetPort = targetPorts.get(port)!;
    connected.push(port);
    if (targetPort.direction === "inout") {
      throw unsupported(`connection to inout port '${port}'`, item.line, 0);
    }
    if (targetPort.direction === "in") {
      inputRefs.push(b.emitExpr(expr));
      inputWidths.push(b.lastWidth);
    } else {
      if (expr.t !== "ident") {
        throw elaborationError(
          `output port '${port}' of instance '${item.instanceName}' must ` +
          `connect to a plain net`);
      }
      if (portDirs.get(expr.name) === "in") {
        throw elaborationError(
          `instance output drives input port '${expr.name}'`);
      }
      outputNets.push(expr.name);
    }
  }

  const id = b.addNode("cell", item.moduleName, null, connected);
  for (let i = 0; i < inputRefs.length; i += 1) {
    b.request(inputRefs[i], id, inputWidths[i]);
  }
  for (const net of outputNets) {
    b.setDriver(net, id, `instance '${item.instanceName}'`);
  }
}

function rejectCombinationalCycles(
  nodes: GraphNode[],
  edges: RawEdge[],
  moduleName: string,
): void {
  const n = nodes.length;
  const adj: number[][] = Array.from({ length: n }, () => []);
  const indeg = new Array<number>(n).fill(0);
  for (const e of edges) {
    if (nodes[e.src].opType === "dff") continue;
    adj[e.src].push(e.dst);
    indeg[e.dst] += 1;
  }
  const queue: number[] = [];
  for (let i = 0; i < n; i += 1) if (indeg[i] === 0) queue.push(i);
  let visited = 0;
  while (queue.length > 0) {
    const u = queue.pop()!;
    visited += 1;
    for (const v of adj[u]) {
      indeg[v] -= 1;
      if (indeg[v] === 0) queue.push(v);
    }
  }
  if (visited !== n) {
    throw elaborationError(`combinational loop in module '${moduleName}'`);
  }
}

export function buildStructure(
  ast: ModuleAst,
  registry: Map<string, ModuleAst>,
): GraphStructure {
  const b = new Builder(ast);
  const portDirs = new Map(ast.ports.map((p) => [p.name, p.direction]));
  const portNode = new Map<string, number>();

  for (const p of ast.ports) {
    if (p.direction === "inout") {
      throw unsupported(`inout port '${p.name}'`);
    }
    const kind = p.direction === "in" ? "port_in" : "port_out";
    const io = p.direction === "in" ? "input" : "output";
    const id = b.addNode(kind, "port", io, [p.name]);
    portNode.set(p.name, id);
    if (p.direction === "in") {
      b.setDriver(p.name, id, `input port '${p.name}'`);
    }
  }

  for (const item of ast.items) {
    if (item.t === "assign") {
      if (portDirs.get(item.target) === "in") {
        throw elaborationError(`assign drives input port '${item.target}'`);
      }
      const ref = b.emitExpr(item.expr);
      b.setDriver(item.target, ref, `assign at line ${item.line}`);
    } else if (item.t === "always") {
      if (portDirs.get(item.target) === "in") {
        throw elaborationError(
          `register update drives input port '${item.target}'`);
      }
      const rhs = b.emitExpr(item.expr);
      const rhsWidth = b.lastWidth;
      const id = b.addNode("cell", "dff", null, ["clk", "d", "q"]);
      b.request(b.netRef(item.clock), id, b.widthOfName(item.clock));
      b.request(rhs, id, rhsWidth);
      b.setDriver(item.target, id, `register at line ${item.line}`);
    } else {
      emitInstance(b, item, portDirs, registry);
    }
  }

  for (const p of ast.ports) {
    if (p.direction !== "out") continue;
    if (!b.hasDriver(p.name)) {
      throw elaborationError(`output port '${p.name}' is never driven`);
    }
    b.request(b.netRef(p.name), portNode.get(p.name)!, p.width);
  }

  if (b.nodes.length === 0) {
    throw elaborationError(
      `module '${ast.name}' elaborates to an empty graph`);
  }

  const edges: RawEdge[] = new Array(b.reqSrc.length);
  for (let i = 0; i < b.reqSrc.length; i += 1) {
    edges[i] = {
      src: b.resolve(b.reqSrc[i]),
      dst: b.reqDst[i],
      width: b.reqWidth[i],
    };
  }
  rejectCombinationalCycles(b.nodes, edges, ast.name);
  return { moduleName: ast.name, nodes: b.nodes, edges };
}

export function maxEdgeWidth(structure: GraphStructure): number {
  return structure.edges.reduce((acc, e) => Math.max(acc, e.width), 1);
}
