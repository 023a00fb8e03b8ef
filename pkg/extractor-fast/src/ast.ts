/** AST types for the supported subset. */

export interface Port {
  name: string;
  direction: "in" | "out" | "inout";
  width: number;
  isReg: boolean;
}

export interface Net {
  name: string;
  width: number;
  isReg: boolean;
}

export type Expr =
  | { t: "ident"; name: string; line: number; col: number }
  | { t: "literal"; value: bigint; width: number }
  | { t: "unary"; op: "~" | "-"; operand: Expr }
  | { t: "binary"; op: "&" | "|" | "^" | "+" | "-" | "=="; left: Expr; right: Expr }
  | { t: "ternary"; cond: Expr; then: Expr; other: Expr }
  | { t: "concat"; parts: Expr[] };

export type Item =
  | { t: "assign"; target: string; expr: Expr; line: number }
  | { t: "always"; clock: string; target: string; expr: Expr; line: number }
  | {
      t: "instance";
      moduleName: string;
      instanceName: string;
      conns: Array<{ port: string | null; expr: Expr | null }>;
      line: number;
    };

export interface ModuleAst {
  name: string;
  ports: Port[];
  nets: Net[];
  items: Item[];
}

export function signalWidth(ast: ModuleAst, name: string): number | null {
  for (const p of ast.ports) if (p.name === name) return p.width;
  for (const n of ast.nets) if (n.name === name) return n.width;
  return null;
}
