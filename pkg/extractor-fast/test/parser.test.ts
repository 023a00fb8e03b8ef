import { describe, expect, it } from "vitest";

import { ExtractorError } from "../src/errors.js";
import { parseSource } from "../src/parser.js";

function errorKind(text: string): string {
  try {
    parseSource(text);
    return "ok";
  } catch (err) {
    if (err instanceof ExtractorError) return err.kind;
    throw err;
  }
}

describe("parser", () => {
  it("parses the flip-flop fixture", () => {
    const mods = parseSource(
      "module ff (clk, d, q);\n  input clk, d;\n  output reg q;\n" +
      "  always @(posedge clk) begin q <= d; end\nendmodule\n");
    expect(mods).toHaveLength(1);
    expect(mods[0].ports.map((p) => [p.name, p.direction])).toEqual(
      [["clk", "in"], ["d", "in"], ["q", "out"]]);
    expect(mods[0].items).toHaveLength(1);
  });

  it("keeps modules in source order", () => {
    const mods = parseSource(
      "module a(input x, output y); assign y = x; endmodule\n" +
      "module b(input x, output y); assign y = ~x; endmodule\n");
    expect(mods.map((m) => m.name)).toEqual(["a", "b"]);
  });

  it("applies operator precedence", () => {
    const mods = parseSource(
      "module m(input a, input b, input c, output y);\n" +
      "  assign y = a | b & c;\nendmodule");
    const item = mods[0].items[0];
    expect(item.t).toBe("assign");
    if (item.t === "assign" && item.expr.t === "binary") {
      expect(item.expr.op).toBe("|");
    } else {
      throw new Error("expected binary expression");
    }
  });

  it("classifies the empty string as a syntax error", () => {
    expect(errorKind("")).toBe("syntax");
    expect(errorKind("   \n ")).toBe("syntax");
  });

  it.each([
    ["module m(input a, output y); assign y = a * a; endmodule"],
    ["module m(input a, output reg y); always @(negedge a) y <= a; endmodule"],
    ["module m(input a, output reg y); always @(posedge a) y = a; endmodule"],
    ["module m(input [3:0] a, output y); assign y = a[2]; endmodule"],
    ["module m; initial begin end endmodule"],
    ["module m(input a, output y); parameter W = 2; assign y = a; endmodule"],
    ["`define X 1\nmodule m(input a, output y); assign y = a; endmodule"],
    ["module m(input a, output y); assign y = ghost; endmodule"],
    ["module m(input [0:3] a, output y); assign y = a; endmodule"],
    ["module m(input a, output y); assign y = 2'bx1; endmodule"],
  ])("classifies outside-subset constructs: %s", (text) => {
    expect(errorKind(text)).toBe("unsupported");
  });

  it.each([
    ["module m(input a, output y); assign y = a endmodule"],
    ["module m(input a, input a, output y); assign y = a; endmodule"],
    ["module m(a, y); input a; assign y = a; endmodule"],
    ["module m(input a, output reg y); assign y = a; endmodule"],
    ["module m(input a, output y); always @(posedge a) y <= a; endmodule"],
    ["nonsense"],
  ])("classifies malformed input: %s", (text) => {
    expect(errorKind(text)).toBe("syntax");
  });

  it("reports line and column on syntax errors", () => {
    try {
      parseSource("module m(input a, output y);\n  assign y = ;\nendmodule");
      throw new Error("expected failure");
    } catch (err) {
      expect(err).toBeInstanceOf(ExtractorError);
      expect((err as ExtractorError).line).toBe(2);
    }
  });
});
