import { describe, expect, it } from "vitest";

import { buildStructure } from "../src/elaborate.js";
import { ExtractorError } from "../src/errors.js";
import { parseSource } from "../src/parser.js";
import { canonicalFloat, serializeGraph } from "../src/serialize.js";

function structure(text: string, index = 0) {
  const mods = parseSource(text);
  const registry = new Map(mods.map((m) => [m.name, m]));
  return buildStructure(mods[index], registry);
}

describe("elaboration", () => {
  it("builds the flip-flop graph", () => {
    const s = structure(
      "module ff(input clk, input d, output reg q);\n" +
      "  always @(posedge clk) q <= d;\nendmodule");
    expect(s.nodes.map((n) => [n.kind, n.opType])).toEqual([
      ["port_in", "port"], ["port_in", "port"], ["port_out", "port"],
      ["cell", "dff"],
    ]);
    expect(s.edges).toEqual([
      { src: 0, dst: 3, width: 1 },
      { src: 1, dst: 3, width: 1 },
      { src: 3, dst: 2, width: 1 },
    ]);
  });

  it("allows register feedback", () => {
    const s = structure(
      "module c(input clk, output reg [3:0] q);\n" +
      "  always @(posedge clk) q <= q + 1;\nendmodule");
    const dff = s.nodes.find((n) => n.opType === "dff")!;
    const add = s.nodes.find((n) => n.opType === "add")!;
    expect(s.edges.some((e) => e.src === dff.id && e.dst === add.id)).toBe(true);
  });

  it("resolves instance directions from the same-file registry", () => {
    const s = structure(
      "module leaf(input i, output o); assign o = ~i; endmodule\n" +
      "module top(input x, output z);\n  wire t;\n" +
      "  leaf u1 (.i(x), .o(t));\n  leaf u2 (t, z);\nendmodule", 1);
    const cells = s.nodes.filter((n) => n.kind === "cell");
    expect(cells.map((c) => c.opType)).toEqual(["leaf", "leaf"]);
  });

  it.each([
    ["module m(input a, output y); endmodule", "never driven"],
    ["module m(input a, output y); wire t; assign y = t; endmodule",
     "never driven"],
    ["module m(input a, output y); assign y = a; assign y = a; endmodule",
     "driven by both"],
    ["module m(input a, output y); wire p, q;\n  assign p = q;\n" +
     "  assign q = p;\n  assign y = p; endmodule", "combinational loop"],
    ["module m(input a, output y); assign a = y; endmodule",
     "drives input port"],
  ])("rejects bad structures: %s", (text, message) => {
    expect(() => structure(text)).toThrowError(message);
  });

  it("classifies unknown instance modules as unsupported", () => {
    try {
      structure("module top(input x, output z);\n" +
                "  ghost u (.a(x), .y(z));\nendmodule");
      throw new Error("expected failure");
    } catch (err) {
      expect((err as ExtractorError).kind).toBe("unsupported");
    }
  });

  it("serializes with the schema key order and canonical floats", () => {
    const s = structure(
      "module b(input [7:0] a, output [7:0] y); assign y = a; endmodule");
    const line = serializeGraph(s, "ab".repeat(32), 8);
    const record = JSON.parse(line);
    expect(Object.keys(record)).toEqual(
      ["schema_version", "module_name", "source_sha256", "nodes", "edges"]);
    expect(line).toContain('"width_norm":1.0');
  });
});

describe("canonical floats", () => {
  it.each([
    [1.0, "1.0"],
    [0.25, "0.25"],
    [1 / 64, "0.015625"],
    [1 / 3, "0.333333"],
    [25 / 128, "0.195312"],  // ties round to even, like printf %g
    [27 / 128, "0.210938"],
    [1e-7, "1e-07"],
  ])("formats %d as %s", (value, text) => {
    expect(canonicalFloat(value)).toBe(text);
  });
});
