/** Seeded generator of subset programs for differential conformance testing.

Most generated files are valid; a configurable slice carries one seeded
defect per error class so classification parity gets exercised too.
*/

export interface FuzzFile {
  name: string;
  text: string;
}

/** mulberry32: tiny deterministic PRNG, same stream for every platform. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

class Rng {
  private next: () => number;

  constructor(seed: number) {
    this.next = mulberry32(seed);
  }

  int(maxExclusive: number): number {
    return Math.floor(this.next() * maxExclusive);
  }

  pick<T>(items: T[]): T {
    return items[this.int(items.length)];
  }

  chance(p: number): boolean {
    return this.next() < p;
  }
}

const WIDTHS = [1, 2, 3, 4, 7, 8, 12, 16, 24, 32];

interface Signal {
  name: string;
  width: number;
}

function genExpr(rng: Rng, signals: Signal[], depth: number): string {
  if (depth <= 0 || rng.chance(0.35)) {
    if (rng.chance(0.15)) {
      const width = rng.pick(WIDTHS);
      const value = rng.int(Math.min(2 ** Math.min(width, 16), 1024));
      return rng.chance(0.5) ? `${width}'d${value}` : `${value}`;
    }
    return rng.pick(signals).name;
  }
  const kind = rng.int(5);
  if (kind === 0) {
    return `(~${genExpr(rng, signals, depth - 1)})`;
  }
  if (kind === 1) {
    const op = rng.pick(["&", "|", "^", "+", "-"]);
    return `(${genExpr(rng, signals, depth - 1)} ${op} ` +
           `${genExpr(rng, signals, depth - 1)})`;
  }
  if (kind === 2) {
    return `(${genExpr(rng, signals, depth - 1)} == ` +
           `${genExpr(rng, signals, depth - 1)})`;
  }
  if (kind === 3) {
    return `(${genExpr(rng, signals, depth - 1)} ? ` +
           `${genExpr(rng, signals, depth - 1)} : ` +
           `${genExpr(rng, signals, depth - 1)})`;
  }
  return `{${genExpr(rng, signals, depth - 1)}, ` +
         `${genExpr(rng, signals, depth - 1)}}`;
}

function genModule(rng: Rng, name: string,
                   siblings: Array<{ name: string; ins: string[];
                                     outs: string[] }>): {
  text: string;
  decl: { name: string; ins: string[]; outs: string[] };
} {
  const nIn = 2 + rng.int(6);
  const nOut = 1 + rng.int(5);
  const nWire = 2 + rng.int(8);
  const range = (w: number): string => (w > 1 ? `[${w - 1}:0] ` : "");

  const ins: Signal[] = Array.from({ length: nIn }, (_, i) => ({
    name: `in${i}`, width: rng.pick(WIDTHS),
  }));
  const outs: Signal[] = Array.from({ length: nOut }, (_, i) => ({
    name: `out${i}`, width: rng.pick(WIDTHS),
  }));
  const wires: Signal[] = Array.from({ length: nWire }, (_, i) => ({
    name: `w${i}`, width: rng.pick(WIDTHS),
  }));

  const header = [
    ...ins.map((s) => `input ${range(s.width)}${s.name}`),
    ...outs.map((s) => `output ${range(s.width)}${s.name}`),
  ].join(", ");
  const lines = [`module ${name}(${header});`];
  for (const w of wires) lines.push(`  wire ${range(w.width)}${w.name};`);

  const readable: Signal[] = [...ins];
  // drive every wire, then every output, reading only already-driven nets
  for (const w of wires) {
    lines.push(`  assign ${w.name} = ${genExpr(rng, readable, 2)};`);
    readable.push(w);
  }
  const regOuts = new Set<string>();
  for (const out of outs) {
    if (rng.chance(0.2)) {
      // register output clocked by the first input
      regOuts.add(out.name);
      lines.push(`  always @(posedge ${ins[0].name}) ` +
                 `${out.name} <= ${genExpr(rng, readable, 2)};`);
    } else if (rng.chance(0.25) && siblings.length > 0) {
      const sib = rng.pick(siblings);
      const conns = [
        ...sib.ins.map((p) => `.${p}(${rng.pick(readable).name})`),
        `.${sib.outs[0]}(${out.name})`,
      ];
      lines.push(`  ${sib.name} u_${out.name} (${conns.join(", ")});`);
    } else {
      lines.push(`  assign ${out.name} = ${genExpr(rng, readable, 3)};`);
    }
  }
  const rendered = lines.join("\n") + "\nendmodule\n";
  const withReg = rendered.replace(
    new RegExp(`output (\\[[0-9]+:0\\] )?(${[...regOuts].join("|")})\\b`, "g"),
    (match) => match.replace("output ", "output reg "),
  );
  return {
    text: regOuts.size > 0 ? withReg : rendered,
    decl: {
      name,
      ins: ins.map((s) => s.name),
      outs: outs.map((s) => s.name),
    },
  };
}

const DEFECTS: Array<(text: string) => string> = [
  (text) => text.replace(";", ""),  // syntax: drop the first semicolon
  (text) => text.replace("endmodule", "assign ghost = in0;\nendmodule"),
  (text) => text.replace("endmodule",
    "always @(negedge in0) out0 <= in0;\nendmodule"),
  (text) => text.replace("endmodule", "assign out0 = in0;\nendmodule"),
  (text) => text.replace("assign", "assign out_x ="),  // garble
  (text) => text.replace("endmodule",
    "wire [3:0] sel_t;\nassign sel_t = in0[0];\nendmodule"),
];

/** Generate files until ~``moduleCount`` modules exist (2-5 per file). */
export function generateCorpus(moduleCount: number, seed: number,
                               defectEvery = 10): FuzzFile[] {
  const rng = new Rng(seed);
  const files: FuzzFile[] = [];
  let modules = 0;
  let i = 0;
  while (modules < moduleCount) {
    const siblings: Array<{ name: string; ins: string[]; outs: string[] }> = [];
    const perFile = Math.min(2 + rng.int(4), moduleCount - modules);
    const parts: string[] = [];
    for (let m = 0; m < perFile; m += 1) {
      const generated = genModule(rng, `mod_${i}_${m}`, siblings);
      parts.push(generated.text);
      siblings.push(generated.decl);
    }
    modules += perFile;
    let text = parts.join("\n");
    if (defectEvery > 0 && i % defectEvery === defectEvery - 1) {
      text = rng.pick(DEFECTS)(text);
    }
    files.push({ name: `fuzz_${String(i).padStart(4, "0")}.v`, text });
    i += 1;
  }
  return files;
}
