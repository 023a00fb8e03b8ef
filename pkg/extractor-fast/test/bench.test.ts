/** Throughput acceptance: at least 10x the reference on 1000 modules. */

import { execFileSync } from "node:child_process";
import { mkdirSync, mkdtempSync, readFileSync, rmSync,
         writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import { generateCorpus } from "../src/fuzz.js";

const work = mkdtempSync(join(tmpdir(), "bench-"));
afterAll(() => rmSync(work, { recursive: true, force: true }));

describe("bench", () => {
  it("reports >= 10x reference throughput and embeds the parity check", () => {
    const root = join(work, "corpus");
    mkdirSync(root, { recursive: true });
    // defect-free corpus: the benchmark measures extraction, not skipping
    generateCorpus(1000, 7, 0).forEach((file) => {
      writeFileSync(join(root, file.name), file.text);
    });
    const cli = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
    const reportFile = join(work, "report.json");
    execFileSync("node", [cli, "bench", "--in", root, "--out", reportFile],
                 { stdio: ["ignore", "ignore", "pipe"] });
    const report = JSON.parse(readFileSync(reportFile, "utf-8"));
    expect(report.parse_equal).toBe(true);
    expect(report.modules).toBeGreaterThanOrEqual(1000);
    expect(report.fast_modules_per_sec).toBeGreaterThan(0);
    expect(report.speedup).toBeGreaterThanOrEqual(10.0);
  }, 120_000);

  it("records a timing sample for a single module", () => {
    const root = join(work, "single");
    mkdirSync(root, { recursive: true });
    writeFileSync(join(root, "one.v"),
                  "module one(input a, output y); assign y = a; endmodule\n");
    const cli = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
    const reportFile = join(work, "single.json");
    execFileSync("node", [cli, "bench", "--in", root, "--out", reportFile],
                 { stdio: ["ignore", "ignore", "pipe"] });
    const report = JSON.parse(readFileSync(reportFile, "utf-8"));
    expect(report.modules).toBe(1);
    expect(report.fast_seconds).toBeGreaterThan(0);
    expect(report.parse_equal).toBe(true);
  }, 60_000);
});
