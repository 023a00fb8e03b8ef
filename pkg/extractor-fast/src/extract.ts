/** Batch extraction: directory walk, two-phase width normalization, manifest. */

import { createHash } from "node:crypto";
import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { ModuleAst } from "./ast.js";
import { ExtractorError } from "./errors.js";
import { GraphStructure, buildStructure, maxEdgeWidth } from "./elaborate.js";
import { parseSource } from "./parser.js";
import { serializeGraph } from "./serialize.js";

export const MANIFEST_SCHEMA_VERSION = 1;
// threshold estimates can never reach: the documented keep-all value
export const KEEP_ALL_DEDUP = { threshold: 1.1, num_hashes: 256, seed: 0 };

export interface SkipRecord {
  path: string;
  error_kind: string;
  message: string;
}

export interface FileResult {
  path: string;
  sha256: string;
  structures: GraphStructure[];
  maxWidth: number;
}

export interface ExtractionOutput {
  lines: string[];
  manifest: {
    schema_version: number;
    w_max: number;
    num_graphs: number;
    dedup: typeof KEEP_ALL_DEDUP;
  };
  skipped: SkipRecord[];
}

/** All .v files under root, sorted by relative POSIX path string. */
export function collectFiles(root: string): string[] {
  const found: string[] = [];
  const walk = (dir: string, rel: string): void => {
    for (const entry of readdirSync(dir, { withFileTypes: true })) {
      const relPath = rel === "" ? entry.name : `${rel}/${entry.name}`;
      if (entry.isDirectory()) {
        walk(join(dir, entry.name), relPath);
      } else if (entry.name.endsWith(".v")) {
        found.push(relPath);
      }
    }
  };
  walk(root, "");
  found.sort();
  return found;
}

export function processFileText(relPath: string, text: string):
  FileResult | SkipRecord {
  if (text.trim() === "") {
    return { path: relPath, error_kind: "syntax", message: "empty file" };
  }
  const sha256 = createHash("sha256").update(text, "utf-8").digest("hex");
  let modules: ModuleAst[];
  try {
    modules = parseSource(text);
  } catch (err) {
    return toSkip(relPath, err);
  }
  const registry = new Map(modules.map((m) => [m.name, m]));
  try {
    const structures = modules.map((m) => buildStructure(m, registry));
    const maxWidth = structures.reduce(
      (acc, s) => Math.max(acc, maxEdgeWidth(s)), 1);
    return { path: relPath, sha256, structures, maxWidth };
  } catch (err) {
    return toSkip(relPath, err);
  }
}

function toSkip(relPath: string, err: unknown): SkipRecord {
  if (err instanceof ExtractorError) {
    return { path: relPath, error_kind: err.kind, message: err.message };
  }
  throw err;
}

export function assemble(results: Array<FileResult | SkipRecord>):
  ExtractionOutput {
  const skipped: SkipRecord[] = [];
  const files: FileResult[] = [];
  for (const result of results) {
    if ("error_kind" in result) {
      skipped.push(result);
    } else {
      files.push(result);
    }
  }
  const wMax = files.reduce((acc, f) => Math.max(acc, f.maxWidth), 1);
  const lines: string[] = [];
  for (const file of files) {
    for (const structure of file.structures) {
      lines.push(serializeGraph(structure, file.sha256, wMax));
    }
  }
  return {
    lines,
    manifest: {
      schema_version: MANIFEST_SCHEMA_VERSION,
      w_max: wMax,
      num_graphs: lines.length,
      dedup: KEEP_ALL_DEDUP,
    },
    skipped,
  };
}

export function extractDirSync(root: string): ExtractionOutput {
  const results = collectFiles(root).map((rel) =>
    processFileText(rel, readFileSync(join(root, rel), "utf-8")));
  return assemble(results);
}
