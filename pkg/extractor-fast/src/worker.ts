/** Worker-thread entry.

Chunked two-phase protocol: a "structure" request parses and elaborates a
contiguous range of files, retaining structures worker-side and answering
with the chunk's maximum width plus any skip records; a "serialize"
request streams back the chunk's canonical JSON lines once the
corpus-wide width is known.
*/

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { parentPort } from "node:worker_threads";

import { FileResult, SkipRecord, processFileText } from "./extract.js";
import { serializeGraph } from "./serialize.js";

const retained = new Map<number, Array<FileResult | null>>();

type Request =
  | { op: "structure"; chunk: number; root: string; rels: string[] }
  | { op: "serialize"; chunk: number; wMax: number };

parentPort!.on("message", (msg: Request) => {
  if (msg.op === "structure") {
    const kept: Array<FileResult | null> = [];
    const skips: SkipRecord[] = [];
    let maxWidth = 1;
    for (const rel of msg.rels) {
      const text = readFileSync(join(msg.root, rel), "utf-8");
      const result = processFileText(rel, text);
      if ("error_kind" in result) {
        skips.push(result);
        kept.push(null);
      } else {
        kept.push(result);
        maxWidth = Math.max(maxWidth, result.maxWidth);
      }
    }
    retained.set(msg.chunk, kept);
    parentPort!.postMessage({ chunk: msg.chunk, maxWidth, skips });
    return;
  }
  const kept = retained.get(msg.chunk)!;
  retained.delete(msg.chunk);
  const lines: string[] = [];
  for (const file of kept) {
    if (file === null) continue;
    for (const structure of file.structures) {
      lines.push(serializeGraph(structure, file.sha256, msg.wMax));
    }
  }
  parentPort!.postMessage({ chunk: msg.chunk, lines });
});
