/** JSON-lines IO with provenance-record handling and atomic writes. */
import * as fs from "fs";
import * as path from "path";

import { PROVENANCE_KEY } from "./schema";

export function readJsonl(filePath: string): unknown[] {
  const records: unknown[] = [];
  const body = fs.readFileSync(filePath, "utf-8");
  body.split("\n").forEach((line, i) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let record: unknown;
    try {
      record = JSON.parse(trimmed);
    } catch (err) {
      throw new Error(`${filePath}:${i + 1}: invalid JSON: ${err}`);
    }
    if (record && typeof record === "object" && PROVENANCE_KEY in (record as object)) {
      return;
    }
    records.push(record);
  });
  return records;
}

/** Stable serialization: keys sorted, so reruns are byte-identical. */
export function stableStringify(value: unknown): string {
  return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function writeJsonlAtomic(
  filePath: string,
  records: unknown[],
  provenance?: Record<string, unknown>,
): void {
  const dir = path.dirname(filePath) || ".";
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.tmp-${path.basename(filePath)}-${process.pid}`);
  const lines: string[] = [];
  if (provenance) {
    lines.push(stableStringify({ [PROVENANCE_KEY]: provenance }));
  }
  for (const record of records) {
    lines.push(stableStringify(record));
  }
  fs.writeFileSync(tmp, lines.join("\n") + "\n");
  fs.renameSync(tmp, filePath);
}
