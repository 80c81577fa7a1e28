/**
 * Raw report readers and the corpus JSONL writer.
 *
 * Two raw formats: JSONL rows {"id", "findings", "impression"} or plain
 * text blocks separated by blank lines,
 *
 *   ID: r-0001
 *   FINDINGS: text, may
 *     continue on following lines
 *   IMPRESSION: text
 *
 * Keys are case-insensitive. A block with no ID gets a positional one.
 */

import { readFileSync, writeFileSync } from "node:fs";
import type { RawReport } from "./annotate.js";
import type { CorpusRow } from "./schema.js";

export class RawFormatError extends Error {}

const KEY = /^(id|findings|impression)\s*:\s*(.*)$/i;

export function parseRawText(text: string): RawReport[] {
  const reports: RawReport[] = [];
  const blocks = text.split(/\n\s*\n/).filter((b) => b.trim() !== "");
  blocks.forEach((block, bi) => {
    const fields: Record<string, string> = { id: "", findings: "", impression: "" };
    let current: string | null = null;
    for (const line of block.split("\n")) {
      const m = line.match(KEY);
      if (m) {
        current = m[1]!.toLowerCase();
        fields[current] = m[2]!;
      } else if (current !== null) {
        fields[current] = (fields[current] + " " + line.trim()).trim();
      } else if (line.trim() !== "") {
        throw new RawFormatError(`block ${bi + 1}: stray line before any key: "${line.trim()}"`);
      }
    }
    reports.push({
      id: fields.id || `report-${String(bi + 1).padStart(4, "0")}`,
      findings: fields.findings ?? "",
      impression: fields.impression ?? "",
    });
  });
  return reports;
}

export function parseRawJsonl(text: string): RawReport[] {
  const reports: RawReport[] = [];
  text.split("\n").forEach((line, i) => {
    if (line.trim() === "") return;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (e) {
      throw new RawFormatError(`line ${i + 1}: not JSON (${(e as Error).message})`);
    }
    const rec = obj as Partial<Record<"id" | "findings" | "impression", unknown>>;
    if (typeof rec.id !== "string" || rec.id === "")
      throw new RawFormatError(`line ${i + 1}: missing id`);
    reports.push({
      id: rec.id,
      findings: typeof rec.findings === "string" ? rec.findings : "",
      impression: typeof rec.impression === "string" ? rec.impression : "",
    });
  });
  return reports;
}

export function readRawReports(path: string, format?: "text" | "jsonl"): RawReport[] {
  const text = readFileSync(path, "utf-8");
  const fmt = format ?? (path.endsWith(".jsonl") || path.endsWith(".json") ? "jsonl" : "text");
  return fmt === "jsonl" ? parseRawJsonl(text) : parseRawText(text);
}

/** Stable field order so reruns are byte-identical. */
export function rowToJson(row: CorpusRow): string {
  return JSON.stringify({
    id: row.id,
    findings: row.findings,
    impression: row.impression,
    entities: row.entities.map((s) => ({
      start: s.start,
      end: s.end,
      type: s.type,
      target: s.target,
    })),
    deps: row.deps.map((a) => ({ head: a.head, dep: a.dep, label: a.label })),
  });
}

export function writeCorpus(rows: CorpusRow[], path: string): void {
  writeFileSync(path, rows.map((r) => rowToJson(r) + "\n").join(""), "utf-8");
}
