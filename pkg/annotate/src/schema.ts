/**
 * The corpus JSONL contract shared with the summarizer.
 *
 * One JSON object per line. Span and arc indices refer to the consumer's
 * tokenization of the findings text (see tokenize.ts), end exclusive.
 */

import { z } from "zod";
import { tokenize } from "./tokenize.js";

export const ENTITY_TYPES = [
  "anatomy",
  "observation",
  "anatomy_modifier",
  "observation_modifier",
  "uncertainty",
] as const;

export type EntityType = (typeof ENTITY_TYPES)[number];

export interface EntitySpan {
  start: number;
  end: number;
  type: EntityType;
  target: number | null;
}

export interface DependencyArc {
  head: number;
  dep: number;
  label: string;
}

export interface CorpusRow {
  id: string;
  findings: string;
  impression: string;
  entities: EntitySpan[];
  deps: DependencyArc[];
}

const index = z.number().int().min(0);

export const entitySpanSchema = z
  .object({
    start: index,
    end: z.number().int().min(1),
    type: z.enum(ENTITY_TYPES),
    target: z.number().int().min(0).nullable(),
  })
  .refine((s) => s.end > s.start, { message: "span end must exceed start" });

export const dependencyArcSchema = z.object({
  head: index,
  dep: index,
  label: z.string().min(1),
});

export const corpusRowSchema = z.object({
  id: z.string().min(1),
  findings: z.string().min(1),
  impression: z.string(),
  entities: z.array(entitySpanSchema),
  deps: z.array(dependencyArcSchema),
});

/**
 * Contract checks zod cannot express: every index must land inside the
 * tokenized findings, and span targets must point at real span positions.
 * Returns human-readable problems, empty when the row is sound.
 */
export function checkRow(row: CorpusRow): string[] {
  const problems: string[] = [];
  const n = tokenize(row.findings).length;
  row.entities.forEach((s, i) => {
    if (s.end > n) problems.push(`entity ${i} runs past ${n} tokens`);
    if (s.target !== null && (s.target < 0 || s.target >= row.entities.length))
      problems.push(`entity ${i} targets missing span ${s.target}`);
  });
  row.deps.forEach((a, i) => {
    if (a.head >= n || a.dep >= n) problems.push(`arc ${i} runs past ${n} tokens`);
  });
  return problems;
}

/** Parse and fully validate one JSONL line. Throws on any violation. */
export function parseRow(line: string): CorpusRow {
  const row = corpusRowSchema.parse(JSON.parse(line)) as CorpusRow;
  const problems = checkRow(row);
  if (problems.length > 0) throw new Error(problems.join("; "));
  return row;
}
