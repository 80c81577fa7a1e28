/**
 * The annotation pipeline: raw report text in, corpus row out.
 *
 * Tagging comes from an engine (bundled lexicon or an external command),
 * then this module maps tags onto the five entity types, resolves which
 * entity each modifier talks about, and derives dependency arcs. Arcs are
 * a deliberately small heuristic: compounds inside multiword terms plus
 * modifier attachments. Nothing here trains or bundles a model.
 */

import type { CorpusRow, DependencyArc, EntitySpan, EntityType } from "./schema.js";
import type { TagMap, TaggedSpan } from "./lexicon.js";
import { sentenceRanges, tokenize } from "./tokenize.js";

export interface RawReport {
  id: string;
  findings: string;
  impression: string;
}

/** What any tagging engine must produce for one findings token sequence. */
export interface EngineOutput {
  spans: TaggedSpan[];
  /** Arcs the engine already knows (external parsers provide these). */
  arcs?: DependencyArc[];
}

export type Engine = (tokens: readonly string[]) => EngineOutput;

const MODIFIER_BASE: Partial<Record<EntityType, EntityType>> = {
  anatomy_modifier: "anatomy",
  observation_modifier: "observation",
  uncertainty: "observation",
};

// negation cues read better as neg than amod
const ARC_LABELS: Record<string, string> = { no: "neg", without: "neg" };

function mapSpans(tagged: TaggedSpan[], tagMap: TagMap): EntitySpan[] {
  const spans: EntitySpan[] = [];
  for (const t of tagged) {
    if (!tagMap.has(t.tag)) throw new Error(`tag map has no entry for tag "${t.tag}"`);
    const type = tagMap.get(t.tag)!;
    if (type === null) continue;
    spans.push({ start: t.start, end: t.end, type, target: null });
  }
  return spans;
}

function sentenceOf(ranges: Array<[number, number]>, pos: number): [number, number] {
  for (const r of ranges) if (pos >= r[0] && pos < r[1]) return r;
  return [0, Number.MAX_SAFE_INTEGER];
}

/** Token gap between spans, 0 when they touch or overlap. */
function gap(a: EntitySpan, b: EntitySpan): number {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

/**
 * Point each modifier at the nearest same-sentence entity of its base
 * type. Ties go to the earlier span. Modifiers with no candidate keep a
 * null target and contribute no arc.
 */
export function resolveTargets(spans: EntitySpan[], tokens: readonly string[]): void {
  const ranges = sentenceRanges(tokens);
  spans.forEach((mod, i) => {
    const base = MODIFIER_BASE[mod.type];
    if (!base) return;
    const [lo, hi] = sentenceOf(ranges, mod.start);
    let best = -1;
    let bestGap = Infinity;
    spans.forEach((cand, j) => {
      if (j === i || cand.type !== base) return;
      if (cand.start < lo || cand.start >= hi) return;
      const g = gap(mod, cand);
      if (g < bestGap || (g === bestGap && best >= 0 && cand.start < spans[best]!.start)) {
        best = j;
        bestGap = g;
      }
    });
    if (best >= 0) mod.target = best;
  });
}

/** Compound arcs inside multiword spans, attachment arcs for modifiers. */
export function deriveArcs(spans: EntitySpan[], tokens: readonly string[]): DependencyArc[] {
  const arcs: DependencyArc[] = [];
  const seen = new Set<string>();
  const push = (head: number, dep: number, label: string) => {
    const key = `${head}:${dep}`;
    if (head === dep || seen.has(key)) return;
    seen.add(key);
    arcs.push({ head, dep, label });
  };
  for (const s of spans) {
    const head = s.end - 1;
    for (let t = s.start; t < head; t++) push(head, t, "compound");
  }
  for (const s of spans) {
    if (s.target === null) continue;
    const target = spans[s.target]!;
    const label = ARC_LABELS[tokens[s.end - 1]!] ?? "amod";
    push(target.end - 1, s.end - 1, label);
  }
  return arcs;
}

function tidy(text: string): string {
  return text.replace(/\s+/g, " ").trim();
}

/**
 * Annotate one raw report. Returns null when the findings are empty, which
 * callers report as a skip.
 */
export function annotateReport(
  raw: RawReport,
  engine: Engine,
  tagMap: TagMap,
): CorpusRow | null {
  const findings = tidy(raw.findings);
  const tokens = tokenize(findings);
  if (tokens.length === 0) return null;

  const out = engine(tokens);
  const spans = mapSpans(out.spans, tagMap);
  spans.sort((a, b) => a.start - b.start || a.end - b.end);
  resolveTargets(spans, tokens);

  // engine arcs win over heuristic ones covering the same pair
  const arcs: DependencyArc[] = [];
  const taken = new Set<string>();
  for (const a of [...(out.arcs ?? []), ...deriveArcs(spans, tokens)]) {
    const key = `${a.head}:${a.dep}`;
    if (a.head === a.dep || taken.has(key)) continue;
    taken.add(key);
    arcs.push(a);
  }
  arcs.sort((a, b) => a.head - b.head || a.dep - b.dep);

  return {
    id: raw.id,
    findings,
    impression: tidy(raw.impression),
    entities: spans,
    deps: arcs,
  };
}
