/**
 * Clinical term lexicon and the tag mapping table.
 *
 * The lexicon pairs surface terms with the tagger's native clinical tags
 * (ANAT, OBS, DEVICE, ...). The separate tag map folds those onto the five
 * corpus entity types, or drops them (null). Both ship as editable JSON so
 * the label mapping can change without touching code.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import type { EntityType } from "./schema.js";
import { ENTITY_TYPES } from "./schema.js";
import { tokenize } from "./tokenize.js";

export interface TaggedSpan {
  start: number;
  end: number;
  tag: string;
}

/** First token -> candidate token sequences, longest first. */
export type Lexicon = Map<string, Array<{ seq: string[]; tag: string }>>;

export type TagMap = Map<string, EntityType | null>;

export const DEFAULT_LEXICON_PATH = fileURLToPath(
  new URL("../data/lexicon.json", import.meta.url),
);
export const DEFAULT_TAGMAP_PATH = fileURLToPath(
  new URL("../data/tagmap.json", import.meta.url),
);

export function loadLexicon(path: string = DEFAULT_LEXICON_PATH): Lexicon {
  const raw = JSON.parse(readFileSync(path, "utf-8")) as {
    terms: Array<{ term: string; tag: string }>;
  };
  const lex: Lexicon = new Map();
  for (const { term, tag } of raw.terms) {
    const seq = tokenize(term);
    if (seq.length === 0) throw new Error(`lexicon term tokenizes to nothing: "${term}"`);
    const head = seq[0]!;
    const bucket = lex.get(head) ?? [];
    bucket.push({ seq, tag });
    lex.set(head, bucket);
  }
  for (const bucket of lex.values()) bucket.sort((a, b) => b.seq.length - a.seq.length);
  return lex;
}

export function loadTagMap(path: string = DEFAULT_TAGMAP_PATH): TagMap {
  const raw = JSON.parse(readFileSync(path, "utf-8")) as {
    map: Record<string, string | null>;
  };
  const map: TagMap = new Map();
  for (const [tag, type] of Object.entries(raw.map)) {
    if (type !== null && !ENTITY_TYPES.includes(type as EntityType))
      throw new Error(`tag map sends ${tag} to unknown entity type "${type}"`);
    map.set(tag, type as EntityType | null);
  }
  return map;
}

/**
 * Greedy left-to-right longest-match tagging over consumer tokens.
 * Matches never overlap; unmatched tokens are simply skipped.
 */
export function tagTokens(tokens: readonly string[], lexicon: Lexicon): TaggedSpan[] {
  const spans: TaggedSpan[] = [];
  let i = 0;
  while (i < tokens.length) {
    const bucket = lexicon.get(tokens[i]!);
    let matched = false;
    if (bucket) {
      for (const { seq, tag } of bucket) {
        if (i + seq.length > tokens.length) continue;
        if (seq.every((w, k) => tokens[i + k] === w)) {
          spans.push({ start: i, end: i + seq.length, tag });
          i += seq.length;
          matched = true;
          break;
        }
      }
    }
    if (!matched) i += 1;
  }
  return spans;
}
