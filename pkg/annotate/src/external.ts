/**
 * External tagging engine.
 *
 * Wraps a clinical NER + dependency tool the user already has installed.
 * The tool is called once per report with pre-tokenized sentences on
 * stdin, one sentence per line, tokens space-separated, and must answer
 * with CoNLL-U on stdout: one block per input sentence, same token count,
 * entity tags in the MISC column as Tag=NAME (contiguous equal tags merge
 * into one span), dependency structure in HEAD and DEPREL. Pre-tokenized
 * input keeps every index aligned with the consumer's tokenization.
 */

import { spawnSync } from "node:child_process";
import type { Engine, EngineOutput } from "./annotate.js";
import type { DependencyArc } from "./schema.js";
import type { TaggedSpan } from "./lexicon.js";
import { sentenceRanges } from "./tokenize.js";

export class CommandUnavailableError extends Error {}
export class CommandOutputError extends Error {}

const MISC_TAG = /(?:^|\|)Tag=([^|]+)/;

/** Parse one CoNLL-U token line into [form, head, deprel, tag]. */
function parseTokenLine(line: string): [string, number, string, string | null] {
  const cols = line.split("\t");
  if (cols.length < 8) throw new CommandOutputError(`short CoNLL-U line: "${line}"`);
  const head = Number(cols[6]);
  if (!Number.isInteger(head) || head < 0)
    throw new CommandOutputError(`bad HEAD in line: "${line}"`);
  const misc = cols[9] ?? "_";
  const m = misc.match(MISC_TAG);
  return [cols[1]!, head, cols[7]!, m ? m[1]! : null];
}

export function parseConllu(
  output: string,
  sentenceLengths: readonly number[],
): EngineOutput {
  const blocks = output
    .split(/\n\s*\n/)
    .map((b) => b.split("\n").filter((l) => l.trim() !== "" && !l.startsWith("#")))
    .filter((b) => b.length > 0);
  if (blocks.length !== sentenceLengths.length)
    throw new CommandOutputError(
      `expected ${sentenceLengths.length} sentences, tool returned ${blocks.length}`,
    );

  const spans: TaggedSpan[] = [];
  const arcs: DependencyArc[] = [];
  let offset = 0;
  blocks.forEach((lines, si) => {
    if (lines.length !== sentenceLengths[si])
      throw new CommandOutputError(
        `sentence ${si + 1}: sent ${sentenceLengths[si]} tokens, got ${lines.length} back`,
      );
    let open: TaggedSpan | null = null;
    lines.forEach((line, ti) => {
      const [, head, deprel, tag] = parseTokenLine(line);
      if (head > 0) arcs.push({ head: offset + head - 1, dep: offset + ti, label: deprel });
      if (tag !== null && open !== null && open.tag === tag && open.end === offset + ti) {
        open.end += 1;
      } else {
        if (open !== null) spans.push(open);
        open = tag === null ? null : { start: offset + ti, end: offset + ti + 1, tag };
      }
    });
    if (open !== null) spans.push(open);
    offset += lines.length;
  });
  return { spans, arcs };
}

/**
 * Build an engine around a command line. The command is split on
 * whitespace; quoting is not supported, wrap complicated invocations in a
 * script. A missing executable raises CommandUnavailableError with an
 * install hint, per the adapter's contract.
 */
export function commandEngine(command: string): Engine {
  const argv = command.split(/\s+/).filter(Boolean);
  if (argv.length === 0) throw new CommandUnavailableError("empty annotator command");
  return (tokens) => {
    const ranges = sentenceRanges(tokens);
    const input =
      ranges.map(([lo, hi]) => tokens.slice(lo, hi).join(" ")).join("\n") + "\n";
    const res = spawnSync(argv[0]!, argv.slice(1), { input, encoding: "utf-8" });
    if (res.error && (res.error as NodeJS.ErrnoException).code === "ENOENT")
      throw new CommandUnavailableError(
        `annotator command not found: "${argv[0]}". Install your clinical NER/parsing ` +
          `tool and put it on PATH, or drop --engine command to use the bundled lexicon.`,
      );
    if (res.error) throw res.error;
    if (res.status !== 0)
      throw new CommandOutputError(
        `annotator command exited ${res.status}: ${res.stderr.trim()}`,
      );
    return parseConllu(res.stdout, ranges.map(([lo, hi]) => hi - lo));
  };
}
