#!/usr/bin/env node
/**
 * graphsum-annotate: raw reports in, annotated corpus JSONL out.
 *
 * Exit codes follow the consumer's convention: 0 ok, 2 usage error,
 * 3 data or schema error, 4 annotation tooling unavailable.
 */

import { realpathSync } from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import type { Engine } from "./annotate.js";
import { annotateReport } from "./annotate.js";
import { commandEngine, CommandOutputError, CommandUnavailableError } from "./external.js";
import { readRawReports, writeCorpus, RawFormatError } from "./io.js";
import {
  DEFAULT_LEXICON_PATH,
  DEFAULT_TAGMAP_PATH,
  loadLexicon,
  loadTagMap,
  tagTokens,
} from "./lexicon.js";
import type { CorpusRow } from "./schema.js";
import { checkRow, corpusRowSchema } from "./schema.js";

const USAGE = `usage: graphsum-annotate [options] RAW_FILE
  --out FILE        output corpus JSONL (default: annotated.jsonl)
  --engine NAME     lexicon (default) or command
  --command CMD     external annotator for --engine command
  --format NAME     force input format: text or jsonl
  --lexicon FILE    term lexicon (default: bundled)
  --tagmap FILE     clinical tag -> entity type table (default: bundled)`;

export interface CliIo {
  log: (line: string) => void;
  warn: (line: string) => void;
}

export function run(argv: string[], io: CliIo = console): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string", default: "annotated.jsonl" },
        engine: { type: "string", default: "lexicon" },
        command: { type: "string" },
        format: { type: "string" },
        lexicon: { type: "string", default: DEFAULT_LEXICON_PATH },
        tagmap: { type: "string", default: DEFAULT_TAGMAP_PATH },
        help: { type: "boolean", default: false },
      },
    });
  } catch (e) {
    io.warn((e as Error).message);
    io.warn(USAGE);
    return 2;
  }
  if (args.values.help) {
    io.log(USAGE);
    return 0;
  }
  if (args.positionals.length !== 1) {
    io.warn(USAGE);
    return 2;
  }
  const fmt = args.values.format;
  if (fmt !== undefined && fmt !== "text" && fmt !== "jsonl") {
    io.warn(`unknown input format: ${fmt}`);
    return 2;
  }

  let engine: Engine;
  try {
    if (args.values.engine === "lexicon") {
      const lexicon = loadLexicon(args.values.lexicon);
      engine = (tokens) => ({ spans: tagTokens(tokens, lexicon) });
    } else if (args.values.engine === "command") {
      if (!args.values.command) {
        io.warn("--engine command needs --command CMD");
        return 2;
      }
      engine = commandEngine(args.values.command);
    } else {
      io.warn(`unknown engine: ${args.values.engine}`);
      return 2;
    }
    const tagMap = loadTagMap(args.values.tagmap);

    const raws = readRawReports(args.positionals[0]!, fmt);
    const rows: CorpusRow[] = [];
    for (const raw of raws) {
      const row = annotateReport(raw, engine, tagMap);
      if (row === null) {
        io.warn(`skipping ${raw.id}: empty findings`);
        continue;
      }
      corpusRowSchema.parse(row);
      const problems = checkRow(row);
      if (problems.length > 0) throw new RawFormatError(`${raw.id}: ${problems.join("; ")}`);
      rows.push(row);
    }
    writeCorpus(rows, args.values.out);
    io.log(`wrote ${rows.length} annotated reports to ${args.values.out}`);
    return 0;
  } catch (e) {
    if (e instanceof CommandUnavailableError) {
      io.warn(e.message);
      return 4;
    }
    if (e instanceof RawFormatError || e instanceof CommandOutputError) {
      io.warn(e.message);
      return 3;
    }
    if (e instanceof Error && e.name === "ZodError") {
      io.warn(`schema violation: ${e.message}`);
      return 3;
    }
    if (e instanceof Error && (e as NodeJS.ErrnoException).code === "ENOENT") {
      io.warn(e.message);
      return 3;
    }
    throw e;
  }
}

const entry = process.argv[1];
if (entry !== undefined) {
  let invoked = "";
  try {
    invoked = pathToFileURL(realpathSync(entry)).href;
  } catch {
    // entry script vanished; definitely not us
  }
  if (invoked === import.meta.url) process.exit(run(process.argv.slice(2)));
}
