export { annotateReport, deriveArcs, resolveTargets } from "./annotate.js";
export type { Engine, EngineOutput, RawReport } from "./annotate.js";
export { commandEngine, parseConllu, CommandOutputError, CommandUnavailableError } from "./external.js";
export { parseRawJsonl, parseRawText, readRawReports, rowToJson, writeCorpus, RawFormatError } from "./io.js";
export {
  DEFAULT_LEXICON_PATH,
  DEFAULT_TAGMAP_PATH,
  loadLexicon,
  loadTagMap,
  tagTokens,
} from "./lexicon.js";
export type { Lexicon, TagMap, TaggedSpan } from "./lexicon.js";
export { checkRow, corpusRowSchema, parseRow, ENTITY_TYPES } from "./schema.js";
export type { CorpusRow, DependencyArc, EntitySpan, EntityType } from "./schema.js";
export { sentenceRanges, tokenize } from "./tokenize.js";
export { run } from "./cli.js";
