/**
 * Tokenization matching the summarizer's corpus loader.
 *
 * The consumer re-tokenizes the raw findings text, so every span and arc
 * index we emit has to line up with this exact split: lowercase, decimals
 * like "5.5" kept whole, word runs kept whole, every other non-space
 * character a token of its own.
 */

// \p{L}\p{Mn}\p{Nd}\p{Pc} approximates the consumer's word-character class
const TOKEN = /\p{Nd}+\.\p{Nd}+|[\p{L}\p{Mn}\p{Nd}\p{Pc}]+|[^\p{L}\p{Mn}\p{Nd}\p{Pc}\s]/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN) ?? [];
}

/** Half-open [start, end) token ranges, split after sentence terminators. */
export function sentenceRanges(tokens: readonly string[]): Array<[number, number]> {
  const ranges: Array<[number, number]> = [];
  let start = 0;
  for (let i = 0; i < tokens.length; i++) {
    if (tokens[i] === "." || tokens[i] === ";") {
      ranges.push([start, i + 1]);
      start = i + 1;
    }
  }
  if (start < tokens.length) ranges.push([start, tokens.length]);
  return ranges;
}
