import type { ExampleSentence } from "./types.js";

export type TokenRole = "text" | "subj" | "obj";

export interface Segment {
  text: string;
  role: TokenRole;
}

/**
 * Split a sentence into contiguous segments by entity role. Spans are
 * inclusive token index pairs from the API; adjacent tokens with the
 * same role merge into one segment.
 */
export function segmentSentence(ex: ExampleSentence): Segment[] {
  const role = (i: number): TokenRole => {
    if (i >= ex.subj_span[0] && i <= ex.subj_span[1]) return "subj";
    if (i >= ex.obj_span[0] && i <= ex.obj_span[1]) return "obj";
    return "text";
  };
  const out: Segment[] = [];
  ex.tokens.forEach((tok, i) => {
    const r = role(i);
    const last = out[out.length - 1];
    if (last && last.role === r) {
      last.text += " " + tok;
    } else {
      out.push({ text: tok, role: r });
    }
  });
  return out;
}

/** Role of a rule-pattern token: the two mask tokens frame the context. */
export function patternRole(token: string): TokenRole {
  if (token.startsWith("SUBJ-")) return "subj";
  if (token.startsWith("OBJ-")) return "obj";
  return "text";
}
