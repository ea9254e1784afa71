import { DISCARD } from "./types.js";

export interface HotkeyMap {
  /** key -> decision (relation head or "discard") */
  byKey: Map<string, string>;
  /** decision -> key, for rendering the palette */
  byDecision: Map<string, string>;
}

const RELATION_KEYS = "123456789abcefghijmopqrstvwyz".split("");
export const DISCARD_KEY = "x";
export const UNDO_KEY = "u";
export const SKIP_KEY = "n";

/**
 * Assign one key per relation: digits first, then letters, in schema
 * order so the mapping is stable across sessions. "x", "u" and "n" are
 * reserved for discard, undo and skip.
 */
export function buildHotkeys(relations: string[]): HotkeyMap {
  if (relations.length > RELATION_KEYS.length) {
    throw new Error(`schema too large for hotkeys: ${relations.length} relations`);
  }
  const byKey = new Map<string, string>();
  const byDecision = new Map<string, string>();
  relations.forEach((rel, i) => {
    byKey.set(RELATION_KEYS[i], rel);
    byDecision.set(rel, RELATION_KEYS[i]);
  });
  byKey.set(DISCARD_KEY, DISCARD);
  byDecision.set(DISCARD, DISCARD_KEY);
  return { byKey, byDecision };
}
