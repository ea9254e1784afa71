import { describe, expect, it } from "vitest";

import { SessionState } from "../src/state.js";
import type { Candidate, Stats } from "../src/types.js";

function cand(id: string): Candidate {
  return {
    id,
    subj_type: "PERSON",
    obj_type: "ORGANIZATION",
    surface: ["founded"],
    pattern: ["SUBJ-PERSON", "found", "OBJ-ORGANIZATION"],
    frequency: 5,
    match_count: 5,
    decision: null,
    examples: [],
  };
}

const STATS: Stats = { total: 9, labeled: 2, discarded: 1, remaining: 6, matched: 7, unmatched: 93 };

describe("SessionState", () => {
  it("serves candidates in enqueue order and deduplicates pages", () => {
    const s = new SessionState();
    s.enqueue([cand("a"), cand("b")]);
    s.enqueue([cand("b"), cand("c")]); // page overlap after a label shifts offsets
    expect(s.queued).toBe(3);
    expect(s.current?.id).toBe("a");
  });

  it("recordDecision advances and grows the session tally", () => {
    const s = new SessionState();
    s.enqueue([cand("a"), cand("b")]);
    const rec = s.recordDecision("org:founded_by");
    expect(rec.candidate.id).toBe("a");
    expect(s.current?.id).toBe("b");
    expect(s.sessionTally).toBe(1);
  });

  it("undo re-presents the last decided candidate for a superseding decision", () => {
    const s = new SessionState();
    s.enqueue([cand("a"), cand("b")]);
    s.recordDecision("discard");
    const undone = s.undo();
    expect(undone?.candidate.id).toBe("a");
    expect(s.current?.id).toBe("a");
    expect(s.sessionTally).toBe(0);
    const rec = s.recordDecision("org:founded_by");
    expect(rec.candidate.id).toBe("a");
  });

  it("undo with no history is a no-op", () => {
    const s = new SessionState();
    expect(s.undo()).toBeNull();
  });

  it("skip rotates the current candidate to the back", () => {
    const s = new SessionState();
    s.enqueue([cand("a"), cand("b"), cand("c")]);
    s.skip();
    expect(s.current?.id).toBe("b");
    s.recordDecision("discard");
    s.recordDecision("discard");
    expect(s.current?.id).toBe("a");
  });

  it("displayed numbers only ever come from server payloads", () => {
    const s = new SessionState();
    s.enqueue([cand("a")]);
    expect(s.stats).toBeNull();
    s.recordDecision("org:founded_by"); // no stats change without a response
    expect(s.stats).toBeNull();
    s.setStats(STATS);
    expect(s.stats).toEqual(STATS);
  });

  it("deciding on an empty queue throws", () => {
    const s = new SessionState();
    expect(() => s.recordDecision("discard")).toThrow(/no current candidate/);
  });
});
