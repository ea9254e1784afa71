import type { Candidate, Stats } from "./types.js";

export interface DecisionRecord {
  candidate: Candidate;
  decision: string;
}

/**
 * Client session state. Counts shown in the UI (coverage, progress) are
 * never computed here: they come verbatim from the latest /stats or
 * label-response payload. The client only tracks queue position and a
 * per-session tally.
 */
export class SessionState {
  private queue: Candidate[] = [];
  private seen = new Set<string>();
  private history: DecisionRecord[] = [];
  stats: Stats | null = null;
  nextPageToken: string | null = null;
  exhausted = false;

  get current(): Candidate | null {
    return this.queue[0] ?? null;
  }

  get queued(): number {
    return this.queue.length;
  }

  get sessionTally(): number {
    return this.history.length;
  }

  get lastDecision(): DecisionRecord | null {
    return this.history[this.history.length - 1] ?? null;
  }

  enqueue(items: Candidate[]): void {
    for (const c of items) {
      if (!this.seen.has(c.id)) {
        this.seen.add(c.id);
        this.queue.push(c);
      }
    }
  }

  /** Latest server numbers; the single entry point for displayed counts. */
  setStats(stats: Stats): void {
    this.stats = stats;
  }

  /** Pop the current candidate as decided and advance. */
  recordDecision(decision: string): DecisionRecord {
    const candidate = this.queue.shift();
    if (!candidate) throw new Error("no current candidate");
    const record = { candidate, decision };
    this.history.push(record);
    return record;
  }

  /** Step back to the previously decided candidate so the next
   *  keystroke posts a superseding decision. */
  undo(): DecisionRecord | null {
    const record = this.history.pop();
    if (!record) return null;
    this.queue.unshift(record.candidate);
    return record;
  }

  /** Push the current candidate to the back of the queue. */
  skip(): void {
    const c = this.queue.shift();
    if (c) this.queue.push(c);
  }
}
