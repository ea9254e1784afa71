import type { LabelResponse } from "./types.js";

export interface PendingDecision {
  candidateId: string;
  decision: string;
}

export type SendFn = (candidateId: string, decision: string) => Promise<LabelResponse>;

/**
 * Ordered retry queue for label posts. Decisions always enter the queue
 * (so submission order is preserved across outages) and flush drains it
 * front to back; a failure leaves the remainder queued for the next
 * flush. The server applies last-decision-wins, so replaying the full
 * ordered backlog converges to the annotator's final intent.
 */
export class RetryQueue {
  private pending: PendingDecision[] = [];
  private flushing = false;

  constructor(
    private readonly send: SendFn,
    private readonly onChange: (queueSize: number) => void = () => {},
  ) {}

  get size(): number {
    return this.pending.length;
  }

  /** Enqueue and try to deliver; resolves with the last server response
   *  delivered, or null if the backlog is still stuck. */
  async submit(candidateId: string, decision: string): Promise<LabelResponse | null> {
    this.pending.push({ candidateId, decision });
    this.onChange(this.pending.length);
    return this.flush();
  }

  async flush(): Promise<LabelResponse | null> {
    if (this.flushing) return null;
    this.flushing = true;
    let last: LabelResponse | null = null;
    try {
      while (this.pending.length > 0) {
        const head = this.pending[0];
        try {
          last = await this.send(head.candidateId, head.decision);
        } catch {
          break; // leave head queued; caller retries later
        }
        this.pending.shift();
        this.onChange(this.pending.length);
      }
    } finally {
      this.flushing = false;
    }
    return last;
  }
}
