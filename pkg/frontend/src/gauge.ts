import type { Stats } from "./types.js";

export interface GaugeView {
  matched: number;
  unmatched: number;
  coveragePct: number; // matched / corpus size, 0..100
  progressLabel: string; // "labeled+discarded / total candidates"
}

/** Project a /stats payload into display values; no other arithmetic
 *  happens client-side. */
export function gaugeView(stats: Stats): GaugeView {
  const corpus = stats.matched + stats.unmatched;
  const coveragePct = corpus > 0 ? (100 * stats.matched) / corpus : 0;
  const done = stats.labeled + stats.discarded;
  return {
    matched: stats.matched,
    unmatched: stats.unmatched,
    coveragePct,
    progressLabel: `${done} / ${stats.total}`,
  };
}
