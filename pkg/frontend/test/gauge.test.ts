import { describe, expect, it } from "vitest";

import { gaugeView } from "../src/gauge.js";

describe("gaugeView", () => {
  it("mirrors the stats payload", () => {
    const g = gaugeView({
      total: 40,
      labeled: 12,
      discarded: 3,
      remaining: 25,
      matched: 150,
      unmatched: 850,
    });
    expect(g.matched).toBe(150);
    expect(g.unmatched).toBe(850);
    expect(g.coveragePct).toBeCloseTo(15.0, 10);
    expect(g.progressLabel).toBe("15 / 40");
  });

  it("handles an empty corpus without dividing by zero", () => {
    const g = gaugeView({
      total: 0,
      labeled: 0,
      discarded: 0,
      remaining: 0,
      matched: 0,
      unmatched: 0,
    });
    expect(g.coveragePct).toBe(0);
    expect(g.progressLabel).toBe("0 / 0");
  });
});
