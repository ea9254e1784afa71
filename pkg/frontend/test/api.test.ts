import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(status: number, body: unknown, calls: Call[]): typeof fetch {
  return (async (url: any, init?: RequestInit) => {
    calls.push({ url: String(url), init });
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
      text: async () => (typeof body === "string" ? body : JSON.stringify(body)),
    } as Response;
  }) as typeof fetch;
}

describe("ApiClient", () => {
  it("labels with a JSON body and returns the typed response", async () => {
    const calls: Call[] = [];
    const payload = {
      candidate_id: "c1",
      decision: "org:founded_by",
      stats: { total: 1, labeled: 1, discarded: 0, remaining: 0, matched: 5, unmatched: 95 },
    };
    const api = new ApiClient("http://svc", null, fakeFetch(200, payload, calls));
    const resp = await api.label("c1", "org:founded_by");
    expect(resp.stats.matched).toBe(5);
    expect(calls[0].url).toBe("http://svc/candidates/c1/label");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      decision: "org:founded_by",
      note: "",
    });
  });

  it("sends the auth token header on every request", async () => {
    const calls: Call[] = [];
    const api = new ApiClient("http://svc", "s3cret", fakeFetch(200, { items: [] }, calls));
    await api.candidates();
    await api.stats();
    for (const call of calls) {
      expect((call.init?.headers as Record<string, string>)["X-Annotation-Token"]).toBe(
        "s3cret",
      );
    }
  });

  it("encodes listing parameters", async () => {
    const calls: Call[] = [];
    const api = new ApiClient("http://svc", null, fakeFetch(200, { items: [] }, calls));
    await api.candidates("unlabeled", "tok123", 10);
    expect(calls[0].url).toBe(
      "http://svc/candidates?status=unlabeled&page_size=10&page_token=tok123",
    );
  });

  it("raises ApiError with the server status on failure", async () => {
    const api = new ApiClient("http://svc", null, fakeFetch(404, "no candidate c9", []));
    await expect(api.label("c9", "discard")).rejects.toThrowError(ApiError);
    await expect(api.label("c9", "discard")).rejects.toMatchObject({ status: 404 });
  });
});
