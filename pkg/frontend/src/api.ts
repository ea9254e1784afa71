import type {
  CandidatePage,
  CandidateStatus,
  LabelResponse,
  SchemaInfo,
  Stats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Thin typed wrapper over the service endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string | null = null,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private headers(json: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["X-Annotation-Token"] = this.token;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return (await resp.json()) as T;
  }

  candidates(
    status: CandidateStatus = "unlabeled",
    pageToken: string | null = null,
    pageSize = 20,
  ): Promise<CandidatePage> {
    const params = new URLSearchParams({ status, page_size: String(pageSize) });
    if (pageToken) params.set("page_token", pageToken);
    return this.request<CandidatePage>(`/candidates?${params}`, {
      headers: this.headers(false),
    });
  }

  label(candidateId: string, decision: string, note = ""): Promise<LabelResponse> {
    return this.request<LabelResponse>(
      `/candidates/${encodeURIComponent(candidateId)}/label`,
      {
        method: "POST",
        headers: this.headers(true),
        body: JSON.stringify({ decision, note }),
      },
    );
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/stats", { headers: this.headers(false) });
  }

  schema(): Promise<SchemaInfo> {
    return this.request<SchemaInfo>("/schema", { headers: this.headers(false) });
  }

  async exportRules(): Promise<string> {
    const resp = await this.fetchFn(this.baseUrl + "/export/rules", {
      headers: this.headers(false),
    });
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return resp.text();
  }
}
