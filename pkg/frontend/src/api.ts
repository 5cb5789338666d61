// Thin typed client over fetch. Every reply keeps the raw body text so the
// UI can display the server's numbers byte-for-byte instead of reformatting
// them through JavaScript floats.

import type {
  ApiError,
  Dag,
  Feature,
  Pag,
  Recommendation,
  SessionSummary,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(
    public status: number,
    public error: ApiError,
  ) {
    super(`${error.code}: ${error.message}`);
  }
}

export interface Reply<T> {
  data: T;
  raw: string;
}

async function request<T>(url: string, init?: RequestInit): Promise<Reply<T>> {
  const response = await fetch(url, init);
  const raw = await response.text();
  if (!response.ok) {
    let error: ApiError;
    try {
      error = JSON.parse(raw) as ApiError;
    } catch {
      error = { code: "http-error", message: raw, detail: null };
    }
    throw new ApiFailure(response.status, error);
  }
  return { data: JSON.parse(raw) as T, raw };
}

function post<T>(url: string, body: unknown): Promise<Reply<T>> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

/** Extract the literal source text of a top-level JSON field, so displayed
 * numbers match the server byte-for-byte. */
export function rawField(raw: string, field: string): string | null {
  const match = raw.match(new RegExp(`"${field}"\\s*:\\s*(-?[0-9][^,}]*)`));
  return match ? match[1] : null;
}

export class SessionClient {
  constructor(
    public base: string,
    public sessionId: string,
  ) {}

  private url(path: string): string {
    return `${this.base}/sessions/${encodeURIComponent(this.sessionId)}${path}`;
  }

  static listSessions(base: string): Promise<Reply<{ sessions: SessionSummary[] }>> {
    return request(`${base}/sessions`);
  }

  state(): Promise<Reply<Record<string, unknown>>> {
    return request(this.url(""));
  }

  recommend(body: {
    alpha: number;
    bins: number;
    undesirable: Record<string, unknown>;
    classFeature: Feature;
  }): Promise<Reply<{ recommendations: Recommendation[] }>> {
    return post(this.url("/recommend"), body);
  }

  setPlan(body: {
    features: Feature[];
    classFeature: Feature;
  }): Promise<Reply<{ plan: { features: Feature[]; classFeature: Feature } }>> {
    return post(this.url("/plan"), body);
  }

  discover(body: {
    knowledge?: { required: Array<[string, string]>; forbidden: Array<[string, string]> };
  }): Promise<Reply<{ pag: Pag; text: string }>> {
    return post(this.url("/discover"), body);
  }

  orient(orientations: Array<[string, string]>): Promise<Reply<{ dag: Dag }>> {
    return post(this.url("/orient"), { orientations });
  }

  fit(): Promise<Reply<{ sem: { classFeature: string | null }; text: string }>> {
    return post(this.url("/fit"), {});
  }

  intervene(on: string, target: string): Promise<Reply<Record<string, unknown>>> {
    const params = new URLSearchParams({ on, target });
    return request(this.url(`/intervene?${params}`));
  }
}
