/** Typed client for the listening-test JSON API (the only backend). */

export interface Progress {
  completed: number;
  total: number;
}

export interface SessionInfo {
  session_id: string;
  progress: Progress;
  allow_replay?: boolean;
}

export type NextStimulus =
  | { done: true; progress: Progress }
  | { done?: undefined; token: string; audio_url: string; progress: Progress };

export type Naturalness = "Real" | "Artificial";

export interface RatingAck {
  ok: boolean;
  progress: Progress;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson(resp: Response): Promise<unknown> {
  const text = await resp.text();
  if (!resp.ok) {
    let detail = text;
    try {
      const body = JSON.parse(text) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* plain-text error body */
    }
    throw new ApiError(resp.status, detail || resp.statusText);
  }
  return JSON.parse(text) as unknown;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(subjectId: string): Promise<SessionInfo> {
    const resp = await this.fetchFn(this.url("/api/session"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ subject_id: subjectId }),
    });
    return (await parseJson(resp)) as SessionInfo;
  }

  async nextStimulus(sessionId: string): Promise<NextStimulus> {
    const resp = await this.fetchFn(
      this.url(`/api/session/${encodeURIComponent(sessionId)}/next`),
    );
    return (await parseJson(resp)) as NextStimulus;
  }

  async submitRating(
    sessionId: string,
    token: string,
    naturalness: Naturalness,
    likert: number,
  ): Promise<RatingAck> {
    const resp = await this.fetchFn(
      this.url(`/api/session/${encodeURIComponent(sessionId)}/rating`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ token, naturalness, likert }),
      },
    );
    return (await parseJson(resp)) as RatingAck;
  }
}
