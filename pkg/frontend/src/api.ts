/** Typed client for the gateway JSON API. The transport is injectable so
 * tests can record requests and serve canned responses. */

export interface ScoredVideo {
  video_id: string;
  vision_score: number;
  audio_score: number;
  fused_score: number;
  rank: number;
  /** present on agent search turns, absent on /v1/search rows */
  summary?: string;
  thumbnail_url?: string;
}

export interface SearchResponse {
  results: ScoredVideo[];
  reranked?: boolean;
  degraded?: boolean;
  schema_version: number;
}

export interface MessageResponse {
  assistant: string;
  route: "search" | "chat";
  degraded: boolean;
  fallback_used: boolean;
  videos?: ScoredVideo[];
  schema_version: number;
}

export interface HealthResponse {
  status: string;
  videos: number;
  schema_version: number;
}

export interface VideoResponse {
  video: Record<string, unknown>;
  schema_version: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export type Transport = (url: string, init?: RequestInit) => Promise<Response>;

async function raise(response: Response): Promise<never> {
  let code = "UnknownError";
  let message = `gateway returned ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the status-based message
  }
  throw new ApiError(response.status, code, message);
}

export class GatewayClient {
  private readonly base: string;
  private readonly transport: Transport;

  constructor(baseUrl: string, transport?: Transport) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.transport = transport ?? ((url, init) => fetch(url, init));
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.transport(this.base + path);
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.transport(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.get("/health");
  }

  search(
    query: string,
    k = 10,
    options: { alpha?: number; rerank?: boolean } = {},
  ): Promise<SearchResponse> {
    const body: Record<string, unknown> = { query, k };
    if (options.alpha !== undefined) body.alpha = options.alpha;
    if (options.rerank !== undefined) body.rerank = options.rerank;
    return this.post("/v1/search", body);
  }

  async createSession(): Promise<string> {
    const body = await this.post<{ session_id: string }>("/v1/sessions", {});
    return body.session_id;
  }

  sendMessage(
    sessionId: string,
    text: string,
    selectedVideoIds?: string[],
  ): Promise<MessageResponse> {
    const body: Record<string, unknown> = { text };
    if (selectedVideoIds !== undefined) body.selected_video_ids = selectedVideoIds;
    return this.post(`/v1/sessions/${encodeURIComponent(sessionId)}/messages`, body);
  }

  getVideo(videoId: string): Promise<VideoResponse> {
    return this.get(`/v1/videos/${encodeURIComponent(videoId)}`);
  }
}
