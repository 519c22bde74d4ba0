/** Typed client for the labeling service HTTP API. */

export type Decision = "MATCH" | "NON_MATCH";

export type SessionStatusName =
  | "AWAITING_LABELS"
  | "TRAINING"
  | "REPAIRING"
  | "DONE";

export interface RecordPayload {
  record_id: string;
  source_id: string;
  attributes: Record<string, string>;
}

export interface Question {
  question_id: string;
  record_a: RecordPayload;
  record_b: RecordPayload;
  similarity: number;
}

export interface SessionStatus {
  schema_version: number;
  session_id: string;
  status: SessionStatusName;
  budget: number;
  iter_budget: number;
  labeled: number;
  remaining_budget: number;
  iteration: number;
  pending_count: number;
  done_labeling: boolean;
  repaired: boolean;
  error: string | null;
}

export interface NextResponse {
  schema_version: number;
  session_id: string;
  status: SessionStatusName;
  questions: Question[];
}

export interface Answer {
  question_id: string;
  label: Decision;
}

export interface LabelsResponse {
  schema_version: number;
  accepted: number;
  remaining_budget: number;
}

export interface RepairSummary {
  schema_version: number;
  cluster_count: number;
  record_count: number;
  early: boolean;
  size_histogram: Record<string, number>;
}

export interface ClusterPayload {
  cluster_id: number;
  records: string[];
}

export interface ClustersResponse {
  schema_version: number;
  repaired: boolean;
  clusters: ClusterPayload[];
  non_match_edges: [string, string][];
}

export interface SessionConfig {
  budget: number;
  iter_budget?: number;
  k?: number;
  seed?: number;
  strategy?: string;
}

export interface CreateSessionRequest {
  records_path: string;
  edges_path: string;
  gold_path?: string;
  threshold?: number | null;
  config: SessionConfig;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class SessionApi {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ schema_version: 1, ...body }),
    });
  }

  getStatus(sessionId: string): Promise<SessionStatus> {
    return this.request(`/sessions/${sessionId}/status`);
  }

  getNext(sessionId: string): Promise<NextResponse> {
    return this.request(`/sessions/${sessionId}/next`);
  }

  postLabels(sessionId: string, answers: Answer[]): Promise<LabelsResponse> {
    return this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      body: JSON.stringify({ schema_version: 1, answers }),
    });
  }

  postRepair(sessionId: string): Promise<RepairSummary> {
    return this.request(`/sessions/${sessionId}/repair`, { method: "POST" });
  }

  getClusters(sessionId: string): Promise<ClustersResponse> {
    return this.request(`/sessions/${sessionId}/clusters`);
  }
}
