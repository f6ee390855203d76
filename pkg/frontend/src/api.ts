/** Typed client for the placement service's HTTP interface. */

export interface NetworkNode {
  id: string;
  kind: "source" | "junction";
  demand: number;
  accessible: boolean;
  x?: number;
  y?: number;
}

export interface NetworkEdge {
  id: string;
  from: string;
  to: string;
  length: number;
}

export interface NetworkDocument {
  schema: string;
  nodes: NetworkNode[];
  edges: NetworkEdge[];
}

export interface CentralityDocument {
  schema: string;
  values: Record<string, number>;
}

export interface Report {
  schema: string;
  selected: string[];
  sensor_count: number;
  accessible_count: number;
  demand_coverage: number;
  uncovered_weight: number;
  energy: number;
  constraint_satisfied: boolean;
  mode: string;
  sensors_requested: number;
}

export interface SessionDocument {
  schema: string;
  id: string;
  installed: string[];
  rejected: string[];
  hyperparams: Record<string, unknown>;
  last_report: Report | null;
}

export interface JobRecord {
  schema: string;
  id: string;
  kind: "solve" | "replan";
  status: "pending" | "running" | "done" | "failed";
  session_id: string | null;
  error: string | null;
  result_id: string | null;
  report?: Report;
}

export interface HistogramDocument {
  schema: string;
  bins: number;
  centers: number[];
  densities: number[];
  width: number;
}

export interface ScheduleBody {
  t_hot?: number | null;
  t_cold?: number | null;
  sweeps?: number;
  runs?: number;
  seed?: number;
}

export interface HyperparamsBody {
  s?: number;
  A?: number;
  B?: number;
  C?: number;
  D?: number;
  E?: number | null;
  mode?: "equality" | "at_most";
  f_model?: "linear" | "exponential";
}

export type MarkStatus = "installed" | "rejected";

/** Failed response; status and the service's error code are preserved. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Background job that finished in the failed state. */
export class JobFailedError extends Error {
  constructor(readonly job: JobRecord) {
    super(job.error ?? `job ${job.id} failed`);
    this.name = "JobFailedError";
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.error === "string" ? body.error : "HttpError";
      const message =
        typeof body.message === "string" ? body.message : JSON.stringify(body);
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getNetwork(): Promise<NetworkDocument> {
    return this.request("/network");
  }

  getCentrality(): Promise<CentralityDocument> {
    return this.request("/centrality");
  }

  async startSolve(
    hyperparams: HyperparamsBody = {},
    schedule: ScheduleBody = {},
  ): Promise<string> {
    const body = await this.post<{ job_id: string }>("/solve", {
      hyperparams,
      schedule,
    });
    return body.job_id;
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request(`/jobs/${encodeURIComponent(jobId)}`);
  }

  /** Poll until the job leaves the queue; resolves on done, throws on failed. */
  async pollJob(
    jobId: string,
    intervalMs = 250,
    timeoutMs = 120_000,
  ): Promise<JobRecord> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "done") {
        return job;
      }
      if (job.status === "failed") {
        throw new JobFailedError(job);
      }
      if (Date.now() >= deadline) {
        throw new Error(`job ${jobId} still ${job.status} after ${timeoutMs}ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  createSession(hyperparams: HyperparamsBody = {}): Promise<SessionDocument> {
    return this.post("/sessions", { hyperparams });
  }

  getSession(sessionId: string): Promise<SessionDocument> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  markNode(
    sessionId: string,
    node: string,
    status: MarkStatus,
  ): Promise<SessionDocument> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/mark`, {
      node,
      status,
    });
  }

  unmarkNode(sessionId: string, node: string): Promise<SessionDocument> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/unmark`, {
      node,
    });
  }

  async startReplan(
    sessionId: string,
    schedule: ScheduleBody = {},
  ): Promise<string> {
    const body = await this.post<{ job_id: string }>(
      `/sessions/${encodeURIComponent(sessionId)}/replan`,
      { schedule },
    );
    return body.job_id;
  }

  resultHistogram(resultId: string, bins = 30): Promise<HistogramDocument> {
    return this.request(
      `/results/${encodeURIComponent(resultId)}/histogram?bins=${bins}`,
    );
  }
}
