// Thin typed client over fetch for the emoface service.

import type {
  ApiError,
  Edit,
  JobStatus,
  Project,
  TrajectoryPayload,
  Violation,
} from "./types";

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }

  violations(): Violation[] {
    return Array.isArray(this.detail) ? (this.detail as Violation[]) : [];
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string, readonly fetchFn: typeof fetch = fetch) {}

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await resp.json();
    if (!resp.ok) throw new ApiRequestError(resp.status, body as ApiError);
    return body as T;
  }

  getProject(): Promise<Project> {
    return this.requestJson("/api/project");
  }

  putEdits(edits: Edit[]): Promise<{ ok: boolean; n_edits: number }> {
    return this.requestJson("/api/edits", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(edits),
    });
  }

  startCompile(): Promise<JobStatus> {
    return this.requestJson("/api/compile", { method: "POST" });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.requestJson(`/api/jobs/${jobId}`);
  }

  getTrajectory(): Promise<TrajectoryPayload> {
    return this.requestJson("/api/trajectory");
  }

  getLabels(): Promise<Record<string, unknown>> {
    return this.requestJson("/api/labels");
  }

  async getPreview(frame: number, baseline = false): Promise<Uint8Array> {
    const route = baseline ? "baseline-preview" : "preview";
    const resp = await this.fetchFn(`${this.baseUrl}/api/${route}/${frame}`);
    if (!resp.ok) {
      throw new ApiRequestError(resp.status, (await resp.json()) as ApiError);
    }
    return new Uint8Array(await resp.arrayBuffer());
  }

  /** Poll a compile job until it settles as done or failed. */
  async waitForJob(
    jobId: string,
    intervalMs = 250,
    timeoutMs = 120_000,
  ): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done" || job.state === "failed") return job;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await sleep(intervalMs);
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
