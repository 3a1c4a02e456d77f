/** Thin client over the dispatch HTTP API; every payload passes its schema. */
import {
  DesignerJobSchema,
  DesignerSessionViewSchema,
  DirectorJobSchema,
  DirectorSessionViewSchema,
  SubmitRequestSchema,
  SubmitResponseSchema,
  type ClientConfig,
  type JobContext,
  type Role,
  type SessionView,
  type SubmitRequest,
  type SubmitResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "http-error";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    code = body?.detail?.error ?? code;
    message = body?.detail?.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class DispatchClient {
  constructor(private readonly config: ClientConfig) {}

  private url(path: string): string {
    return this.config.baseUrl + path;
  }

  async claimJob(workerId: string, role: Role): Promise<JobContext | null> {
    const resp = await fetch(this.url("/jobs/claim"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ worker_id: workerId, role }),
    });
    if (!resp.ok) throw await parseError(resp);
    const job = (await resp.json()).job;
    if (job === null) return null;
    return role === "designer" ? DesignerJobSchema.parse(job) : DirectorJobSchema.parse(job);
  }

  async submitTurn(jobId: string, request: SubmitRequest): Promise<SubmitResponse> {
    const payload = SubmitRequestSchema.parse(request);
    const resp = await fetch(this.url(`/jobs/${jobId}/submit`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) throw await parseError(resp);
    return SubmitResponseSchema.parse(await resp.json());
  }

  async sessionView(sessionId: string, role: Role): Promise<SessionView> {
    const resp = await fetch(this.url(`/sessions/${sessionId}?as=${role}`));
    if (!resp.ok) throw await parseError(resp);
    const body = await resp.json();
    return role === "designer"
      ? DesignerSessionViewSchema.parse(body)
      : DirectorSessionViewSchema.parse(body);
  }
}
