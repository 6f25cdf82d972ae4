/** Typed client for the local service.
 *
 * Every UI gesture funnels through exactly one of these calls; the
 * fetch function is injectable so contract tests can assert the mapping
 * without a server.
 */

import type {
  ApplyPayload,
  PatchPayload,
  ProjectPayload,
  SessionCreatePayload,
  SolvePayload,
  StepPayload,
  TracePayload,
} from "./types.js";

export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ServiceError extends Error {
  constructor(
    public kind: string,
    message: string,
    public extra: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export class Client {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = (await resp.json()) as Record<string, unknown>;
    if (resp.status >= 400 || (payload && "error" in payload)) {
      const err = (payload as { error?: { type?: string; message?: string } })
        .error ?? { type: "http", message: `status ${resp.status}` };
      throw new ServiceError(
        err.type ?? "http",
        err.message ?? "request failed",
        err as Record<string, unknown>,
      );
    }
    return payload as T;
  }

  createProject(body: {
    paths?: string[];
    files?: { path: string; text: string }[];
    goals?: string[];
  }): Promise<ProjectPayload> {
    return this.post("/api/project/create", body);
  }

  solve(projectId: number): Promise<SolvePayload> {
    return this.post("/api/project/solve", { project_id: projectId });
  }

  createSession(projectId: number, mode?: string): Promise<SessionCreatePayload> {
    return this.post("/api/session/create", { project_id: projectId, mode });
  }

  envStep(projectId: number, sessionId: number): Promise<StepPayload> {
    return this.post("/api/session/env-step", {
      project_id: projectId,
      session_id: sessionId,
    });
  }

  userAction(
    projectId: number,
    sessionId: number,
    action: string,
  ): Promise<StepPayload> {
    return this.post("/api/session/user-action", {
      project_id: projectId,
      session_id: sessionId,
      action,
    });
  }

  singleStep(
    projectId: number,
    sessionId: number,
    edge?: number,
  ): Promise<{ done: boolean; event?: unknown }> {
    const body: Record<string, unknown> = {
      project_id: projectId,
      session_id: sessionId,
    };
    if (edge !== undefined) body.edge = edge;
    return this.post("/api/session/single-step", body);
  }

  gotoNode(projectId: number, sessionId: number, node: number): Promise<unknown> {
    return this.post("/api/session/goto-node", {
      project_id: projectId,
      session_id: sessionId,
      node,
    });
  }

  trace(projectId: number, sessionId: number): Promise<TracePayload> {
    return this.post("/api/session/trace", {
      project_id: projectId,
      session_id: sessionId,
    });
  }

  generateStatement(projectId: number, site: number): Promise<PatchPayload> {
    return this.post("/api/codegen/generate-statement", {
      project_id: projectId,
      site,
    });
  }

  applyPatch(
    projectId: number,
    site: number,
    text: string,
    origin: "user" | "generated",
  ): Promise<ApplyPayload> {
    return this.post("/api/codegen/apply-patch", {
      project_id: projectId,
      site,
      text,
      origin,
    });
  }
}
