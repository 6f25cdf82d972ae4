/** The session controller: gestures in, service calls out, re-render.
 *
 * Every gesture maps to exactly one endpoint call:
 *
 *   stepEnv          -> /api/session/env-step
 *   submitAction     -> /api/session/user-action
 *   singleStep       -> /api/session/single-step
 *   clickNode        -> /api/session/goto-node
 *   clickGenerate    -> /api/codegen/generate-statement
 *   editMagicBlock / acceptGenerated -> /api/codegen/apply-patch
 *   renderSession (reload) -> /api/session/trace
 *
 * The trace pane is maintained incrementally from step payloads; it is
 * not authoritative — a reload re-fetches the full trace and reproduces
 * the identical view.  One request is in flight per session at a time
 * (gestures queue); a sequence number stamps every gesture and stale
 * responses are discarded, so the page always reflects the last
 * response.
 */

import { Client, ServiceError } from "./api.js";
import { emptyView, renderSession, type ViewState } from "./render.js";
import type { ProjectPayload, StepPayload, TracePayload } from "./types.js";

export class App {
  view: ViewState = emptyView();
  projectId: number | null = null;
  sessionId: number | null = null;
  private seq = 0;
  private inFlight: Promise<void> = Promise.resolve();

  constructor(
    private client: Client,
    private mount: (html: string) => void = () => {},
  ) {}

  render(): string {
    const html = renderSession(this.view);
    this.mount(html);
    return html;
  }

  /** Serialise gestures; drop renders superseded by later gestures. */
  private enqueue(work: () => Promise<void>): Promise<void> {
    const stamp = ++this.seq;
    const run = async () => {
      try {
        await work();
      } catch (e) {
        if (e instanceof ServiceError) {
          this.view.notice = `${e.kind}: ${e.message}`;
        } else {
          throw e;
        }
      }
      if (stamp === this.seq) this.render();
    };
    this.inFlight = this.inFlight.then(run, run);
    return this.inFlight;
  }

  // -- project lifecycle (not a session gesture) -------------------------

  async openProject(files: { path: string; text: string }[]): Promise<void> {
    const project: ProjectPayload = await this.client.createProject({ files });
    this.projectId = project.project_id;
    this.view.files = project.files;
    this.view.magicSites = project.magic_sites;
    this.view.controllable = project.controllable_tasks;
    const verdict = await this.client.solve(project.project_id);
    this.view.realizable = verdict.realizable;
    const mode = verdict.realizable ? "free-play" : "counterexample";
    const session = await this.client.createSession(project.project_id, mode);
    this.sessionId = session.session_id;
    this.view.mode = session.mode;
    this.view.activeNode = session.root;
    this.view.trace = {
      mode: session.mode,
      active: session.root.id,
      nodes: [session.root],
      edges: [],
    };
    this.render();
  }

  /** Page reload: rebuild the whole view from the service. */
  resumeSession(projectId: number, sessionId: number): Promise<void> {
    return this.enqueue(async () => {
      this.projectId = projectId;
      this.sessionId = sessionId;
      const trace: TracePayload = await this.client.trace(projectId, sessionId);
      this.view.mode = trace.mode;
      this.view.trace = trace;
      this.view.activeNode =
        trace.nodes.find((n) => n.id === trace.active) ?? null;
    });
  }

  private applyStep(step: StepPayload): void {
    this.view.activeNode = step.node;
    this.view.notice = step.violation
      ? `assertion violated at ${step.violation.pos.file}:${step.violation.pos.line}`
      : null;
    const trace = this.view.trace;
    if (trace) {
      if (!trace.nodes.some((n) => n.id === step.node.id)) {
        trace.nodes.push(step.node);
      }
      if (!trace.edges.some((e) => e.id === step.edge.id)) {
        trace.edges.push(step.edge);
      }
      trace.active = step.active;
    }
  }

  // -- session gestures ----------------------------------------------------

  stepEnv(): Promise<void> {
    return this.enqueue(async () => {
      const step = await this.client.envStep(this.projectId!, this.sessionId!);
      this.applyStep(step);
    });
  }

  submitAction(text: string): Promise<void> {
    return this.enqueue(async () => {
      const step = await this.client.userAction(
        this.projectId!,
        this.sessionId!,
        text,
      );
      this.applyStep(step);
    });
  }

  /** The dialog route builds the call text from the chosen task/args. */
  submitDialogAction(task: string, args: string[]): Promise<void> {
    return this.submitAction(`${task}(${args.join(", ")})`);
  }

  clickNode(node: number): Promise<void> {
    return this.enqueue(async () => {
      await this.client.gotoNode(this.projectId!, this.sessionId!, node);
      if (this.view.trace) {
        this.view.trace.active = node;
        this.view.activeNode =
          this.view.trace.nodes.find((n) => n.id === node) ?? null;
      }
      this.view.notice = null;
    });
  }

  singleStep(): Promise<void> {
    return this.enqueue(async () => {
      const out = await this.client.singleStep(this.projectId!, this.sessionId!);
      this.view.lastEvent = out.done
        ? "replay exhausted"
        : JSON.stringify(out.event);
    });
  }

  // -- code generation gestures ---------------------------------------------

  clickGenerate(site: number): Promise<void> {
    return this.enqueue(async () => {
      const out = await this.client.generateStatement(this.projectId!, site);
      if (out.patch.unreachable) {
        this.view.notice = `site ${site} is unreachable under the current code`;
        return;
      }
      // the generated statement appears inline, marked as generated but
      // not yet applied; accepting it is a separate gesture
      this.view.fills[String(site)] = {
        origin: "generated",
        text: out.patch.text,
      };
      this.view.notice = null;
    });
  }

  acceptGenerated(site: number): Promise<void> {
    const text = this.view.fills[String(site)]?.text ?? ";";
    return this.applyFill(site, text, "generated");
  }

  editMagicBlock(site: number, text: string): Promise<void> {
    return this.applyFill(site, text, "user");
  }

  private applyFill(
    site: number,
    text: string,
    origin: "user" | "generated",
  ): Promise<void> {
    return this.enqueue(async () => {
      const applied = await this.client.applyPatch(
        this.projectId!,
        site,
        text,
        origin,
      );
      this.view.fills = {};
      for (const [s, fill] of Object.entries(applied.fills)) {
        this.view.fills[s] = fill;
      }
      this.view.notice = null;
    });
  }
}
