/** Wire-protocol payloads (see docs/protocol.md in the repository root). */

export interface Pos {
  file: string;
  line: number;
  col: number;
}

export interface VarValue {
  raw: number;
  text: string;
}

export interface StatePayload {
  values: Record<string, VarValue>;
  pcs: Record<string, number>;
  err: boolean;
  at_magic_site: number | null;
  controller_turn: boolean;
}

export interface NodePayload {
  id: number;
  label: string;
  state: StatePayload;
}

export interface EdgePayload {
  id: number;
  src: number;
  dst: number;
  move: Record<string, unknown>;
  events?: EventPayload[];
}

export interface EventPayload {
  kind: string;
  pos?: Pos;
  detail: Record<string, unknown>;
}

export interface StepPayload {
  node: NodePayload;
  edge: EdgePayload;
  active: number;
  violation?: { pos: Pos; message: string };
}

export interface TracePayload {
  mode: string;
  active: number;
  nodes: NodePayload[];
  edges: EdgePayload[];
}

export interface MagicSiteInfo {
  site: number;
  task: string;
  pos: Pos;
}

export interface TaskParamInfo {
  name: string;
  type: string;
  width: number;
}

export interface ControllableTaskInfo {
  name: string;
  params: TaskParamInfo[];
}

export interface ProjectPayload {
  project_id: number;
  game: Record<string, unknown>;
  magic_sites: MagicSiteInfo[];
  controllable_tasks: ControllableTaskInfo[];
  files: { path: string; text: string }[];
}

export interface SolvePayload {
  realizable: boolean;
  stats: Record<string, unknown>;
  game: Record<string, unknown>;
}

export interface SessionCreatePayload {
  session_id: number;
  mode: string;
  root: NodePayload;
}

export interface PatchPayload {
  patch: {
    site: number;
    text: string;
    partitions: { action: string; sat_count: number; kind: string }[];
    empty: boolean;
    unreachable?: boolean;
  };
}

export interface ApplyPayload {
  open_sites: number[];
  fills: Record<string, { origin: string; text: string }>;
}

export interface ErrorPayload {
  error: { type: string; message: string; [k: string]: unknown };
}

export function isError(p: unknown): p is ErrorPayload {
  return typeof p === "object" && p !== null && "error" in p;
}
