/** Pure rendering: view state in, HTML out.
 *
 * No game logic lives here — every displayed value originates from a
 * service payload, and rendering the same payloads always produces the
 * same markup (which is what makes page reloads reproducible).
 */

import type {
  ControllableTaskInfo,
  MagicSiteInfo,
  NodePayload,
  Pos,
  TracePayload,
} from "./types.js";

export interface FillView {
  origin: string;
  text: string;
}

export interface ViewState {
  files: { path: string; text: string }[];
  magicSites: MagicSiteInfo[];
  controllable: ControllableTaskInfo[];
  realizable: boolean | null;
  mode: string | null;
  trace: TracePayload | null;
  activeNode: NodePayload | null;
  lastEvent: string | null;
  fills: Record<string, FillView>;
  notice: string | null;
}

export function emptyView(): ViewState {
  return {
    files: [],
    magicSites: [],
    controllable: [],
    realizable: null,
    mode: null,
    trace: null,
    activeNode: null,
    lastEvent: null,
    fills: {},
    notice: null,
  };
}

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

// ----------------------------------------------------------------------
// panes

/** The source pane: one <pre> per file, the current line highlighted. */
export function renderSource(
  files: { path: string; text: string }[],
  highlight: Pos | null,
): string {
  const panes = files.map((f) => {
    const lines = f.text.split("\n").map((line, i) => {
      const ln = i + 1;
      const hot =
        highlight && highlight.file === f.path && highlight.line === ln;
      const cls = hot ? ' class="current-line"' : "";
      return `<span${cls} data-line="${ln}">${esc(line) || " "}</span>`;
    });
    return (
      `<section class="source-pane" data-file="${esc(f.path)}">` +
      `<h3>${esc(f.path)}</h3><pre>${lines.join("\n")}</pre></section>`
    );
  });
  return panes.join("");
}

/** The variable watch table of the active node. */
export function renderWatch(node: NodePayload | null): string {
  if (!node) return '<table class="watch"><tr><td>no state</td></tr></table>';
  const rows = Object.entries(node.state.values)
    .map(
      ([name, v]) =>
        `<tr><td>${esc(name)}</td><td class="value">${esc(v.text)}</td></tr>`,
    )
    .join("");
  const err = node.state.err
    ? '<tr class="error-row"><td colspan="2">assertion violated</td></tr>'
    : "";
  return `<table class="watch"><tr><th>variable</th><th>value</th></tr>${rows}${err}</table>`;
}

/** The trace graph: a layered DAG by step depth, back edges curved. */
export function renderTrace(trace: TracePayload | null): string {
  if (!trace) return '<svg class="trace" width="40" height="40"></svg>';
  const depth = new Map<number, number>();
  depth.set(0, 0);
  for (const e of trace.edges) {
    if (!depth.has(e.dst)) depth.set(e.dst, (depth.get(e.src) ?? 0) + 1);
  }
  const perRow = new Map<number, number>();
  const coords = new Map<number, { x: number; y: number }>();
  for (const n of trace.nodes) {
    const d = depth.get(n.id) ?? 0;
    const slot = perRow.get(d) ?? 0;
    perRow.set(d, slot + 1);
    coords.set(n.id, { x: 40 + slot * 90, y: 30 + d * 60 });
  }
  // the path root -> active stays vivid; abandoned branches grey out
  const onPath = new Set<number>([trace.active]);
  let cursor = trace.active;
  for (let guard = 0; guard < trace.edges.length + 1; guard++) {
    const into = trace.edges.find((e) => e.dst === cursor);
    if (!into) break;
    onPath.add(into.src);
    cursor = into.src;
  }
  const parts: string[] = [];
  for (const e of trace.edges) {
    const a = coords.get(e.src);
    const b = coords.get(e.dst);
    if (!a || !b) continue; // endpoint not in this (partial) trace
    const grey = onPath.has(e.src) && onPath.has(e.dst) ? "" : " abandoned";
    if ((depth.get(e.dst) ?? 0) <= (depth.get(e.src) ?? 0)) {
      // a back edge: draw it curved
      const mx = (a.x + b.x) / 2 + 45;
      const my = (a.y + b.y) / 2;
      parts.push(
        `<path class="edge back${grey}" d="M${a.x},${a.y} Q${mx},${my} ${b.x},${b.y}" fill="none"/>`,
      );
    } else {
      parts.push(
        `<line class="edge${grey}" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`,
      );
    }
  }
  for (const n of trace.nodes) {
    const c = coords.get(n.id)!;
    const classes = ["node"];
    if (n.id === trace.active) classes.push("active");
    if (!onPath.has(n.id)) classes.push("abandoned");
    if (n.state.err) classes.push("error");
    parts.push(
      `<g class="${classes.join(" ")}" data-node="${n.id}">` +
        `<circle cx="${c.x}" cy="${c.y}" r="14"/>` +
        `<text x="${c.x}" y="${c.y + 4}">${n.id}</text>` +
        `<title>${esc(n.label)}</title></g>`,
    );
  }
  const xs = [...coords.values()].map((c) => c.x);
  const ys = [...coords.values()].map((c) => c.y);
  const width = (xs.length ? Math.max(...xs) : 0) + 50;
  const height = (ys.length ? Math.max(...ys) : 0) + 40;
  return `<svg class="trace" width="${width}" height="${height}">${parts.join("")}</svg>`;
}

/** The action dialog: free text plus one button per controllable task. */
export function renderActionDialog(
  controllable: ControllableTaskInfo[],
  enabled: boolean,
): string {
  const dis = enabled ? "" : " disabled";
  const buttons = controllable
    .map((t) => {
      const args = t.params
        .map(
          (p) =>
            `<input class="arg" data-task="${esc(t.name)}" data-param="${esc(p.name)}"` +
            ` placeholder="${esc(p.name)}: ${esc(p.type)}" size="6"${dis}>`,
        )
        .join("");
      return (
        `<div class="action-row"><button class="call" data-task="${esc(t.name)}"${dis}>` +
        `${esc(t.name)}</button>${args}</div>`
      );
    })
    .join("");
  return (
    `<div class="action-dialog">${buttons}` +
    `<div class="action-row"><button class="exit-block"${dis}>exit block</button></div>` +
    `<div class="action-row"><input class="action-text" placeholder="jb.cmd_put()"${dis}>` +
    `<button class="action-send"${dis}>run</button></div></div>`
  );
}

/** Magic-block editors: user text stays editable, generated text is
 * visually distinguished; each block has its generate button. */
export function renderMagicEditor(
  sites: MagicSiteInfo[],
  fills: Record<string, FillView>,
): string {
  const blocks = sites.map((s) => {
    const fill = fills[String(s.site)];
    const origin = fill?.origin ?? "open";
    const text = fill?.text ?? "";
    return (
      `<div class="magic-block origin-${origin}" data-site="${s.site}">` +
      `<header>#${s.site} ${esc(s.task)} <em>${origin}</em>` +
      `<button class="generate" data-site="${s.site}">generate</button>` +
      `<button class="accept-fill" data-site="${s.site}">accept</button></header>` +
      `<textarea class="fill" data-site="${s.site}" rows="4">${esc(text)}</textarea>` +
      `<button class="save-fill" data-site="${s.site}">save as user code</button>` +
      `</div>`
    );
  });
  return `<div class="magic-editor">${blocks.join("")}</div>`;
}

// ----------------------------------------------------------------------
// the page

export function renderSession(view: ViewState): string {
  const active = view.activeNode;
  const highlight = activeHighlight(view);
  const verdict =
    view.realizable === null
      ? "unsolved"
      : view.realizable
        ? "realizable"
        : "unrealizable";
  const canAct = !!active && active.state.controller_turn;
  const canStep = !!active && !active.state.controller_turn && !active.state.err;
  const notice = view.notice
    ? `<div class="notice">${esc(view.notice)}</div>`
    : "";
  const event = view.lastEvent
    ? `<div class="last-event">${esc(view.lastEvent)}</div>`
    : "";
  return (
    `<div class="session" data-mode="${esc(view.mode ?? "")}">` +
    `<header class="verdict ${verdict}">${verdict}${view.mode ? ` — ${esc(view.mode)}` : ""}</header>` +
    notice +
    `<main>` +
    `<div class="left">${renderSource(view.files, highlight)}</div>` +
    `<div class="middle">` +
    `<div class="controls">` +
    `<button class="env-step"${canStep ? "" : " disabled"}>step environment</button>` +
    `<button class="single-step"${active ? "" : " disabled"}>single step</button>` +
    `</div>` +
    renderActionDialog(view.controllable, canAct) +
    event +
    renderWatch(active) +
    `</div>` +
    `<div class="right">` +
    renderTrace(view.trace) +
    renderMagicEditor(view.magicSites, view.fills) +
    `</div>` +
    `</main></div>`
  );
}

export function activeHighlight(view: ViewState): Pos | null {
  const site = view.activeNode?.state.at_magic_site;
  if (site === null || site === undefined) return null;
  const info = view.magicSites.find((s) => s.site === site);
  return info ? info.pos : null;
}
