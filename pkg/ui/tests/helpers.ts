/** Shared test plumbing: recorded fixtures and a scripted fetch. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { FetchLike } from "../src/api.js";

export interface Exchange {
  endpoint: string;
  request: Record<string, unknown>;
  status: number;
  response: Record<string, unknown>;
}

const here = dirname(fileURLToPath(import.meta.url));

export function loadWalkthrough(): Exchange[] {
  const raw = readFileSync(join(here, "fixtures", "walkthrough.json"), "utf-8");
  return JSON.parse(raw) as Exchange[];
}

export function byEndpoint(recorded: Exchange[], endpoint: string): Exchange[] {
  return recorded.filter((e) => e.endpoint === endpoint);
}

/** A fetch that replays recorded exchanges and logs every call. */
export function scriptedFetch(recorded: Exchange[]): {
  fetchFn: FetchLike;
  calls: { path: string; body: Record<string, unknown> }[];
} {
  const queue = new Map<string, Exchange[]>();
  for (const e of recorded) {
    if (!queue.has(e.endpoint)) queue.set(e.endpoint, []);
    queue.get(e.endpoint)!.push(e);
  }
  const calls: { path: string; body: Record<string, unknown> }[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = JSON.parse(init.body) as Record<string, unknown>;
    calls.push({ path, body });
    const pending = queue.get(path);
    if (!pending || pending.length === 0) {
      throw new Error(`no recorded exchange for ${path}`);
    }
    const exchange = pending.shift()!;
    return {
      status: exchange.status,
      json: async () => exchange.response,
    };
  };
  return { fetchFn, calls };
}
