/** Browser bootstrap: wire DOM events to app gestures. */

import { Client } from "./api.js";
import { App } from "./app.js";

const SERVICE = (window as unknown as { SERVICE_URL?: string }).SERVICE_URL ??
  "http://127.0.0.1:4780";

const root = document.getElementById("app")!;
const client = new Client(SERVICE);
const app = new App(client, (html) => {
  root.innerHTML = html;
});

function argValues(task: string): string[] {
  const inputs = root.querySelectorAll<HTMLInputElement>(
    `input.arg[data-task="${task}"]`,
  );
  return Array.from(inputs)
    .map((el) => el.value.trim())
    .filter((v) => v.length > 0);
}

root.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;
  if (target.matches("button.env-step")) void app.stepEnv();
  else if (target.matches("button.single-step")) void app.singleStep();
  else if (target.matches("button.exit-block")) void app.submitAction("exit");
  else if (target.matches("button.action-send")) {
    const input = root.querySelector<HTMLInputElement>("input.action-text");
    if (input && input.value.trim()) void app.submitAction(input.value.trim());
  } else if (target.matches("button.call")) {
    const task = target.dataset.task!;
    void app.submitDialogAction(task, argValues(task));
  } else if (target.matches("button.generate")) {
    void app.clickGenerate(Number(target.dataset.site));
  } else if (target.matches("button.accept-fill")) {
    void app.acceptGenerated(Number(target.dataset.site));
  } else if (target.matches("button.save-fill")) {
    const site = Number(target.dataset.site);
    const area = root.querySelector<HTMLTextAreaElement>(
      `textarea.fill[data-site="${site}"]`,
    );
    if (area) void app.editMagicBlock(site, area.value);
  } else {
    const node = target.closest<SVGGElement>("g.node");
    if (node) void app.clickNode(Number(node.dataset.node));
  }
});

const picker = document.getElementById("spec-file") as HTMLInputElement | null;
picker?.addEventListener("change", async () => {
  const file = picker.files?.[0];
  if (!file) return;
  const text = await file.text();
  void app.openProject([{ path: file.name, text }]);
});

export { app };
