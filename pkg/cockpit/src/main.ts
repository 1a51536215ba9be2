// Browser entry point: wires the controls to a backend session and keeps the
// four view panels in sync with the cockpit state. Serve this next to the
// shared schemas/ directory (any static file server from the repo root).

import { CockpitClient } from "./client.js";
import { DEFAULT_AOIS } from "./controls.js";
import { SCHEMA_IDS, Validator } from "./protocol.js";
import { renderBubble, renderInstruction, renderTimeline, renderWorkspace } from "./render.js";

async function loadSchemas(): Promise<Record<string, object>> {
  const schemas: Record<string, object> = {};
  for (const id of SCHEMA_IDS) {
    const resp = await fetch(`/schemas/${id}.json`);
    if (!resp.ok) {
      throw new Error(`failed to load schema ${id}: HTTP ${resp.status}`);
    }
    schemas[id] = await resp.json();
  }
  return schemas;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const validator = new Validator(await loadSchemas());
  const params = new URLSearchParams(window.location.search);
  const session = params.get("session") ?? `cockpit-${Date.now()}`;
  const url = params.get("backend") ?? "ws://127.0.0.1:8765";

  // Virtual session clock: starts when the operator opens the session.
  const startedAt = Date.now();
  const nowMs = () => Date.now() - startedAt;

  const render = () => {
    el("bubble").innerHTML = renderBubble(client.state);
    el("workspace").innerHTML = renderWorkspace(client.state, nowMs());
    el("instruction").innerHTML = renderInstruction(client.state);
    el("timeline").innerHTML = renderTimeline(client.state);
  };

  const client = new CockpitClient(url, session, validator, { onUpdate: render });
  await client.connect();
  client.open();
  render();
  setInterval(render, 1000); // let glyph lifetimes expire visibly

  el("utterance-send").addEventListener("click", () => {
    const box = el<HTMLInputElement>("utterance-text");
    if (box.value.trim()) {
      client.send(client.frames.utterance(nowMs(), box.value));
      box.value = "";
    }
  });

  const aoiPicker = el<HTMLSelectElement>("aoi-picker");
  for (const aoi of DEFAULT_AOIS) {
    const option = document.createElement("option");
    option.value = aoi.aoiId;
    option.textContent = aoi.label;
    aoiPicker.appendChild(option);
  }
  el("gaze-send").addEventListener("click", () => {
    const aoi = DEFAULT_AOIS.find((a) => a.aoiId === aoiPicker.value);
    if (aoi) {
      client.send(client.frames.gazeBurst(nowMs(), aoi));
    }
  });

  el("hr-send").addEventListener("click", () => {
    const bpm = Number(el<HTMLInputElement>("hr-slider").value);
    const jitter = Number(el<HTMLInputElement>("hr-jitter").value);
    client.send(client.frames.heartRate(nowMs(), bpm, jitter));
  });

  el("step-complete").addEventListener("click", () => {
    const stepId = el<HTMLInputElement>("step-id").value || "s1";
    client.send(client.frames.stepComplete(nowMs(), stepId));
  });
}

start().catch((err) => {
  document.body.innerHTML = `<pre class="fatal">${String(err)}</pre>`;
});
