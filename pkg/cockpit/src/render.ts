// HTML/SVG rendering of the cockpit state. Pure string builders so the view
// can be unit-tested without a browser; main.ts assigns the results to
// innerHTML.

import { DEFAULT_AOIS, type AoiEntry } from "./controls.js";
import type { CockpitState, Glyph } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBubble(state: CockpitState): string {
  if (!state.bubble) {
    return '<div class="bubble bubble-empty">No tutor message yet.</div>';
  }
  const { text, tone } = state.bubble;
  return (
    `<div class="bubble bubble-${tone}">` +
    `<span class="tone-badge">${tone}</span>` +
    `<p>${escapeHtml(text)}</p></div>`
  );
}

export function renderInstruction(state: CockpitState): string {
  if (!state.instruction) {
    return '<div class="instruction instruction-empty">No instruction update.</div>';
  }
  const { stepId, text, readingLevel } = state.instruction;
  return (
    `<div class="instruction" data-step="${stepId}">` +
    `<span class="level-badge level-${readingLevel}">${readingLevel}</span>` +
    `<p>${escapeHtml(text)}</p></div>`
  );
}

// Top-down workspace schematic: x maps right, y maps up, z is ignored.
const VIEW = { width: 400, height: 400, scale: 300, originX: 60, originY: 280 };

function project(centerM: [number, number, number]): { x: number; y: number } {
  return {
    x: VIEW.originX + centerM[0] * VIEW.scale,
    y: VIEW.originY - centerM[1] * VIEW.scale,
  };
}

function glyphPosition(glyph: Glyph, aois: AoiEntry[]): { x: number; y: number } | null {
  if (glyph.anchor.kind === "aoi") {
    const aoi = aois.find((a) => a.aoiId === glyph.anchor.aoi_id);
    return aoi ? project(aoi.centerM) : null;
  }
  if (glyph.anchor.position_m) {
    return project(glyph.anchor.position_m);
  }
  return null;
}

function rgba(color: [number, number, number, number]): string {
  const [r, g, b, a] = color;
  return `rgba(${Math.round(r * 255)},${Math.round(g * 255)},${Math.round(b * 255)},${a})`;
}

export function renderWorkspace(
  state: CockpitState,
  nowMs: number,
  aois: AoiEntry[] = DEFAULT_AOIS,
): string {
  const parts: string[] = [
    `<svg viewBox="0 0 ${VIEW.width} ${VIEW.height}" class="workspace">`,
  ];
  for (const aoi of aois) {
    const p = project(aoi.centerM);
    const r = aoi.radiusM * VIEW.scale;
    parts.push(
      `<circle class="aoi" data-aoi="${aoi.aoiId}" cx="${p.x}" cy="${p.y}" r="${r}"/>`,
      `<text class="aoi-label" x="${p.x}" y="${p.y + r + 12}">${escapeHtml(aoi.label)}</text>`,
    );
  }
  for (const glyph of state.glyphsAt(nowMs)) {
    const p = glyphPosition(glyph, aois);
    if (!p) {
      continue;
    }
    const size = 10 * glyph.scale;
    parts.push(
      `<g class="glyph glyph-${glyph.assetId}" data-asset="${glyph.assetId}" ` +
        `transform="translate(${p.x},${p.y})" fill="${rgba(glyph.colorRgba)}">` +
        `<circle r="${size}"/></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderTimeline(state: CockpitState, limit = 50): string {
  const rows = state.timeline
    .slice(-limit)
    .map(
      (e) =>
        `<li class="timeline-${e.kind}"><span class="t">${(e.tMs / 1000).toFixed(1)}s</span> ` +
        `<span class="k">${e.kind}</span> ${escapeHtml(e.summary)}</li>`,
    );
  return `<ol class="timeline">${rows.join("")}</ol>`;
}
