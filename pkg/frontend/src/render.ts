/** Pure HTML-string renderer: UiState in, markup out. No DOM access, so the
 * same function backs the browser view, the snapshot tests, and the gated
 * integration checks. Interaction points carry data-action attributes for
 * the event delegation in app.ts. */

import type { ResultRow, UiState } from "./state.js";

export const SUMMARY_LIMIT = 400;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function score(value: number): string {
  return value.toFixed(4);
}

function modeToggle(state: UiState): string {
  const button = (mode: "search" | "agent", label: string) =>
    `<button type="button" data-action="mode" data-mode="${mode}" aria-pressed="${state.mode === mode}">${label}</button>`;
  return `<nav class="modes">${button("search", "Search")}${button("agent", "Agent")}</nav>`;
}

function queryForm(state: UiState): string {
  const disabled = state.pending ? " disabled" : "";
  const submitDisabled = state.pending || state.query.trim() === "" ? " disabled" : "";
  const label = state.mode === "search" ? "Search" : "Send";
  return (
    `<form data-action="submit" class="query">` +
    `<input name="query" data-action="query" value="${escapeHtml(state.query)}"` +
    ` placeholder="Describe the video you are looking for"${disabled}>` +
    `<button type="submit"${submitDisabled}>${label}</button>` +
    `</form>`
  );
}

function summaryBlock(row: ResultRow): string {
  if (row.summary === null) return "";
  const full = row.summary;
  if (full.length <= SUMMARY_LIMIT) {
    return `<p class="summary">${escapeHtml(full)}</p>`;
  }
  const text = row.expanded ? full : full.slice(0, SUMMARY_LIMIT) + "…";
  const label = row.expanded ? "less" : "more";
  return (
    `<p class="summary">${escapeHtml(text)}</p>` +
    `<button type="button" class="expand" data-action="expand"` +
    ` data-video="${escapeHtml(row.videoId)}" aria-expanded="${row.expanded}">${label}</button>`
  );
}

function thumbnail(row: ResultRow): string {
  if (row.thumbnailUrl === null) {
    return `<div class="thumb placeholder" aria-hidden="true"></div>`;
  }
  return `<img class="thumb" src="${escapeHtml(row.thumbnailUrl)}" alt="">`;
}

function resultCard(row: ResultRow, mode: UiState["mode"]): string {
  const id = escapeHtml(row.videoId);
  const checkbox =
    mode === "agent"
      ? `<input type="checkbox" data-action="select" data-video="${id}"` +
        `${row.selected ? " checked" : ""} aria-label="select ${id}">`
      : "";
  return (
    `<li class="card${row.selected ? " selected" : ""}" data-video="${id}">` +
    checkbox +
    thumbnail(row) +
    `<span class="rank">#${row.rank}</span> <span class="video-id">${id}</span>` +
    `<span class="scores">fused ${score(row.fusedScore)} · vision ${score(row.visionScore)}` +
    ` · audio ${score(row.audioScore)}</span>` +
    summaryBlock(row) +
    `</li>`
  );
}

function resultList(state: UiState): string {
  if (state.results.length === 0) return `<p class="empty">No results yet.</p>`;
  const cards = state.results.map((row) => resultCard(row, state.mode)).join("");
  return `<ol class="results">${cards}</ol>`;
}

function transcript(state: UiState): string {
  if (state.mode !== "agent") return "";
  const lines = state.transcript
    .map(
      (line) =>
        `<p class="line ${line.role}"><span class="role">${line.role}</span> ` +
        `${escapeHtml(line.text)}</p>`,
    )
    .join("");
  return `<section class="transcript" aria-label="conversation">${lines}</section>`;
}

export function render(state: UiState): string {
  const banner = state.error
    ? `<div class="banner error" role="alert">${escapeHtml(state.error)}</div>`
    : "";
  const pending = state.pending ? `<div class="pending" role="status">Working…</div>` : "";
  return (
    `<main class="console" data-mode="${state.mode}">` +
    `<h1>Video search console</h1>` +
    modeToggle(state) +
    queryForm(state) +
    banner +
    pending +
    resultList(state) +
    transcript(state) +
    `</main>`
  );
}
