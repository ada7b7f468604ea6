/** Pure UI state: a reducer over serializable events. The view is a function
 * of the event log, so replaying a log reproduces the screen exactly. */

import type { ScoredVideo } from "./api.js";

export type Mode = "search" | "agent";

export interface ResultRow {
  videoId: string;
  rank: number;
  visionScore: number;
  audioScore: number;
  fusedScore: number;
  summary: string | null;
  thumbnailUrl: string | null;
  selected: boolean;
  expanded: boolean;
}

export interface ChatLine {
  role: "user" | "assistant";
  text: string;
}

export interface UiState {
  mode: Mode;
  sessionId: string | null;
  query: string;
  results: ResultRow[];
  transcript: ChatLine[];
  pending: boolean;
  error: string | null;
}

export type UiEvent =
  | { type: "mode_set"; mode: Mode }
  | { type: "query_set"; query: string }
  | { type: "request_started" }
  | { type: "search_succeeded"; results: ScoredVideo[] }
  | { type: "session_created"; sessionId: string }
  | { type: "message_sent"; text: string }
  | { type: "message_succeeded"; assistant: string; route: "search" | "chat"; videos: ScoredVideo[] | null }
  | { type: "request_failed"; message: string }
  | { type: "selection_toggled"; videoId: string }
  | { type: "summary_toggled"; videoId: string };

export const initialState: UiState = {
  mode: "search",
  sessionId: null,
  query: "",
  results: [],
  transcript: [],
  pending: false,
  error: null,
};

function toRows(videos: ScoredVideo[]): ResultRow[] {
  return videos.map((video) => ({
    videoId: video.video_id,
    rank: video.rank,
    visionScore: video.vision_score,
    audioScore: video.audio_score,
    fusedScore: video.fused_score,
    summary: video.summary ?? null,
    thumbnailUrl: video.thumbnail_url ?? null,
    selected: false,
    expanded: false,
  }));
}

export function selectedIds(state: UiState): string[] {
  return state.results.filter((row) => row.selected).map((row) => row.videoId);
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.type) {
    case "mode_set": {
      if (event.mode === state.mode) return state;
      // selection only exists in agent mode
      const results =
        event.mode === "search"
          ? state.results.map((row) => (row.selected ? { ...row, selected: false } : row))
          : state.results;
      return { ...state, mode: event.mode, results };
    }
    case "query_set":
      return { ...state, query: event.query };
    case "request_started":
      // one in-flight request at a time; a second submit is a no-op
      if (state.pending) return state;
      return { ...state, pending: true, error: null };
    case "search_succeeded":
      // new results replace the old set; stale selections cannot survive
      return { ...state, results: toRows(event.results), pending: false, error: null };
    case "session_created":
      return { ...state, sessionId: event.sessionId };
    case "message_sent":
      return { ...state, transcript: [...state.transcript, { role: "user", text: event.text }] };
    case "message_succeeded": {
      const transcript: ChatLine[] = [
        ...state.transcript,
        { role: "assistant", text: event.assistant },
      ];
      // a search turn replaces the result set; a chat turn touches only the transcript
      const results = event.videos === null ? state.results : toRows(event.videos);
      return { ...state, transcript, results, pending: false, error: null };
    }
    case "request_failed":
      // surface the banner, keep everything the user was looking at
      return { ...state, pending: false, error: event.message };
    case "selection_toggled": {
      if (state.mode !== "agent") return state;
      const results = state.results.map((row) =>
        row.videoId === event.videoId ? { ...row, selected: !row.selected } : row,
      );
      return { ...state, results };
    }
    case "summary_toggled": {
      const results = state.results.map((row) =>
        row.videoId === event.videoId ? { ...row, expanded: !row.expanded } : row,
      );
      return { ...state, results };
    }
  }
}

export function replay(events: UiEvent[], start: UiState = initialState): UiState {
  return events.reduce(reduce, start);
}
