/** Async flows between the gateway client and the pure reducer. The store
 * is the only mutable cell; every transition goes through dispatch so the
 * event log stays replayable. */

import { ApiError, GatewayClient } from "./api.js";
import { initialState, reduce, selectedIds } from "./state.js";
import type { UiEvent, UiState } from "./state.js";

export interface Store {
  getState(): UiState;
  dispatch(event: UiEvent): void;
  readonly log: UiEvent[];
}

export function createStore(
  onChange?: (state: UiState) => void,
  start: UiState = initialState,
): Store {
  let state = start;
  const log: UiEvent[] = [];
  return {
    getState: () => state,
    dispatch(event: UiEvent) {
      state = reduce(state, event);
      log.push(event);
      if (onChange) onChange(state);
    },
    log,
  };
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}

export class Controller {
  constructor(
    private readonly api: GatewayClient,
    private readonly store: Store,
  ) {}

  setMode(mode: "search" | "agent"): void {
    this.store.dispatch({ type: "mode_set", mode });
  }

  setQuery(query: string): void {
    this.store.dispatch({ type: "query_set", query });
  }

  toggleSelection(videoId: string): void {
    this.store.dispatch({ type: "selection_toggled", videoId });
  }

  toggleSummary(videoId: string): void {
    this.store.dispatch({ type: "summary_toggled", videoId });
  }

  /** Submit the query box: /v1/search in search mode, a session message in
   * agent mode. No-op while a request is in flight or the box is blank. */
  async submit(): Promise<void> {
    const state = this.store.getState();
    const query = state.query.trim();
    if (query === "" || state.pending) return;
    if (state.mode === "search") {
      await this.runSearch(query);
    } else {
      await this.runAgentTurn(query);
    }
  }

  private async runSearch(query: string): Promise<void> {
    this.store.dispatch({ type: "request_started" });
    try {
      const response = await this.api.search(query);
      this.store.dispatch({ type: "search_succeeded", results: response.results });
    } catch (error) {
      this.store.dispatch({ type: "request_failed", message: describe(error) });
    }
  }

  private async runAgentTurn(text: string): Promise<void> {
    this.store.dispatch({ type: "request_started" });
    this.store.dispatch({ type: "message_sent", text });
    this.store.dispatch({ type: "query_set", query: "" });
    try {
      let sessionId = this.store.getState().sessionId;
      if (sessionId === null) {
        sessionId = await this.api.createSession();
        this.store.dispatch({ type: "session_created", sessionId });
      }
      const selected = selectedIds(this.store.getState());
      const response = await this.api.sendMessage(
        sessionId,
        text,
        selected.length > 0 ? selected : undefined,
      );
      this.store.dispatch({
        type: "message_succeeded",
        assistant: response.assistant,
        route: response.route,
        videos: response.videos ?? null,
      });
    } catch (error) {
      this.store.dispatch({ type: "request_failed", message: describe(error) });
    }
  }
}
