// Connection-plus-last-message store. The UI is deliberately stateless
// beyond this: reconnecting reproduces the same face within one push.

import type { StateMessage } from "./protocol.js";

export interface UiState {
  connected: boolean;
  last: StateMessage | null;
  lastError: string | null;
}

export const INITIAL: UiState = { connected: false, last: null, lastError: null };

export type UiEvent =
  | { kind: "open" }
  | { kind: "close" }
  | { kind: "state"; msg: StateMessage }
  | { kind: "server_error"; reason: string }
  | { kind: "client_error"; reason: string }
  | { kind: "clear_error" };

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.kind) {
    case "open":
      return { ...state, connected: true };
    case "close":
      // a stale face must never masquerade as live data
      return { ...state, connected: false, last: null };
    case "state":
      return { ...state, last: event.msg, lastError: null };
    case "server_error":
    case "client_error":
      return { ...state, lastError: event.reason };
    case "clear_error":
      return { ...state, lastError: null };
  }
}

// The receiver beeps on entering HIGH from a data zone; the UI mirrors
// that rule from consecutive state pushes so the chirp needs no extra
// wire traffic.
export function chirpNeeded(prev: StateMessage | null, next: StateMessage): boolean {
  if (prev === null || next.paused) return false;
  return (prev.zone === "low" || prev.zone === "normal") && next.zone === "high";
}
