// Messages exchanged with the receiver's WebSocket bridge, plus the
// client-side validation that must run before anything is sent.

export const ZONES = ["low", "normal", "high", "warmup", "stale", "paused"] as const;
export type ZoneName = (typeof ZONES)[number];

export interface StateMessage {
  type: "state";
  bpm: number | null;
  zone: string; // validated against ZONES at render time; unknown -> error face
  paused: boolean;
  alarm: boolean;
  digit: number | null;
  range: { low: number; high: number };
  t_ms: number;
}

export interface ErrorMessage {
  type: "error";
  reason: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null;
}

function intOrNull(x: unknown): x is number | null {
  return x === null || typeof x === "number";
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!isRecord(data)) return null;
  if (data.type === "error" && typeof data.reason === "string") {
    return { type: "error", reason: data.reason };
  }
  if (
    data.type === "state" &&
    intOrNull(data.bpm) &&
    typeof data.zone === "string" &&
    typeof data.paused === "boolean" &&
    typeof data.alarm === "boolean" &&
    intOrNull(data.digit) &&
    isRecord(data.range) &&
    typeof data.range.low === "number" &&
    typeof data.range.high === "number" &&
    typeof data.t_ms === "number"
  ) {
    return {
      type: "state",
      bpm: data.bpm,
      zone: data.zone,
      paused: data.paused,
      alarm: data.alarm,
      digit: data.digit,
      range: { low: data.range.low, high: data.range.high },
      t_ms: data.t_ms,
    };
  }
  return null;
}

export function buildTogglePause(): string {
  return JSON.stringify({ type: "toggle_pause" });
}

// Same bounds the receiver enforces; anything else never leaves the client.
export function validateRange(low: number, high: number): string | null {
  if (!Number.isInteger(low) || !Number.isInteger(high)) {
    return "range bounds must be whole numbers";
  }
  if (!(30 <= low && low < high && high <= 220)) {
    return "need 30 <= low < high <= 220";
  }
  return null;
}

export function buildSetRange(low: number, high: number): string {
  const problem = validateRange(low, high);
  if (problem !== null) {
    throw new Error(problem);
  }
  return JSON.stringify({ type: "set_range", low, high });
}
