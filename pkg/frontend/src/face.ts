// Pure render model: UiState in, a describable watch face out. The DOM
// layer only copies these fields onto elements, so everything the user
// can see is testable without a browser.

import { ZONES, type ZoneName } from "./protocol.js";
import type { UiState } from "./store.js";

// Documented zone colors (Led element background).
export const ZONE_COLORS: Record<ZoneName, string> = {
  low: "#2f6fde", // blue: below the normal range
  normal: "#27a857", // green: inside the normal range
  high: "#d63b3b", // red: above the normal range
  warmup: "#f5f5f5", // white: sender estimate not usable yet
  stale: "#2b2b2b", // off: no frames inside the liveness window
  paused: "#2b2b2b", // off: receiving toggled off
};

export interface FaceModel {
  ledColor: string;
  zoneLabel: string;
  digitText: string; // the one scrolling digit
  bpmText: string; // full number, small print under the digit
  rangeText: string;
  badges: string[]; // PAUSED / ALARM
  alarmOn: boolean; // drives the looping tone
  errorText: string | null;
  faceKind: "live" | "link-down" | "bad-zone";
}

const LINK_DOWN_COLOR = "#555555";

export function renderFace(ui: UiState): FaceModel {
  if (!ui.connected || ui.last === null) {
    return {
      ledColor: LINK_DOWN_COLOR,
      zoneLabel: "LINK DOWN",
      digitText: "–",
      bpmText: "no connection to receiver",
      rangeText: "",
      badges: [],
      alarmOn: false,
      errorText: ui.lastError,
      faceKind: "link-down",
    };
  }
  const msg = ui.last;
  if (!(ZONES as readonly string[]).includes(msg.zone)) {
    return {
      ledColor: "#7a3fd1",
      zoneLabel: `UNKNOWN ZONE "${msg.zone}"`,
      digitText: "?",
      bpmText: "receiver sent an unrecognised state",
      rangeText: "",
      badges: [],
      alarmOn: false,
      errorText: ui.lastError,
      faceKind: "bad-zone",
    };
  }
  const zone = msg.zone as ZoneName;
  const badges: string[] = [];
  if (msg.paused) badges.push("PAUSED");
  if (msg.alarm) badges.push("ALARM");
  return {
    ledColor: ZONE_COLORS[zone],
    zoneLabel: zone.toUpperCase(),
    digitText: msg.digit === null ? "–" : String(msg.digit),
    bpmText: msg.bpm === null ? "" : `${msg.bpm} bpm`,
    rangeText: `normal ${msg.range.low}–${msg.range.high}`,
    badges,
    alarmOn: msg.alarm && !msg.paused,
    errorText: ui.lastError,
    faceKind: "live",
  };
}
