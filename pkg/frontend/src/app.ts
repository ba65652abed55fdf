// Headless UI controller: owns the store, derives chirps and the face
// model, and validates commands. The DOM layer and the tests both drive
// this through the same four dependency hooks.

import { renderFace, type FaceModel } from "./face.js";
import {
  buildSetRange,
  buildTogglePause,
  parseServerMessage,
  validateRange,
  type StateMessage,
} from "./protocol.js";
import { INITIAL, chirpNeeded, reduce, type UiState } from "./store.js";

export interface AppDeps {
  send: (payload: string) => boolean;
  chirp: () => void;
  setAlarm: (on: boolean) => void;
  render: (face: FaceModel) => void;
}

export class UiController {
  private state: UiState = INITIAL;
  private prevShown: StateMessage | null = null;

  constructor(private deps: AppDeps) {}

  start(): void {
    this.apply(this.state);
  }

  handleOpen(): void {
    this.apply(reduce(this.state, { kind: "open" }));
  }

  handleClose(): void {
    this.prevShown = null;
    this.apply(reduce(this.state, { kind: "close" }));
  }

  handleRaw(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) return; // unparsable pushes change nothing
    if (msg.type === "error") {
      this.apply(reduce(this.state, { kind: "server_error", reason: msg.reason }));
      return;
    }
    if (chirpNeeded(this.prevShown, msg)) this.deps.chirp();
    this.prevShown = msg;
    this.apply(reduce(this.state, { kind: "state", msg }));
  }

  togglePause(): void {
    if (!this.deps.send(buildTogglePause())) {
      this.apply(reduce(this.state, { kind: "client_error", reason: "not connected" }));
    }
  }

  applyRange(lowRaw: string, highRaw: string): void {
    const low = Number(lowRaw);
    const high = Number(highRaw);
    const problem = validateRange(low, high);
    if (problem !== null) {
      this.apply(reduce(this.state, { kind: "client_error", reason: problem }));
      return;
    }
    if (!this.deps.send(buildSetRange(low, high))) {
      this.apply(reduce(this.state, { kind: "client_error", reason: "not connected" }));
    }
  }

  current(): UiState {
    return this.state;
  }

  private apply(next: UiState): void {
    this.state = next;
    const face = renderFace(next);
    this.deps.setAlarm(face.alarmOn);
    this.deps.render(face);
  }
}
