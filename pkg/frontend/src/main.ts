// DOM bootstrap: bind elements to the headless controller and the
// reconnecting socket. No logic lives here.

import { UiController } from "./app.js";
import { Alerter } from "./audio.js";
import type { FaceModel } from "./face.js";
import { ReconnectingSocket } from "./socket.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const led = el<HTMLDivElement>("led");
const digit = el<HTMLDivElement>("digit");
const zoneLabel = el<HTMLDivElement>("zone");
const bpmLine = el<HTMLDivElement>("bpm");
const rangeLine = el<HTMLDivElement>("rangeNow");
const badges = el<HTMLDivElement>("badges");
const errorLine = el<HTMLDivElement>("error");

function paint(face: FaceModel): void {
  led.style.background = face.ledColor;
  led.className = face.alarmOn ? "led alarm" : "led";
  digit.textContent = face.digitText;
  zoneLabel.textContent = face.zoneLabel;
  bpmLine.textContent = face.bpmText;
  rangeLine.textContent = face.rangeText;
  badges.textContent = face.badges.join("  ");
  errorLine.textContent = face.errorText ?? "";
  document.body.dataset.face = face.faceKind;
}

const alerter = new Alerter();
const socket = new ReconnectingSocket(`ws://${location.host}/ws`, {
  onOpen: () => controller.handleOpen(),
  onClose: () => controller.handleClose(),
  onMessage: (raw) => controller.handleRaw(raw),
});
const controller = new UiController({
  send: (payload) => socket.send(payload),
  chirp: () => alerter.chirp(),
  setAlarm: (on) => alerter.setAlarm(on),
  render: paint,
});

el<HTMLButtonElement>("pause").onclick = () => controller.togglePause();
el<HTMLButtonElement>("apply").onclick = () =>
  controller.applyRange(el<HTMLInputElement>("low").value, el<HTMLInputElement>("high").value);

controller.start();
socket.connect();
