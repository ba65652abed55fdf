"""Receiver runtime: one event loop funnelling frames, ticks and commands.

All inputs are serialized into a single totally ordered event stream and
applied through the pure state machine; the daemon only adds plumbing:
UDP intake, a periodic tick, the session log, headless terminal output
and state fan-out to UI subscribers.
"""

from __future__ import annotations

import asyncio
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from ..clock import Clock, SystemClock
from ..protocol import DecodeError, decode
from . import machine
from .machine import Event

log = logging.getLogger(__name__)

TICK_INTERVAL_MS = 250
PUSH_INTERVAL_MS = 1000


def event_json(event: Event) -> dict:
    if isinstance(event, machine.FrameArrived):
        f = event.frame
        return {
            "type": "frame",
            "now_ms": event.now_ms,
            "msg_type": f.msg_type.name.lower(),
            "group_id": f.group_id,
            "seq": f.seq,
            "bpm": f.bpm,
            "flags": f.flags,
        }
    if isinstance(event, machine.Tick):
        return {"type": "tick", "now_ms": event.now_ms}
    if isinstance(event, machine.TogglePause):
        return {"type": "toggle_pause", "now_ms": event.now_ms}
    return {
        "type": "set_range",
        "low": event.low,
        "high": event.high,
        "now_ms": event.now_ms,
    }


class ReceiverCore:
    """State holder plus side channels (log, headless output, subscribers)."""

    def __init__(
        self,
        state: machine.ReceiverState,
        clock: Optional[Clock] = None,
        log_path: Optional[Path] = None,
        headless_out: Optional[TextIO] = None,
    ):
        self.state = state
        self.clock = clock or SystemClock()
        self._logf = open(log_path, "a") if log_path else None
        self._headless_out = headless_out
        self._subscribers: list[asyncio.Queue] = []
        self._last_pushed: Optional[dict] = None
        self._last_push_ms: Optional[int] = None

    # -- event intake -------------------------------------------------------

    def dispatch(self, event: Event) -> list[machine.Effect]:
        """Apply one event. InvalidRangeError propagates, state unchanged."""
        self.state, effects = machine.step(self.state, event)
        if self._logf:
            record = {
                "event": event_json(event),
                "zone": self.state.zone.value,
                "effects": [machine.effect_json(e) for e in effects],
            }
            self._logf.write(json.dumps(record) + "\n")
            self._logf.flush()  # survive hard termination; rate is a few lines/s
        self._maybe_push(event.now_ms)
        return effects

    def handle_command(self, msg: object, now_ms: Optional[int] = None) -> Optional[dict]:
        """Apply a UI command; returns an error message dict or None on success."""
        now = now_ms if now_ms is not None else self.clock.now_ms()
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            return {"type": "error", "reason": "malformed command"}
        kind = msg["type"]
        if kind == "toggle_pause":
            self.dispatch(machine.TogglePause(now))
            return None
        if kind == "set_range":
            low, high = msg.get("low"), msg.get("high")
            ints = all(isinstance(v, int) and not isinstance(v, bool) for v in (low, high))
            if not ints:
                return {"type": "error", "reason": "set_range needs integer low and high"}
            try:
                self.dispatch(machine.SetRange(low, high, now))
            except machine.InvalidRangeError as exc:
                return {"type": "error", "reason": str(exc)}
            return None
        return {"type": "error", "reason": f"unknown command type {kind!r}"}

    # -- state fan-out --------------------------------------------------------

    def current_json(self) -> dict:
        return machine.state_json(self.state)

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue()
        self._subscribers.append(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        if queue in self._subscribers:
            self._subscribers.remove(queue)

    def _maybe_push(self, now_ms: int) -> None:
        snapshot = self.current_json()
        due = self._last_push_ms is None or now_ms - self._last_push_ms >= PUSH_INTERVAL_MS
        # a bare t_ms bump is not a state change; the heartbeat covers freshness
        def body(js: Optional[dict]):
            return None if js is None else {k: v for k, v in js.items() if k != "t_ms"}

        if body(snapshot) == body(self._last_pushed) and not due:
            return
        self._last_pushed = snapshot
        self._last_push_ms = now_ms
        for queue in self._subscribers:
            queue.put_nowait(snapshot)
        if self._headless_out:
            bpm = snapshot["bpm"] if snapshot["bpm"] is not None else "-"
            digit = snapshot["digit"] if snapshot["digit"] is not None else "-"
            self._headless_out.write(
                f"{snapshot['t_ms']:>9}ms bpm={bpm:>3} zone={snapshot['zone']:<7}"
                f" digit={digit} paused={int(snapshot['paused'])}"
                f" alarm={int(snapshot['alarm'])}\n"
            )
            self._headless_out.flush()

    def close(self) -> None:
        if self._logf:
            self._logf.close()
            self._logf = None


class _FrameProtocol(asyncio.DatagramProtocol):
    def __init__(self, core: ReceiverCore):
        self.core = core
        self.rejected = 0

    def datagram_received(self, data: bytes, addr) -> None:
        try:
            frame = decode(data)
        except DecodeError as exc:
            self.rejected += 1
            log.debug("dropped datagram from %s: %s", addr, exc)
            return
        self.core.dispatch(machine.FrameArrived(frame, self.core.clock.now_ms()))


@dataclass
class ReceiverDaemonConfig:
    listen: tuple[str, int] = ("0.0.0.0", 45450)
    group_id: int = 0
    range: machine.NormalRange = field(default_factory=machine.NormalRange)
    alarm_after_ms: int = 15000
    ui_port: int = 8080
    headless: bool = False
    log_path: Optional[Path] = None
    ui_assets: Optional[Path] = None


async def run_receiver(
    cfg: ReceiverDaemonConfig,
    clock: Optional[Clock] = None,
    ready: Optional[asyncio.Event] = None,
    stop: Optional[asyncio.Event] = None,
    core: Optional[ReceiverCore] = None,
) -> None:
    """Run UDP intake, ticker and (unless headless) the UI bridge until stopped."""
    if core is None:
        core = ReceiverCore(
            machine.initial_state(
                group_id=cfg.group_id, range=cfg.range, alarm_after_ms=cfg.alarm_after_ms
            ),
            clock=clock,
            log_path=cfg.log_path,
            headless_out=sys.stdout if cfg.headless else None,
        )
    loop = asyncio.get_running_loop()
    transport, _ = await loop.create_datagram_endpoint(
        lambda: _FrameProtocol(core), local_addr=cfg.listen
    )
    log.info("listening for frames on %s:%d (group %d)", *cfg.listen, cfg.group_id)

    stop = stop or asyncio.Event()

    async def tick_loop() -> None:
        while not stop.is_set():
            core.dispatch(machine.Tick(core.clock.now_ms()))
            await asyncio.sleep(TICK_INTERVAL_MS / 1000.0)

    tasks = [asyncio.create_task(tick_loop())]
    server = None
    if not cfg.headless:
        import uvicorn

        from .bridge import build_ui_app

        ui_app = build_ui_app(core, cfg.ui_assets)
        server = uvicorn.Server(
            uvicorn.Config(ui_app, host="0.0.0.0", port=cfg.ui_port, log_level="warning")
        )
        tasks.append(asyncio.create_task(server.serve()))
        log.info("UI bridge on ws://0.0.0.0:%d/ws", cfg.ui_port)

    if ready is not None:
        ready.set()
    try:
        await stop.wait()
    finally:
        transport.close()
        if server is not None:
            server.should_exit = True
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        core.close()
