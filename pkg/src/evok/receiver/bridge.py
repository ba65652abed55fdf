"""WebSocket bridge between the receiver core and browser UIs.

Outbound: the state JSON from machine.state_json, sent on connect, on
every state change and at least once per second.  Inbound commands:
{"type": "toggle_pause"} and {"type": "set_range", "low": int, "high": int}.
Invalid commands get {"type": "error", "reason": ...} and change nothing.
The same port serves the static UI assets when a build directory exists.
"""

from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .daemon import ReceiverCore

log = logging.getLogger(__name__)


def build_ui_app(core: ReceiverCore, assets_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="evok receiver bridge")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        queue = core.subscribe()
        await ws.send_json(core.current_json())

        async def pump() -> None:
            try:
                while True:
                    await ws.send_json(await queue.get())
            except (WebSocketDisconnect, RuntimeError):
                pass  # client went away mid-send; the receive loop cleans up

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "reason": "invalid JSON"})
                    continue
                reply = core.handle_command(msg)
                if reply is not None:
                    await ws.send_json(reply)
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            core.unsubscribe(queue)

    if assets_dir is not None and Path(assets_dir).is_dir():
        app.mount("/", StaticFiles(directory=assets_dir, html=True), name="ui")
        log.info("serving UI assets from %s", assets_dir)

    return app
