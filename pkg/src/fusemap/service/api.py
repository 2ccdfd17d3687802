"""HTTP/WebSocket surface for the map console and scripted clients.

Endpoints: GET /map (stable artifacts, same schema as the YAML file),
GET /state (robot pose and run status), POST /command (goto / delete /
set_class_filter / save), WS /events (ordered push stream of pipeline
events, prefixed with a snapshot event).
"""

from __future__ import annotations

import asyncio
import queue
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles


def create_app(session, console_dir=None) -> FastAPI:
    app = FastAPI(title="fusemap")

    @app.get("/map")
    def get_map():
        return session.map_snapshot()

    @app.get("/state")
    def get_state():
        return session.state()

    @app.post("/command")
    async def post_command(command: dict):
        result = session.submit(command)
        if result.get("ok"):
            return result
        status = 404 if result.get("error") == "not_found" else 400
        return JSONResponse(result, status_code=status)

    @app.websocket("/events")
    async def events(ws: WebSocket):
        await ws.accept()
        q = session.hub.subscribe()
        try:
            await ws.send_json({"type": "snapshot", "map": session.map_snapshot(),
                                "state": session.state()})
            while True:
                try:
                    event = await asyncio.to_thread(q.get, True, 0.25)
                except queue.Empty:
                    # Heartbeat doubles as a disconnect probe.
                    await ws.send_json({"type": "ping"})
                    continue
                await ws.send_json(event)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            session.hub.unsubscribe(q)

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
