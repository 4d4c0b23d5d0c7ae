"""WebSocket service exposing a live session on /ws.

Frames fan out to every connected client; command messages coming back on the
same socket are applied through the session's serialized queue and answered
with acks. GET / serves the operator console page when a frontend build is
available next to the package (frontend/dist), else a minimal status page.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, HTMLResponse

from .session import (
    LiveSession,
    SessionError,
    ack_to_wire,
    command_from_wire,
    frame_to_wire,
)

__all__ = ["create_app", "serve"]

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>entrainlab session</title></head>
<body>
<h1>entrainlab session service</h1>
<p>Telemetry websocket at <code>/ws</code>. No console build found; build the
frontend (<code>npm run build</code> in frontend/) to serve the operator UI here.</p>
</body></html>
"""


def _frontend_dist() -> Path | None:
    # repo layout: frontend/dist next to the package source or the CWD
    candidates = [
        Path(__file__).resolve().parents[2] / "frontend" / "dist",
        Path.cwd() / "frontend" / "dist",
    ]
    for cand in candidates:
        if (cand / "index.html").exists():
            return cand
    return None


def create_app(session: LiveSession) -> FastAPI:
    app = FastAPI(title="entrainlab session")

    @app.get("/")
    async def index():
        dist = _frontend_dist()
        if dist is not None:
            return FileResponse(dist / "index.html")
        return HTMLResponse(_FALLBACK_PAGE)

    @app.get("/console.js")
    async def console_js():
        dist = _frontend_dist()
        if dist is not None and (dist / "console.js").exists():
            return FileResponse(dist / "console.js", media_type="text/javascript")
        return HTMLResponse("// no frontend build", media_type="text/javascript")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        sub = session.subscribe()
        loop = asyncio.get_running_loop()
        send_lock = asyncio.Lock()

        async def pump_frames():
            while True:
                frame = await loop.run_in_executor(None, _next_frame, sub)
                if frame is None:
                    async with send_lock:
                        await ws.send_text(
                            json.dumps({"type": "close", "reason": sub.close_reason or "stopped"})
                        )
                    return
                async with send_lock:
                    await ws.send_text(json.dumps(frame_to_wire(frame)))

        async def pump_commands():
            while True:
                text = await ws.receive_text()
                try:
                    cmd = command_from_wire(json.loads(text))
                except (ValueError, json.JSONDecodeError) as exc:
                    async with send_lock:
                        await ws.send_text(
                            json.dumps({"type": "ack", "id": "", "ok": False, "err": str(exc)})
                        )
                    continue
                try:
                    ack = await loop.run_in_executor(None, session.handle_command, cmd)
                except SessionError as exc:
                    ack = None
                    async with send_lock:
                        await ws.send_text(
                            json.dumps(
                                {"type": "ack", "id": cmd.command_id, "ok": False, "err": str(exc)}
                            )
                        )
                if ack is not None:
                    async with send_lock:
                        await ws.send_text(json.dumps(ack_to_wire(ack)))

        tasks = [asyncio.create_task(pump_frames()), asyncio.create_task(pump_commands())]
        try:
            done, pending = await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            for task in tasks:
                task.cancel()
            sub._close("client gone")

    return app


def _next_frame(sub):
    try:
        return sub.get(timeout=None)
    except TimeoutError:  # pragma: no cover - no timeout given
        return None


def serve(session: LiveSession, bind: str = "127.0.0.1", port: int = 8765):
    """Run the service until interrupted (blocking)."""
    import uvicorn

    app = create_app(session)
    uvicorn.run(app, host=bind, port=port, log_level="warning")
