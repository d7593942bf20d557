"""WebSocket transport for live caretaker sessions.

The tick loop runs as a background task that owns all simulation state and
outlives any single connection: a client disconnect leaves the session
running with zero stimuli, and a reconnecting client re-attaches to it. At
most one client is attached at a time. Network receipt communicates with the
loop only through the service's pending-message queue, drained once per tick.
JSON text frames over the socket are the wire protocol (see PROTOCOL.md);
WebSocket framing provides the length delimiting.
"""

from __future__ import annotations

import asyncio
import logging
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .service import SessionService

log = logging.getLogger(__name__)


class GatewaySession:
    """One running session plus the (at most one) attached client."""

    def __init__(self, service: SessionService, speed: float) -> None:
        self.service = service
        self.speed = speed
        self.outbox: asyncio.Queue | None = None
        self.task: asyncio.Task | None = None

    @property
    def client_attached(self) -> bool:
        return self.outbox is not None

    def attach(self) -> asyncio.Queue:
        if self.outbox is not None:
            raise RuntimeError("session already has a client")
        self.outbox = asyncio.Queue()
        return self.outbox

    def detach(self) -> None:
        if self.outbox is not None:
            self.outbox = None
            self.service.note_disconnect()

    async def run(self) -> None:
        interval = (
            1.0 / (self.service.params.tick_hz * self.speed) if self.speed > 0 else 0.0
        )
        next_deadline = time.monotonic() + interval
        while not self.service.done:
            frames = self.service.advance_tick()
            if self.outbox is not None:
                for frame in frames:
                    self.outbox.put_nowait(frame)
            if interval > 0:
                delay = next_deadline - time.monotonic()
                next_deadline += interval
                await asyncio.sleep(max(0.0, delay))
            else:
                await asyncio.sleep(0)  # yield so the reader task can run


def create_app(
    service_factory,
    speed: float = 1.0,
    log_path: str | Path | None = None,
) -> FastAPI:
    """Build the gateway app.

    ``speed`` scales wall-clock pacing (1.0 = real time at the configured
    tick rate; 0 = unpaced, as fast as the loop runs). The finished session's
    log lands in ``app.state.completed_log`` and, when given, at ``log_path``.
    """
    app = FastAPI(title="caresim gateway")
    app.state.gateway = None
    app.state.completed_log = None

    def finish(gateway: GatewaySession) -> None:
        completed = gateway.service.to_log()
        app.state.completed_log = completed
        if log_path is not None:
            completed.save(log_path)
            log.info("session log written to %s", log_path)

    @app.websocket("/session")
    async def session_socket(ws: WebSocket) -> None:
        await ws.accept()
        gateway: GatewaySession | None = app.state.gateway
        if gateway is None or (gateway.task is not None and gateway.task.done()):
            gateway = GatewaySession(service_factory(), speed)
            app.state.gateway = gateway

            async def run_and_finish() -> None:
                try:
                    await gateway.run()
                finally:
                    finish(gateway)

            gateway.task = asyncio.create_task(run_and_finish())
        if gateway.client_attached:
            await ws.send_json({"type": "error", "reason": "session already has a client"})
            await ws.close()
            return

        outbox = gateway.attach()

        async def sender() -> None:
            while True:
                frame = await outbox.get()
                await ws.send_json(frame)

        sender_task = asyncio.create_task(sender())
        try:
            while True:
                try:
                    message = await ws.receive_json()
                except ValueError:
                    outbox.put_nowait({"type": "error", "reason": "frame is not valid JSON"})
                    continue
                error = gateway.service.ingest(message)
                if error is not None:
                    outbox.put_nowait(error)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            sender_task.cancel()
            gateway.detach()

    return app


def serve(
    service_factory,
    host: str = "127.0.0.1",
    port: int = 8765,
    speed: float = 1.0,
    log_path: str | Path | None = None,
) -> None:
    """Run the gateway until interrupted."""
    import uvicorn

    app = create_app(service_factory, speed=speed, log_path=log_path)
    uvicorn.run(app, host=host, port=port, log_level="info")
