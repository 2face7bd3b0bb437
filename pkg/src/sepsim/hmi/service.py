"""Operator workplace backend.

One thread owns the paced simulation; the web layer talks to it through a
command queue and a latest-wins snapshot feed. Clients connect over a web
socket carrying JSON messages both ways: snapshots out, commands in, one
ack per command keyed by command_id.
"""

from __future__ import annotations

import asyncio
import concurrent.futures
import contextlib
import queue
import threading
import time

from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from ..kernel import tick
from ..world import SimWorld

COMMAND_KINDS = (
    "stop_pump", "start_pump", "set_valve", "set_setpoint",
    "emergency_stop", "reset_latch", "set_blacklist", "start_jam", "stop_jam",
)

PUBLISH_INTERVAL_S = 0.2
ACK_TIMEOUT_S = 5.0


class LiveSimulation:
    """Wall-paced wrapper around one world.

    pace is simulated seconds per wall second. All world access goes
    through the internal lock so snapshots never straddle a tick.
    """

    def __init__(self, world: SimWorld, pace: float = 1.0):
        self.world = world
        self.pace = pace
        self.audit: list[dict] = []
        self.latest: dict | None = None
        self._lock = threading.Lock()
        self._pending: queue.Queue = queue.Queue()
        self._futures: dict[str, concurrent.futures.Future] = {}
        self._subscribers: list = []
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        world.on_command_result = self._command_applied

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="sim", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def _run(self) -> None:
        wall_start = time.monotonic()
        with self._lock:
            sim_start = self.world.clock.now
        next_publish = 0.0
        while not self._stop.is_set():
            wall = time.monotonic() - wall_start
            self._apply_pending()
            with self._lock:
                # Catch up to the pace target, but never more than two
                # simulated seconds per pass so a host stall cannot wedge
                # the lock.
                target = min(sim_start + wall * self.pace, self.world.clock.now + 2.0)
                while self.world.clock.now < target:
                    tick(self.world)
            if wall >= next_publish:
                self._publish()
                next_publish = wall + PUBLISH_INTERVAL_S
            time.sleep(0.005)

    # -- commands ----------------------------------------------------------

    def submit(self, command_id: str, kind: str, args: dict) -> concurrent.futures.Future:
        """Queue a command for the next tick; the future resolves on its ack."""
        fut: concurrent.futures.Future = concurrent.futures.Future()
        if kind not in COMMAND_KINDS:
            fut.set_result((False, f"unknown command kind {kind!r}"))
            self._audit(command_id, kind, args, accepted=False, reason="unknown kind")
            return fut
        self._futures[command_id] = fut
        self._pending.put({"command_id": command_id, "kind": kind, "args": args})
        return fut

    def _apply_pending(self) -> None:
        while True:
            try:
                cmd = self._pending.get_nowait()
            except queue.Empty:
                return
            with self._lock:
                t_next = (self.world.clock.ticks + 1) * self.world.clock.step
                if cmd["kind"] == "emergency_stop":
                    # Always accepted; lands as a trip, which outranks every
                    # other event in its slot.
                    self.world.request_emergency_stop("emergency stop from operator")
                    self._resolve(cmd, True, None, t_next)
                else:
                    self.world.schedule_command(t_next, cmd)

    def _command_applied(self, cmd: dict, accepted: bool, reason: str | None) -> None:
        # Runs on the simulation thread during event dispatch.
        self._resolve(cmd, accepted, reason, self.world.clock.now)

    def _resolve(self, cmd: dict, accepted: bool, reason: str | None, sim_time: float) -> None:
        command_id = cmd.get("command_id", "")
        self._audit(command_id, cmd["kind"], cmd.get("args") or {}, accepted, reason, sim_time)
        fut = self._futures.pop(command_id, None)
        if fut is not None and not fut.done():
            fut.set_result((accepted, reason))

    def _audit(self, command_id, kind, args, accepted, reason, sim_time=None) -> None:
        self.audit.append(
            {
                "sim_time": self.world.clock.now if sim_time is None else sim_time,
                "command_id": command_id,
                "kind": kind,
                "args": args,
                "accepted": accepted,
                "reason": reason,
            }
        )

    # -- snapshots ---------------------------------------------------------

    def subscribe(self, callback) -> None:
        self._subscribers.append(callback)

    def unsubscribe(self, callback) -> None:
        with contextlib.suppress(ValueError):
            self._subscribers.remove(callback)

    def _publish(self) -> None:
        with self._lock:
            snap = self.world.snapshot()
        self.latest = snap
        for callback in list(self._subscribers):
            callback(snap)


def create_app(sim: LiveSimulation, token: str = "") -> FastAPI:
    """Web front of one live simulation.

    An empty token disables auth (bench use). Otherwise /ws and /state
    require it, as a bearer header or ?token= parameter; /health stays open.
    """
    app = FastAPI(title="separator operator service")
    app.state.sim = sim

    def authorized(request_token: str | None, header: str | None) -> bool:
        if not token:
            return True
        if request_token == token:
            return True
        return header == f"Bearer {token}"

    @app.on_event("startup")
    async def _start() -> None:
        sim.start()

    @app.on_event("shutdown")
    async def _shutdown() -> None:
        sim.stop()

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "sim_time": sim.world.clock.now}

    @app.get("/state")
    async def state(request: Request) -> JSONResponse:
        if not authorized(request.query_params.get("token"), request.headers.get("authorization")):
            raise HTTPException(status_code=401, detail="bad token")
        if sim.latest is None:
            raise HTTPException(status_code=404, detail="no snapshot yet")
        return JSONResponse(sim.latest)

    @app.websocket("/ws")
    async def ws(socket: WebSocket) -> None:
        if not authorized(socket.query_params.get("token"), socket.headers.get("authorization")):
            await socket.close(code=4401)
            return
        await socket.accept()
        loop = asyncio.get_running_loop()
        feed: asyncio.Queue = asyncio.Queue(maxsize=1)

        def push(snap: dict) -> None:
            loop.call_soon_threadsafe(_offer, feed, snap)

        sim.subscribe(push)
        if sim.latest is not None:
            _offer(feed, sim.latest)
        sender = asyncio.create_task(_send_snapshots(socket, feed))
        try:
            while True:
                msg = await socket.receive_json()
                await _handle_message(socket, sim, msg)
        except WebSocketDisconnect:
            pass
        finally:
            sim.unsubscribe(push)
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender

    return app


def _offer(feed: asyncio.Queue, snap: dict) -> None:
    # Latest wins: a slow consumer sees fresh state, never a backlog.
    if feed.full():
        feed.get_nowait()
    feed.put_nowait(snap)


async def _send_snapshots(socket: WebSocket, feed: asyncio.Queue) -> None:
    while True:
        snap = await feed.get()
        await socket.send_json({"type": "snapshot", "snapshot": snap})


async def _handle_message(socket: WebSocket, sim: LiveSimulation, msg) -> None:
    if not isinstance(msg, dict) or msg.get("type") != "command":
        await socket.send_json({"type": "error", "reason": "expected a command message"})
        return
    command_id = msg.get("command_id")
    kind = msg.get("kind")
    if not command_id or not isinstance(kind, str):
        await socket.send_json({"type": "error", "reason": "command_id and kind are required"})
        return
    args = msg.get("args") or {}
    fut = sim.submit(str(command_id), kind, args)
    try:
        accepted, reason = await asyncio.wait_for(asyncio.wrap_future(fut), ACK_TIMEOUT_S)
    except asyncio.TimeoutError:
        accepted, reason = False, "command timed out waiting for the simulation"
    ack = {"type": "ack", "command_id": command_id, "status": "accepted" if accepted else "rejected"}
    if reason:
        ack["reason"] = reason
    await socket.send_json(ack)


def serve(cfg=None, seed: int = 1, host: str = "127.0.0.1", port: int = 8000,
          pace: float = 1.0, token: str = "") -> None:
    """Build the world (from a recipe if given) and block serving it."""
    import uvicorn

    if cfg is not None:
        from ..scenarios import build_world

        world = build_world(cfg, seed)
    else:
        world = SimWorld(seed=seed)
    sim = LiveSimulation(world, pace=pace)
    app = create_app(sim, token=token)
    uvicorn.run(app, host=host, port=port, log_level="warning")
