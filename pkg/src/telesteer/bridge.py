"""Live teleoperation service.

Exposes the simulation loop over a websocket so a human (or the bundled
browser cockpit) can steer while the predictive layer corrects.  Inbound
steering is sampled latest-wins at tick boundaries with zero-order hold
between messages, mirroring a held steering wheel.  Each session owns its
own engine and loop; nothing is shared across sessions.  The message
schema is documented field by field in docs/protocol.md and versioned in
the hello message.

Two operating modes exist at the app level: real time (a background task
paces ticks at the sampling period, counting overruns) and stepped (ticks
advance only on explicit step messages), the latter making automated
tests deterministic.
"""

from __future__ import annotations

import asyncio
import json
import math
import uuid
from dataclasses import dataclass, field as dataclass_field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .field import bound_rectangle
from .scenarios import Scenario, builtin_names, builtin_scenario, scenario_from_dict
from .simulate import SimEngine
from .simtrace import TickRecord

__all__ = ["PROTOCOL_VERSION", "Session", "SessionManager", "create_app"]

PROTOCOL_VERSION = 1
MODES = ("sim", "live")
_INTERVENTION_RAD = 0.5 * math.pi / 180.0
_MAX_SPEED = 30.0


def _state_message(session: "Session", record: TickRecord) -> dict:
    engine = session.engine
    return {
        "type": "state",
        "tick": engine.tick_index - 1,
        "t": record.t,
        "x": record.x,
        "y": record.y,
        "heading": record.heading,
        "delta_fbl": record.delta_fbl,
        "delta_ref": record.delta_ref,
        "delta_applied": record.delta_applied,
        "p_fl": record.p_fl,
        "p_fr": record.p_fr,
        "alpha": session.scenario.alpha,
        "intervention": abs(record.delta_applied - record.delta_ref)
        > _INTERVENTION_RAD,
        "fault": record.fault,
        "overruns": engine.overruns,
        "client_ts": session.last_client_ts,
    }


@dataclass
class Session:
    """One live or simulated-teleop run plus its attached sockets."""

    id: str
    scenario: Scenario
    mode: str
    assisted: bool
    engine: SimEngine
    running: bool = False
    latest_steer: float = 0.0
    last_client_ts: float | None = None
    sockets: list[WebSocket] = dataclass_field(default_factory=list)
    loop_task: asyncio.Task | None = None

    def hello_message(self) -> dict:
        sc = self.scenario
        contours = []
        for obs in sc.obstacles:
            bound = bound_rectangle(obs, sc.order)
            contours.append(
                {
                    "outline": [list(p) for p in obs.corners()],
                    "bound": [list(p) for p in bound.contour(0.0, 96)],
                }
            )
        return {
            "type": "hello",
            "version": PROTOCOL_VERSION,
            "session": self.id,
            "scenario": sc.name,
            "mode": self.mode,
            "assisted": self.assisted,
            "t_s": sc.mpc.t_s,
            "alpha": sc.alpha,
            "delta_limit": sc.mpc.delta_max,
            "speed": sc.speed,
            "vehicle": {
                "l_f": sc.vehicle.l_f,
                "l_r": sc.vehicle.l_r,
                "l_f_bumper": sc.vehicle.l_f_bumper,
                "width": sc.vehicle.width,
            },
            "path": [list(p) for p in sc.path_points],
            "obstacles": contours,
            "start": {"x": sc.start.x, "y": sc.start.y, "heading": sc.start.heading},
        }

    def tick_once(self, enforce_deadline: bool) -> dict:
        override = self.latest_steer if self.mode == "live" else None
        record = self.engine.tick(
            delta_ref_override=override, enforce_deadline=enforce_deadline
        )
        return _state_message(self, record)

    async def broadcast(self, message: dict) -> None:
        text = json.dumps(message)
        dead = []
        for ws in self.sockets:
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.detach(ws)

    def detach(self, ws: WebSocket) -> None:
        if ws in self.sockets:
            self.sockets.remove(ws)

    async def run_loop(self) -> None:
        """Real-time pacing: one tick per sampling period; when a tick
        lands late the schedule restarts from now instead of racing."""
        loop = asyncio.get_running_loop()
        t_s = self.scenario.mpc.t_s
        next_due = loop.time()
        while self.running:
            message = self.tick_once(enforce_deadline=True)
            await self.broadcast(message)
            next_due += t_s
            delay = next_due - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_due = loop.time()

    def reset(self) -> None:
        self.running = False
        self.engine = SimEngine(self.scenario, assisted=self.assisted)
        self.latest_steer = 0.0
        self.last_client_ts = None


class SessionManager:
    def __init__(self, realtime: bool) -> None:
        self.realtime = realtime
        self.sessions: dict[str, Session] = {}

    def open(self, scenario: Scenario, mode: str, assisted: bool) -> Session:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        session = Session(
            id=uuid.uuid4().hex[:12],
            scenario=scenario,
            mode=mode,
            assisted=assisted,
            engine=SimEngine(scenario, assisted=assisted),
        )
        self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise KeyError(session_id)
        return self.sessions[session_id]

    def close(self, session_id: str) -> None:
        session = self.sessions.pop(session_id, None)
        if session is not None:
            session.running = False
            if session.loop_task is not None:
                session.loop_task.cancel()


async def _handle_message(manager: SessionManager, session: Session, msg: dict) -> None:
    kind = msg.get("type")
    if kind == "steer":
        if "delta_ref" in msg:
            value = float(msg["delta_ref"])
        elif "normalized" in msg:
            norm = min(max(float(msg["normalized"]), -1.0), 1.0)
            value = norm * session.scenario.mpc.delta_max
        else:
            await session.broadcast(
                {"type": "error", "message": "steer needs delta_ref or normalized"}
            )
            return
        lim = session.scenario.mpc
        session.latest_steer = min(max(value, lim.delta_min), lim.delta_max)
        ts = msg.get("client_ts")
        session.last_client_ts = float(ts) if ts is not None else None
    elif kind == "set_speed":
        v = min(max(float(msg.get("v", 0.0)), 0.0), _MAX_SPEED)
        if not session.engine.fault:
            session.engine.v = v
    elif kind == "start":
        if not session.running:
            session.running = True
            if manager.realtime:
                session.loop_task = asyncio.create_task(session.run_loop())
    elif kind == "stop":
        session.running = False
        if session.loop_task is not None:
            session.loop_task.cancel()
            session.loop_task = None
    elif kind == "reset":
        if session.loop_task is not None:
            session.loop_task.cancel()
            session.loop_task = None
        session.reset()
    elif kind == "step":
        if manager.realtime:
            await session.broadcast(
                {"type": "error", "message": "step is only valid in stepped mode"}
            )
            return
        if not session.running:
            await session.broadcast(
                {"type": "error", "message": "session is paused; send start first"}
            )
            return
        n = int(msg.get("n", 1))
        for _ in range(max(0, n)):
            await session.broadcast(session.tick_once(enforce_deadline=False))
    else:
        await session.broadcast({"type": "error", "message": f"unknown type {kind!r}"})


def create_app(realtime: bool = True, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="telesteer bridge")
    manager = SessionManager(realtime=realtime)
    app.state.manager = manager

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": PROTOCOL_VERSION,
            "sessions": len(manager.sessions),
        }

    @app.get("/scenarios")
    def scenarios() -> dict:
        return {"builtin": list(builtin_names())}

    @app.post("/session")
    def open_session(body: dict) -> dict:
        spec = body.get("scenario", "parking_lot")
        try:
            if isinstance(spec, str):
                scenario = builtin_scenario(spec)
            elif isinstance(spec, dict):
                scenario = scenario_from_dict(spec)
            else:
                raise ValueError("scenario must be a name or a mapping")
            session = manager.open(
                scenario,
                mode=body.get("mode", "live"),
                assisted=bool(body.get("assisted", True)),
            )
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"session": session.id, "scenario": scenario.name}

    @app.delete("/session/{session_id}")
    def close_session(session_id: str) -> dict:
        if session_id not in manager.sessions:
            raise HTTPException(status_code=404, detail="no such session")
        manager.close(session_id)
        return {"closed": session_id}

    @app.websocket("/ws/{session_id}")
    async def ws_endpoint(ws: WebSocket, session_id: str) -> None:
        try:
            session = manager.get(session_id)
        except KeyError:
            await ws.close(code=4004)
            return
        await ws.accept()
        session.sockets.append(ws)
        await ws.send_text(json.dumps(session.hello_message()))
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("message must be an object")
                except ValueError:
                    await ws.send_text(
                        json.dumps({"type": "error", "message": "malformed message"})
                    )
                    continue
                await _handle_message(manager, session, msg)
        except WebSocketDisconnect:
            session.detach(ws)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="cockpit")

    return app
