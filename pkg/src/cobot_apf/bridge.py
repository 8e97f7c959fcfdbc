"""Real-time bridge: streams per-tick state over a WebSocket and accepts
live hand-position (and free-drive drag) input.

One thread owns the simulation loop, paced to wall time so dt of
simulated time takes dt of real time. Clients get snapshots through
bounded per-client queues with drop-oldest overflow, so a stalled reader
never degrades the tick rate. Incoming hand messages overwrite a single
shared cell (last writer wins) that the loop samples once per tick.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .errors import CobotApfError, JointLimitViolation
from .scenario import Scenario
from .simulator import LiveTrack, initial_state, sim_step

HAND_POSITION_BOUND = 10.0  # m, sanity limit on |pos|
CLIENT_QUEUE_DEPTH = 4      # frames buffered per client before dropping oldest

UI_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class PortInUse(CobotApfError):
    pass


def state_message(state) -> dict:
    return {
        "type": "state",
        "t": state.t,
        "q": [float(v) for v in state.joints.q],
        "tcp": [float(v) for v in state.tcp.position],
        "v": [float(v) for v in state.v_tcp],
        "mode": state.mode.value,
        "hand": [float(v) for v in state.hand],
        "d_ro": state.d_ro,
        "forces": [float(v) for v in state.forces],
    }


def config_message(scenario: Scenario) -> dict:
    cfg = scenario.config
    return {
        "type": "config",
        "dt": cfg.dt,
        "d_at": cfg.thresholds.d_at,
        "d_act": cfg.thresholds.d_act,
        "d_dct": cfg.thresholds.d_dct,
        "v_max": cfg.gains.v_max,
        "waypoints": [[float(v) for v in w] for w in scenario.plan.waypoints],
    }


def parse_hand_message(raw: str):
    """Validated (pos, drag) from a client text frame, or None when the
    frame must be dropped (malformed, wrong type, out of bounds)."""
    try:
        msg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    if not isinstance(msg, dict) or msg.get("type") != "hand":
        return None
    pos = msg.get("pos")
    if not isinstance(pos, (list, tuple)) or len(pos) != 3:
        return None
    try:
        pos = [float(v) for v in pos]
    except (TypeError, ValueError):
        return None
    if not all(np.isfinite(pos)) or float(np.linalg.norm(pos)) > HAND_POSITION_BOUND:
        return None
    drag = msg.get("drag")
    if drag is not None:
        if not isinstance(drag, (list, tuple)) or len(drag) != 3:
            return None
        try:
            drag = [float(v) for v in drag]
        except (TypeError, ValueError):
            return None
        if not all(np.isfinite(drag)):
            return None
    return pos, drag


class BridgeServer:
    """Owns the paced simulation thread and the WebSocket fan-out."""

    def __init__(self, scenario: Scenario, port: int = 8090, quiet: bool = False):
        if not isinstance(scenario.track, LiveTrack):
            raise CobotApfError("serve needs a scenario with track source 'live'")
        if port != 0:
            import socket

            with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
                probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
                try:
                    probe.bind(("127.0.0.1", port))
                except OSError as exc:
                    raise PortInUse(f"port {port} is unavailable: {exc}") from exc
        self.scenario = scenario
        self.quiet = quiet
        self.track = scenario.track
        self.dropped_frames = 0
        self.rejected_messages = 0
        self._clients: dict[WebSocket, asyncio.Queue] = {}
        self._loop: asyncio.AbstractEventLoop | None = None
        self._stop = threading.Event()
        self._sim_thread: threading.Thread | None = None
        self._server = self._build_server(port)
        self._thread: threading.Thread | None = None

    # -- wiring ---------------------------------------------------------

    def _build_server(self, port: int) -> uvicorn.Server:
        app = FastAPI()

        @app.websocket("/ws")
        async def ws_endpoint(ws: WebSocket):
            await ws.accept()
            await ws.send_text(json.dumps(config_message(self.scenario)))
            queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_QUEUE_DEPTH)
            self._clients[ws] = queue
            sender = asyncio.create_task(self._send_frames(ws, queue))
            try:
                while True:
                    raw = await ws.receive_text()
                    parsed = parse_hand_message(raw)
                    if parsed is None:
                        self.rejected_messages += 1
                        continue
                    pos, drag = parsed
                    self.track.set_hand(pos, drag)
            except WebSocketDisconnect:
                pass
            finally:
                self._clients.pop(ws, None)
                sender.cancel()

        if UI_DIST.is_dir():
            app.mount("/", StaticFiles(directory=str(UI_DIST), html=True), name="ui")

        config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        return uvicorn.Server(config)

    async def _send_frames(self, ws: WebSocket, queue: asyncio.Queue):
        try:
            while True:
                frame = await queue.get()
                await ws.send_text(frame)
        except asyncio.CancelledError:
            pass
        except Exception:
            self._clients.pop(ws, None)

    def _broadcast(self, frame: str):
        # runs on the event loop; never awaits, so the sim thread never blocks
        for queue in list(self._clients.values()):
            if queue.full():
                try:
                    queue.get_nowait()
                    self.dropped_frames += 1
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(frame)

    # -- simulation loop -------------------------------------------------

    def _sim_loop(self):
        cfg = self.scenario.config
        plan = self.scenario.plan
        state = initial_state(cfg, self.track, plan)
        next_tick = time.monotonic()
        while not self._stop.is_set():
            # latest hand input applies at this tick boundary
            hand = self.track.sample(state.t)
            state = replace(state, hand=hand,
                            d_ro=float(np.linalg.norm(state.tcp.position - hand)))
            try:
                state = sim_step(state, cfg, self.track, plan)
            except JointLimitViolation as exc:
                if not self.quiet:
                    print(f"live run halted: {exc}")
                break
            frame = json.dumps(state_message(state))
            if self._loop is not None:
                self._loop.call_soon_threadsafe(self._broadcast, frame)
            next_tick += cfg.dt
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()  # fell behind; don't spiral

    # -- lifecycle --------------------------------------------------------

    def start(self):
        """Start the server in a background thread; returns once accepting."""
        self._thread = threading.Thread(target=self._run_server, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10.0
        while not self._server.started:
            if time.monotonic() > deadline or not self._thread.is_alive():
                raise CobotApfError("bridge server failed to start")
            time.sleep(0.01)
        self._sim_thread = threading.Thread(target=self._sim_loop, daemon=True)
        self._sim_thread.start()
        return self

    def _run_server(self):
        self._loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self._loop)
        try:
            self._loop.run_until_complete(self._server.serve())
        except SystemExit:
            pass
        finally:
            self._loop.close()

    @property
    def port(self) -> int:
        for server in self._server.servers or []:
            for sock in server.sockets:
                return sock.getsockname()[1]
        raise CobotApfError("server has no bound socket")

    def stop(self):
        self._stop.set()
        if self._sim_thread is not None:
            self._sim_thread.join(timeout=5)
        self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(scenario: Scenario, port: int = 8090, quiet: bool = False):
    """Blocking entry point used by the CLI; runs until interrupted."""
    bridge = BridgeServer(scenario, port=port, quiet=quiet)
    try:
        bridge.start()
    except CobotApfError:
        raise
    except OSError as exc:
        raise PortInUse(f"port {port} is unavailable: {exc}") from exc
    if not quiet:
        print(f"live bridge on ws://127.0.0.1:{bridge.port}/ws "
              f"(UI at http://127.0.0.1:{bridge.port}/ when built)")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        bridge.stop()
