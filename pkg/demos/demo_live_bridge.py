"""
Driving the live bridge from a script
======================================

Starts the WebSocket bridge on a free port, connects as a client, and
steers the virtual hand: first into the avoidance band, then close enough
to pin the arm into free-drive, then pulls the TCP sideways with a drag
velocity. Mode transitions print as they stream back. The same protocol
is what the browser UI speaks (`cobot-apf serve` + frontend/).
"""

import json
import time

import numpy as np
from websockets.sync.client import connect

from cobot_apf import experiments as ex
from cobot_apf.bridge import BridgeServer
from cobot_apf.scenario import Scenario
from cobot_apf.simulator import LiveTrack

scenario = Scenario(config=ex.evaluation_config(duration_max=3600.0),
                    track=LiveTrack(), plan=ex.triangle_plan())
server = BridgeServer(scenario, port=0, quiet=True).start()
print(f"bridge on ws://127.0.0.1:{server.port}/ws")

with connect(f"ws://127.0.0.1:{server.port}/ws") as ws:
    config = json.loads(ws.recv(timeout=5))
    print("scenario echo:", {k: config[k] for k in ("d_at", "d_act", "d_dct", "dt")})

    def next_state():
        while True:
            msg = json.loads(ws.recv(timeout=5))
            if msg["type"] == "state":
                return msg

    last_mode = None

    def watch(seconds):
        global last_mode
        state = None
        for _ in range(int(seconds / config["dt"])):
            state = next_state()
            if state["mode"] != last_mode:
                print(f"  t={state['t']:6.1f}s mode -> {state['mode']}"
                      f" (d_ro={state['d_ro']:.3f} m)")
                last_mode = state["mode"]
        return state

    print("\nrobot cycling the triangle, hand far away")
    state = watch(2.0)

    print("\nplacing the hand 0.15 m from the TCP (avoidance band)")
    tcp = np.array(state["tcp"])
    ws.send(json.dumps({"type": "hand", "pos": (tcp + [0.15, 0, 0]).tolist()}))
    state = watch(2.0)

    print("\nmoving the hand to 0.05 m (free-drive pin)")
    tcp = np.array(state["tcp"])
    ws.send(json.dumps({"type": "hand", "pos": (tcp + [0.05, 0, 0]).tolist()}))
    state = watch(1.5)

    print("\npulling the pinned TCP sideways with a drag velocity")
    hand = np.array(state["hand"])
    tcp0 = np.array(state["tcp"])
    ws.send(json.dumps({"type": "hand", "pos": hand.tolist(), "drag": [0, 0.1, 0]}))
    state = watch(1.5)
    moved = np.array(state["tcp"]) - tcp0
    print(f"  TCP displaced by {moved.round(3).tolist()} m under drag")

    print("\nreleasing: hand far away again")
    ws.send(json.dumps({"type": "hand", "pos": [5, 5, 5]}))
    watch(2.0)

server.stop()
print("done")
