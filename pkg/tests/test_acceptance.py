"""Acceptance suite: one test per release criterion, one printed verdict
line each. Run with `pytest tests/test_acceptance.py -s` to see the lines
as they pass; the whole suite is CPU-only and finishes in well under two
minutes."""

import functools
import json
import time
from dataclasses import replace

import numpy as np
import pytest

from cobot_apf import controller as ctl
from cobot_apf import experiments as ex
from cobot_apf import scenario as scn
from cobot_apf.controller import ControlGains, Mode, ObstacleClass, ObstacleKind
from cobot_apf.kinematics import jacobian
from cobot_apf.models import default_arm
from cobot_apf.simulator import LiveTrack, StaticTrack, run
from cobot_apf.supervisor import Thresholds, step_mode

from test_kinematics import fd_jacobian_linear, random_model


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL", flush=True)
                raise
            print(f"[ACCEPTANCE] {name}: PASS", flush=True)
            return result

        return inner

    return wrap


@pytest.fixture(scope="module")
def theta_sweep():
    return ex.run_theta_sweep()


@pytest.fixture(scope="module")
def dat_sweep():
    return ex.run_dat_sweep()


@pytest.fixture(scope="module")
def triangle_runs():
    baseline = ex.run_triangle_task()
    intruded = ex.run_triangle_task(ex.triangle_hand_track())
    return baseline, intruded


@pytest.fixture(scope="module")
def pickplace_runs():
    baseline = ex.run_pick_place_task()
    intruded = ex.run_pick_place_task(ex.pick_place_hand_track())
    return baseline, intruded


@criterion("jacobian correctness (100 random configs, fd error < 1e-5)")
def test_jacobian_correctness():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        model = random_model(rng)
        q = rng.uniform(-np.pi, np.pi, 6)
        J = jacobian(model, q)
        assert np.max(np.abs(J[:3] - fd_jacobian_linear(model, q))) < 1e-5


@criterion("controller unit suite (saturation, inverse-square, perpendicularity, "
           "sign rule, boundary, blend endpoints)")
def test_controller_unit_suite():
    gains = ControlGains()
    rng = np.random.default_rng(7)
    # saturation: every feedback component bounded by k_pc1
    for _ in range(200):
        e = rng.uniform(-50, 50, 3)
        v = ctl.position_velocity(e, np.zeros(3), np.zeros(3), gains)
        assert np.all(np.abs(v) <= gains.k_pc1 + 1e-12)
    # inverse-square law of the direct repulsive force
    for rho in np.linspace(ctl.RHO_MIN, 0.2, 25):
        F = ctl.repulsive_force_1([0, 0, 0], [rho, 0, 0], gains.k_ca1)
        assert np.linalg.norm(F) * rho * rho == pytest.approx(gains.k_ca1, rel=1e-9)
    # perpendicularity and base-orientation sign of the rotational forces
    for _ in range(200):
        x_r = rng.uniform(-1, 1, 3)
        x_o = x_r + rng.uniform(-0.3, 0.3, 3)
        if np.linalg.norm(x_o - x_r) < 1e-3:
            continue
        inputs = ctl.ControlInputs(x_r=x_r, v_r=rng.uniform(-0.2, 0.2, 3),
                                   x_g=rng.uniform(-1, 1, 3), xdot_g=np.zeros(3), x_o=x_o)
        b = ctl.repulsive_velocity(inputs, ObstacleClass(ObstacleKind.TYPE1_IMMINENT, 0.0), gains)
        n_ro = (x_o - x_r) / np.linalg.norm(x_o - x_r)
        assert abs(float(np.dot(b.f_rep2, n_ro))) < 1e-9
        assert abs(float(np.dot(b.f_rep3, n_ro))) < 1e-9
        for f, c in ((b.f_rep2, b.c1), (b.f_rep3, b.c2)):
            if np.linalg.norm(f) > 0:
                n_b = f / np.linalg.norm(f) * c  # unsigned direction
                assert c * float(np.dot(n_b, -x_r)) >= -1e-12
    # classification boundary strictness at theta_obs +/- 1e-6 rad
    theta = gains.theta_obs
    for off, kind in ((-1e-6, ObstacleKind.TYPE1_IMMINENT),
                      (+1e-6, ObstacleKind.TYPE2_NON_IMMINENT)):
        ang = theta + off
        v = np.array([np.cos(ang), np.sin(ang), 0.0]) * 0.1
        got = ctl.classify_obstacle(v, [0, 0, 0], [1.0, 0, 0], theta)
        assert got.kind is kind
    # blend endpoints: w(0) = 1, w(inf) -> 0
    v_pc, v_rep = np.array([0.1, 0, 0]), np.array([0, 0.2, 0])
    assert np.array_equal(ctl.blend(v_pc, v_rep, 0.0, gains.tau), v_rep)
    assert np.array_equal(ctl.blend(v_pc, v_rep, 1e3, gains.tau), v_pc)


@criterion("supervisor exhaustiveness (24 transition cases + hysteresis hold)")
def test_supervisor_exhaustiveness():
    th = Thresholds(d_at=0.2, d_act=0.1, d_dct=0.2)
    type1 = ObstacleClass(ObstacleKind.TYPE1_IMMINENT, 0.1)
    type2 = ObstacleClass(ObstacleKind.TYPE2_NON_IMMINENT, 1.0)

    def quoted_rules(prev, d_ro, kind):
        if prev is Mode.FREE_DRIVE and d_ro <= th.d_dct:
            return Mode.FREE_DRIVE
        if d_ro < th.d_act:
            return Mode.FREE_DRIVE
        if d_ro < th.d_at:
            return Mode.AVOID_TYPE1 if kind is ObstacleKind.TYPE1_IMMINENT else Mode.AVOID_TYPE2
        return Mode.POSITION

    cases = 0
    for prev in (Mode.POSITION, Mode.AVOID_TYPE1, Mode.AVOID_TYPE2, Mode.FREE_DRIVE):
        for d_ro in (0.05, 0.15, 0.25):
            for cls in (type1, type2):
                assert step_mode(prev, d_ro, cls, th) is quoted_rules(prev, d_ro, cls.kind)
                cases += 1
    assert cases == 24
    for d_ro in np.linspace(0.0, th.d_dct, 41):
        assert step_mode(Mode.FREE_DRIVE, float(d_ro), type2, th) is Mode.FREE_DRIVE


@criterion("approach-angle sweep: min clearance non-decreasing, goals reached")
def test_theta_sweep_reproduction(theta_sweep):
    assert [v for v, _, _ in theta_sweep] == [35.0, 40.0, 45.0, 50.0]
    mins = [report.min_d_ro for _, report, _ in theta_sweep]
    for a, b in zip(mins, mins[1:]):
        assert b >= a - 1e-3, f"clearance ranking violated: {mins}"
    for value, _, log in theta_sweep:
        final = log.final_state
        assert final.plan_complete, f"theta={value} did not reach the goal"
        assert np.linalg.norm(final.tcp.position - ex.POINT_B) < 0.011


@criterion("avoidance-radius sweep: onset within v_max*dt, path non-decreasing")
def test_dat_sweep_reproduction(dat_sweep):
    assert [v for v, _, _ in dat_sweep] == [0.1, 0.2, 0.3]
    onset_tolerance = 0.2 * 0.1  # v_max * dt
    paths = []
    for value, report, log in dat_sweep:
        _, d_onset = ex.avoidance_onset(log)
        assert abs(d_onset - value) <= onset_tolerance, \
            f"onset {d_onset:.3f} not within {onset_tolerance} of {value}"
        paths.append(report.path_length)
    for a, b in zip(paths, paths[1:]):
        assert b >= a, f"path-length ranking violated: {paths}"


@criterion("triangle task: completes, slower than baseline, avoidance seen, clearance > 0.02")
def test_triangle_reproduction(triangle_runs):
    (base_metrics, base_log), (metrics, log) = triangle_runs
    assert log.final_state.goals_reached == 3
    assert base_log.final_state.goals_reached == 3
    assert metrics.duration > base_metrics.duration
    assert metrics.time_in_avoidance > 0
    assert metrics.min_d_ro > 0.02


@criterion("pick-and-place task: free-drive episode, 4 sub-plans, no contact")
def test_pick_place_reproduction(pickplace_runs):
    (base_metrics, base_log), (metrics, log) = pickplace_runs
    assert base_metrics.time_in_freedrive == 0.0
    assert base_log.final_state.plan_complete
    assert metrics.time_in_freedrive > 0
    assert log.final_state.plan_complete
    assert len(ex.split_pick_place_log(log)) == 4
    assert metrics.reached_goals == 8
    assert all(r.d_ro > ctl.RHO_MIN for r in log.records)
    assert metrics.time_in_avoidance > 0
    assert metrics.duration > base_metrics.duration


@criterion("determinism and dt-robustness")
def test_determinism_and_dt():
    cfg = ex.calibration_config()
    track = StaticTrack(ex.AB_MIDPOINT)
    log_a = run(cfg, track, ex.ab_plan())
    log_b = run(cfg, track, ex.ab_plan())
    assert scn.log_to_csv_text(log_a) == scn.log_to_csv_text(log_b)
    fine = run(replace(cfg, dt=0.05), track, ex.ab_plan())
    delta = np.linalg.norm(log_a.final_state.tcp.position - fine.final_state.tcp.position)
    assert delta < 0.005, f"dt halving moved the final TCP by {delta * 1000:.2f} mm"


@criterion("randomized safety: 200 seeded tracks, clearance > 0.02 in >= 98%")
def test_randomized_safety(tmp_path):
    result = ex.run_random_safety(n_runs=200, seed=0, counterexample_dir=tmp_path)
    files = sorted(tmp_path.glob("counterexample_*.scenario.yaml"))
    assert len(files) == len(result.violations)
    if files:  # each counterexample replays to the recorded clearance
        replay = scn.parse_scenario(files[0])
        log = run(replay.config, replay.track, replay.plan)
        assert min(r.d_ro for r in log.records) == pytest.approx(
            result.violations[0][1], abs=1e-9)
    assert result.pass_rate >= 0.98, \
        f"pass rate {result.pass_rate:.3f}, violations {result.violations}"


@criterion("bridge protocol: pacing within 10%, hand applied within a tick, round-trip")
def test_bridge_protocol():
    from websockets.sync.client import connect

    from cobot_apf.bridge import BridgeServer, parse_hand_message

    scenario = scn.Scenario(config=ex.evaluation_config(duration_max=3600.0),
                            track=LiveTrack(), plan=ex.triangle_plan())
    server = BridgeServer(scenario, port=0, quiet=True)
    server.start()
    try:
        slow = connect(f"ws://127.0.0.1:{server.port}/ws")
        slow.recv(timeout=5)  # hello; never read again: must not stall the loop
        with connect(f"ws://127.0.0.1:{server.port}/ws") as fast:
            json.loads(fast.recv(timeout=5))  # hello

            def next_state():
                while True:
                    msg = json.loads(fast.recv(timeout=5))
                    if msg["type"] == "state":
                        return msg

            first = next_state()
            t0 = time.monotonic()
            frames = [next_state() for _ in range(15)]
            elapsed = time.monotonic() - t0
            sim_span = frames[-1]["t"] - first["t"]
            assert abs(elapsed / sim_span - 1.0) < 0.10, \
                f"tick pacing off by {abs(elapsed / sim_span - 1) * 100:.1f}%"
            # hand message lands within one tick of the next boundary
            target = [1.0, 1.0, 1.0]
            fast.send(json.dumps({"type": "hand", "pos": target}))
            applied_after = None
            for k in range(3):
                state = next_state()
                if np.allclose(state["hand"], target):
                    applied_after = k
                    break
            assert applied_after is not None and applied_after <= 1
            # schema round-trip: no field lost or altered
            msg = {"type": "hand", "pos": [0.1, 0.2, 0.3], "drag": [0.0, 0.01, 0.0]}
            assert parse_hand_message(json.dumps(msg)) == ([0.1, 0.2, 0.3], [0.0, 0.01, 0.0])
            state_round = json.loads(json.dumps(frames[0]))
            assert state_round == frames[0]
        slow.close()
    finally:
        server.stop()
