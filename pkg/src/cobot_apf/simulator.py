"""Deterministic fixed-step simulation loop: samples the obstacle track,
classifies, supervises the mode, runs the controller, maps the Cartesian
command through damped least squares, and integrates joint rates with
explicit Euler. Produces a per-tick trajectory log.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

import numpy as np

from . import controller as ctl
from .controller import ControlGains, ControlInputs, Mode, ObstacleClass, ObstacleKind
from .errors import JointLimitViolation, ValidationError
from .kinematics import JointState, Pose, RobotModel, fk_and_jacobian, forward_kinematics, solve_joint_rates
from .supervisor import Thresholds, free_drive_update, step_mode

FAR_AWAY = np.array([10.0, 10.0, 10.0])  # default hand position, m


@dataclass(frozen=True)
class StaticTrack:
    """Obstacle fixed at one point."""

    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))

    def sample(self, t: float) -> np.ndarray:
        return self.point

    def drag(self):
        return None


@dataclass(frozen=True)
class PiecewiseTrack:
    """Obstacle moving linearly between timestamped points; held constant
    before the first and after the last sample."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        points = np.asarray(self.points, dtype=float)
        if times.ndim != 1 or points.shape != (times.size, 3) or times.size < 1:
            raise ValidationError("piecewise track needs n timestamps and n 3-points")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("piecewise track timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    def sample(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.times, self.points[:, k]) for k in range(3)])

    def drag(self):
        return None


class LiveTrack:
    """Hand position fed externally (bridge/UI); zero-order hold between
    updates, last writer wins. Thread-safe."""

    def __init__(self, default=FAR_AWAY):
        self._lock = threading.Lock()
        self._pos = np.asarray(default, dtype=float).copy()
        self._drag = None

    def set_hand(self, pos, drag=None):
        pos = np.asarray(pos, dtype=float)
        with self._lock:
            self._pos = pos
            self._drag = None if drag is None else np.asarray(drag, dtype=float)

    def sample(self, t: float) -> np.ndarray:
        with self._lock:
            return self._pos.copy()

    def drag(self):
        with self._lock:
            return None if self._drag is None else self._drag.copy()


@dataclass(frozen=True)
class TaskPlan:
    """Ordered Cartesian waypoints with an arrival tolerance, optional
    cycling, and a dwell pause at each reached waypoint."""

    waypoints: np.ndarray
    arrival_tolerance: float = 0.01
    cycle: bool = False
    dwell_s: float = 0.0

    def __post_init__(self):
        wps = np.asarray(self.waypoints, dtype=float)
        if wps.ndim != 2 or wps.shape[1] != 3 or wps.shape[0] < 1:
            raise ValidationError("plan needs at least one 3-vector waypoint")
        if self.arrival_tolerance <= 0:
            raise ValidationError("arrival_tolerance must be > 0")
        if self.dwell_s < 0:
            raise ValidationError("dwell_s must be >= 0")
        object.__setattr__(self, "waypoints", wps)


@dataclass(frozen=True)
class SimConfig:
    robot: RobotModel
    gains: ControlGains = ControlGains()
    thresholds: Thresholds = Thresholds()
    dt: float = 0.1
    duration_max: float = 60.0
    initial_q: np.ndarray = field(default_factory=lambda: np.zeros(6))
    damping: float = 0.01          # DLS lambda
    compliance: float = 1.0        # free-drive drag scale

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError("dt must be > 0")
        if self.duration_max <= 0:
            raise ValidationError("duration_max must be > 0")
        q = np.asarray(self.initial_q, dtype=float)
        if q.shape != (6,):
            raise ValidationError("initial_q must have 6 entries")
        limits = self.robot.joint_limits
        if np.any(q < limits[:, 0]) or np.any(q > limits[:, 1]):
            raise ValidationError("initial_q violates joint limits")
        object.__setattr__(self, "initial_q", q)


@dataclass(frozen=True)
class SimState:
    """Snapshot at tick boundary t = tick * dt. The step outputs that
    produced this state (command, mode, classification, force magnitudes)
    ride along for logging."""

    tick: int
    t: float
    joints: JointState
    tcp: Pose
    v_tcp: np.ndarray               # commanded TCP velocity of the last step
    mode: Mode
    hand: np.ndarray
    d_ro: float
    active_waypoint: int
    dwell_left: float | None = None
    goals_reached: int = 0
    plan_complete: bool = False
    obstacle: ObstacleClass = ObstacleClass(ObstacleKind.TYPE2_NON_IMMINENT, np.pi)
    forces: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TickRecord:
    """One log row: configuration at t plus the command applied over
    [t, t + dt) and the supervision outcome of that step."""

    t: float
    q: np.ndarray
    tcp: np.ndarray
    v_cmd: np.ndarray
    mode: Mode
    d_ro: float
    obstacle_class: int  # 1 imminent, 2 non-imminent
    forces: tuple
    waypoint: int


@dataclass
class TrajectoryLog:
    records: list
    dt: float
    halted: str | None = None
    final_state: "SimState | None" = None  # terminal snapshot, not a log row

    def __len__(self):
        return len(self.records)


def initial_state(cfg: SimConfig, track, plan: TaskPlan) -> SimState:
    tcp = forward_kinematics(cfg.robot, cfg.initial_q)
    hand = track.sample(0.0)
    return SimState(
        tick=0,
        t=0.0,
        joints=JointState(q=cfg.initial_q, q_dot=np.zeros(6)),
        tcp=tcp,
        v_tcp=np.zeros(3),
        mode=Mode.POSITION,
        hand=hand,
        d_ro=float(np.linalg.norm(tcp.position - hand)),
        active_waypoint=0,
    )


def _classify_safe(v_tcp, x_r, hand, theta_obs) -> ObstacleClass:
    if np.linalg.norm(hand - x_r) < ctl.COINCIDENCE_EPS:
        # no direction at contact; distance zone forces free-drive anyway
        return ObstacleClass(ObstacleKind.TYPE2_NON_IMMINENT, np.pi)
    return ctl.classify_obstacle(v_tcp, x_r, hand, theta_obs)


def sim_step(state: SimState, cfg: SimConfig, track, plan: TaskPlan) -> SimState:
    """Advance one tick. Raises JointLimitViolation when integration
    leaves the configured joint range."""
    x_r = state.tcp.position
    obstacle = _classify_safe(state.v_tcp, x_r, state.hand, cfg.gains.theta_obs)
    mode = step_mode(state.mode, state.d_ro, obstacle, cfg.thresholds)

    pointer = state.active_waypoint
    goal = plan.waypoints[pointer] if pointer < len(plan.waypoints) else x_r

    if mode is Mode.FREE_DRIVE:
        v_cmd = free_drive_update(x_r, track.drag(), cfg.compliance, cfg.gains.v_max)
        forces = (0.0, 0.0, 0.0)
    else:
        inputs = ControlInputs(x_r=x_r, v_r=state.v_tcp, x_g=goal,
                               xdot_g=np.zeros(3), x_o=state.hand)
        v_cmd, breakdown = ctl.control_tick(inputs, cfg.gains, mode)
        forces = breakdown.magnitudes() if breakdown is not None else (0.0, 0.0, 0.0)

    _, J = fk_and_jacobian(cfg.robot, state.joints.q)
    q_dot = solve_joint_rates(J, np.concatenate([v_cmd, np.zeros(3)]), cfg.damping)
    q_dot = np.clip(q_dot, -cfg.robot.rate_limits, cfg.robot.rate_limits)
    q_new = state.joints.q + q_dot * cfg.dt

    limits = cfg.robot.joint_limits
    for i in range(6):
        if q_new[i] < limits[i, 0] or q_new[i] > limits[i, 1]:
            raise JointLimitViolation(i, q_new[i], (limits[i, 0], limits[i, 1]), state.t)

    tcp_new = forward_kinematics(cfg.robot, q_new)
    tick_new = state.tick + 1
    t_new = tick_new * cfg.dt

    # waypoint bookkeeping against the post-integration TCP
    pointer_new = pointer
    dwell_left = state.dwell_left
    goals = state.goals_reached
    complete = state.plan_complete
    if not complete and pointer < len(plan.waypoints):
        if dwell_left is not None:
            dwell_left -= cfg.dt
            if dwell_left <= 1e-12:
                dwell_left = None
                pointer_new, goals, complete = _advance(pointer, plan, goals)
        elif np.linalg.norm(tcp_new.position - plan.waypoints[pointer]) < plan.arrival_tolerance:
            if plan.dwell_s > 0:
                dwell_left = plan.dwell_s
            else:
                pointer_new, goals, complete = _advance(pointer, plan, goals)

    hand_new = track.sample(t_new)
    return replace(
        state,
        tick=tick_new,
        t=t_new,
        joints=JointState(q=q_new, q_dot=q_dot),
        tcp=tcp_new,
        v_tcp=v_cmd,
        mode=mode,
        hand=hand_new,
        d_ro=float(np.linalg.norm(tcp_new.position - hand_new)),
        active_waypoint=pointer_new,
        dwell_left=dwell_left,
        goals_reached=goals,
        plan_complete=complete,
        obstacle=obstacle,
        forces=forces,
    )


def _advance(pointer: int, plan: TaskPlan, goals: int):
    goals += 1
    pointer += 1
    if pointer >= len(plan.waypoints):
        if plan.cycle:
            pointer = 0
        else:
            return pointer, goals, True  # pointer == len acts as an end marker
    return pointer, goals, False


def _make_record(before: SimState, after: SimState) -> TickRecord:
    return TickRecord(
        t=before.t,
        q=before.joints.q.copy(),
        tcp=before.tcp.position.copy(),
        v_cmd=after.v_tcp.copy(),
        mode=after.mode,
        d_ro=before.d_ro,
        obstacle_class=after.obstacle.kind.value,
        forces=after.forces,
        waypoint=after.active_waypoint,
    )


def run(cfg: SimConfig, track, plan: TaskPlan, stop_after_goals: int | None = None) -> TrajectoryLog:
    """Iterate sim_step until the plan completes (non-cycling), the goal
    quota is met, or duration_max elapses. Returns the full log; a joint
    limit hit halts the run with a partial log and a reason."""
    state = initial_state(cfg, track, plan)
    log = TrajectoryLog(records=[], dt=cfg.dt)
    while True:
        if state.plan_complete:
            break
        if stop_after_goals is not None and state.goals_reached >= stop_after_goals:
            break
        if state.t >= cfg.duration_max - 1e-12:
            break
        try:
            new_state = sim_step(state, cfg, track, plan)
        except JointLimitViolation as exc:
            log.halted = str(exc)
            break
        log.records.append(_make_record(state, new_state))
        state = new_state
    log.final_state = state
    return log


def tcp_velocity_estimate(prev_tcp, cur_tcp, dt: float) -> np.ndarray:
    """Finite-difference fallback for the TCP velocity (logs/telemetry);
    the control loop itself uses the commanded velocity."""
    if dt <= 0:
        raise ValidationError("dt must be > 0")
    return (np.asarray(cur_tcp, dtype=float) - np.asarray(prev_tcp, dtype=float)) / dt
