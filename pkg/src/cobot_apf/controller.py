"""Cartesian velocity controller: saturated position feedback, obstacle
classification by approach angle, the three repulsive forces, and the
exponential blend between goal-seeking and avoidance.

All functions are pure and operate on 3-vectors (positions in m,
velocities in m/s). Angular motion is not commanded here; the simulator
zero-pads the task velocity before the joint-rate solve.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, ValidationError

RHO_MIN = 0.01          # m, distance floor inside force laws
V_EPSILON = 1e-6        # m/s, below this the approach angle is undefined
COINCIDENCE_EPS = 1e-9  # m, robot and obstacle considered coincident


class ObstacleKind(enum.Enum):
    TYPE1_IMMINENT = 1
    TYPE2_NON_IMMINENT = 2


class Mode(enum.Enum):
    """Active control branch; owned by the supervisor, consumed here."""

    POSITION = "position"
    AVOID_TYPE1 = "avoid1"
    AVOID_TYPE2 = "avoid2"
    FREE_DRIVE = "freedrive"


@dataclass(frozen=True)
class ControlGains:
    """Calibration constants and thresholds.

    k_pc1 [m/s] saturated feedback magnitude, k_pc2 [1/m] feedback slope,
    k_ca1..3 [m^3/s] repulsive constants (velocity-units, rate factor
    folded in), k_rep [-] fold-in factor, tau [1/m] blend attenuation,
    theta_obs [rad] imminence threshold, v_max [m/s] TCP speed cap.
    """

    k_pc1: float = 0.2
    k_pc2: float = 10.0
    k_ca1: float = 3e-3
    k_ca2: float = 2.0
    k_ca3: float = 2.0
    k_rep: float = 1.0
    tau: float = 20.0
    theta_obs: float = np.deg2rad(45.0)
    v_max: float = 0.2

    def __post_init__(self):
        for name in ("k_pc1", "k_pc2", "k_ca1", "k_ca2", "k_ca3", "k_rep", "tau", "v_max"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"gain {name} must be > 0")
        if not 0 < self.theta_obs < np.pi / 2:
            raise ValidationError("theta_obs must lie in (0, pi/2) rad")


@dataclass(frozen=True)
class ControlInputs:
    """Per-tick controller inputs: TCP position/velocity, goal position,
    goal feedforward velocity, obstacle (hand) position."""

    x_r: np.ndarray
    v_r: np.ndarray
    x_g: np.ndarray
    xdot_g: np.ndarray
    x_o: np.ndarray

    def __post_init__(self):
        for name in ("x_r", "v_r", "x_g", "xdot_g", "x_o"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise ValidationError(f"control input {name} must be a finite 3-vector")
            object.__setattr__(self, name, vec)


@dataclass(frozen=True)
class ObstacleClass:
    kind: ObstacleKind
    angle: float  # rad, between TCP velocity and the robot-obstacle vector


@dataclass(frozen=True)
class RepulsiveBreakdown:
    """The three repulsive components, their base-orientation signs, and
    the resulting avoidance velocity. f_rep2 = f_rep3 = 0 for type-2."""

    f_rep1: np.ndarray
    f_rep2: np.ndarray
    f_rep3: np.ndarray
    c1: int
    c2: int
    v_rep: np.ndarray

    @property
    def total_force(self) -> np.ndarray:
        return self.f_rep1 + self.f_rep2 + self.f_rep3

    def magnitudes(self):
        return (float(np.linalg.norm(self.f_rep1)),
                float(np.linalg.norm(self.f_rep2)),
                float(np.linalg.norm(self.f_rep3)))


def _robot_obstacle_unit(x_r, x_o):
    d = np.asarray(x_o, dtype=float) - np.asarray(x_r, dtype=float)
    rho = float(np.linalg.norm(d))
    if rho < COINCIDENCE_EPS:
        raise DegenerateGeometry("robot and obstacle positions coincide")
    return d / rho, rho


def position_velocity(x_r, x_g, xdot_g, gains: ControlGains) -> np.ndarray:
    """Goal-seeking TCP velocity: feedforward minus saturated feedback.

    Componentwise v = xdot_g - k_pc1 * tanh(k_pc2 * (x_r - x_g)); each
    feedback component is bounded by k_pc1.
    """
    e = np.asarray(x_r, dtype=float) - np.asarray(x_g, dtype=float)
    return np.asarray(xdot_g, dtype=float) - gains.k_pc1 * np.tanh(gains.k_pc2 * e)


def classify_obstacle(v_r, x_r, x_o, theta_obs: float) -> ObstacleClass:
    """Type 1 (imminent) iff the angle between the TCP velocity and the
    robot-obstacle vector is strictly below theta_obs.

    A near-zero TCP velocity (< V_EPSILON) has no approach direction and
    classifies as type 2.
    """
    n_ro, _ = _robot_obstacle_unit(x_r, x_o)
    v = np.asarray(v_r, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed < V_EPSILON:
        return ObstacleClass(kind=ObstacleKind.TYPE2_NON_IMMINENT, angle=np.pi)
    cos_angle = float(np.clip(np.dot(v / speed, n_ro), -1.0, 1.0))
    angle = float(np.arccos(cos_angle))
    kind = ObstacleKind.TYPE1_IMMINENT if angle < theta_obs else ObstacleKind.TYPE2_NON_IMMINENT
    return ObstacleClass(kind=kind, angle=angle)


def repulsive_force_1(x_r, x_o, k_ca1: float) -> np.ndarray:
    """Inverse-square push from the obstacle toward the robot; distance is
    floored at RHO_MIN so the magnitude stays bounded."""
    n_ro, rho = _robot_obstacle_unit(x_r, x_o)
    rho = max(rho, RHO_MIN)
    return -(k_ca1 / (rho * rho)) * n_ro


def rotational_direction(u, n_ro, x_r):
    """Unit direction perpendicular to the robot-obstacle axis, plus the
    sign that points it toward the robot base.

    n_b = (u x n_ro) x n_ro normalized; c = +1 when n_b has a positive
    component along -x_r (base direction), else -1, ties resolved to +1.
    When u is parallel to n_ro (or zero) the fallback perpendicular is the
    projection of world-vertical onto the plane normal to n_ro, or world-x
    when n_ro itself is vertical.
    """
    u = np.asarray(u, dtype=float)
    n_ro = np.asarray(n_ro, dtype=float)
    a = np.cross(u, n_ro)
    if np.linalg.norm(a) < 1e-9:
        # near-vertical axis makes the vertical projection ill-conditioned
        h = np.array([0.0, 0.0, 1.0]) if abs(n_ro[2]) <= 0.9 else np.array([1.0, 0.0, 0.0])
        n_b = h - np.dot(h, n_ro) * n_ro
    else:
        n_b = np.cross(a, n_ro)
    n_b = n_b / np.linalg.norm(n_b)
    c = 1 if float(np.dot(n_b, -np.asarray(x_r, dtype=float))) >= 0.0 else -1
    return n_b, c


def repulsive_velocity(inputs: ControlInputs, obstacle: ObstacleClass,
                       gains: ControlGains) -> RepulsiveBreakdown:
    """Avoidance velocity v_rep = v_r + k_rep * sum of repulsive forces.

    Type 1 adds the two rotational components (from the TCP velocity and
    the TCP-goal direction); type 2 keeps only the direct push.
    """
    n_ro, rho = _robot_obstacle_unit(inputs.x_r, inputs.x_o)
    rho = max(rho, RHO_MIN)
    inv_sq = 1.0 / (rho * rho)
    f1 = -(gains.k_ca1 * inv_sq) * n_ro
    f2 = np.zeros(3)
    f3 = np.zeros(3)
    c1 = 1
    c2 = 1
    if obstacle.kind is ObstacleKind.TYPE1_IMMINENT:
        n_b1, c1 = rotational_direction(inputs.v_r, n_ro, inputs.x_r)
        f2 = (gains.k_ca2 * c1 * inv_sq) * n_b1
        to_goal = inputs.x_g - inputs.x_r
        goal_dist = float(np.linalg.norm(to_goal))
        n_rg = to_goal / goal_dist if goal_dist > COINCIDENCE_EPS else np.zeros(3)
        n_b2, c2 = rotational_direction(n_rg, n_ro, inputs.x_r)
        f3 = (gains.k_ca3 * c2 * inv_sq) * n_b2
    v_rep = inputs.v_r + gains.k_rep * (f1 + f2 + f3)
    return RepulsiveBreakdown(f_rep1=f1, f_rep2=f2, f_rep3=f3, c1=c1, c2=c2, v_rep=v_rep)


def blend(v_pc, v_rep, rho: float, tau: float) -> np.ndarray:
    """Distance-weighted mix: w = exp(-tau * rho) picks v_rep at contact
    and fades to the position controller far away."""
    if rho < 0:
        raise ValidationError("blend distance must be >= 0")
    if tau <= 0:
        raise ValidationError("tau must be > 0")
    w = float(np.exp(-tau * rho))
    return np.asarray(v_pc, dtype=float) * (1.0 - w) + np.asarray(v_rep, dtype=float) * w


def clamp_speed(v, v_max: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed > v_max:
        return v * (v_max / speed)
    return v


def control_tick(inputs: ControlInputs, gains: ControlGains, mode: Mode):
    """One controller evaluation for the given mode.

    Returns (v_cmd, breakdown); breakdown is None in position mode. The
    command is speed-clamped to gains.v_max. Free-drive is not handled
    here (see supervisor.free_drive_update).
    """
    if mode not in (Mode.POSITION, Mode.AVOID_TYPE1, Mode.AVOID_TYPE2):
        raise ValidationError(f"control_tick cannot run in mode {mode}")
    v_pc = position_velocity(inputs.x_r, inputs.x_g, inputs.xdot_g, gains)
    if mode is Mode.POSITION:
        return clamp_speed(v_pc, gains.v_max), None
    kind = ObstacleKind.TYPE1_IMMINENT if mode is Mode.AVOID_TYPE1 else ObstacleKind.TYPE2_NON_IMMINENT
    obstacle = ObstacleClass(kind=kind, angle=0.0 if kind is ObstacleKind.TYPE1_IMMINENT else np.pi)
    breakdown = repulsive_velocity(inputs, obstacle, gains)
    rho = float(np.linalg.norm(inputs.x_o - inputs.x_r))
    v_cmd = blend(v_pc, breakdown.v_rep, rho, gains.tau)
    return clamp_speed(v_cmd, gains.v_max), breakdown
