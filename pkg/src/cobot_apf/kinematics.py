"""Forward kinematics, geometric Jacobian and damped joint-rate solver
for a configurable 6-DOF serial arm.

Model convention: each joint rotates about its axis first, then the fixed
link transform follows, i.e.

    T_tcp(q) = prod_j [ Rot(axis_j, q_j) . T_link_j ] . T_tcp_offset

All functions here are pure; they never check joint limits (the simulator
owns that).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import NumericalFailure, ValidationError

NUM_JOINTS = 6

_AXIS_LETTERS = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def _as_unit_axis(axis) -> np.ndarray:
    if isinstance(axis, str):
        try:
            return _AXIS_LETTERS[axis.lower()].copy()
        except KeyError:
            raise ValidationError(f"joint axis must be x/y/z or a 3-vector, got {axis!r}")
    a = np.asarray(axis, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"joint axis must be x/y/z or a 3-vector, got shape {a.shape}")
    n = np.linalg.norm(a)
    if n < 1e-12:
        raise ValidationError("joint axis must be nonzero")
    return a / n


def rpy_matrix(rpy) -> np.ndarray:
    """Rotation matrix from extrinsic x-y-z (roll, pitch, yaw) angles in rad."""
    return Rotation.from_euler("xyz", np.asarray(rpy, dtype=float)).as_matrix()


def _transform(rotation: np.ndarray, translation) -> np.ndarray:
    T = np.eye(4)
    T[:3, :3] = rotation
    T[:3, 3] = np.asarray(translation, dtype=float)
    return T


def axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


@dataclass(frozen=True)
class JointDescriptor:
    """One revolute joint: rotation axis plus the fixed link transform
    that follows it in the chain."""

    axis: np.ndarray
    translation: np.ndarray
    rotation_rpy: np.ndarray
    link_transform: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "axis", _as_unit_axis(self.axis))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        object.__setattr__(self, "rotation_rpy", np.asarray(self.rotation_rpy, dtype=float))
        if self.translation.shape != (3,) or self.rotation_rpy.shape != (3,):
            raise ValidationError("joint translation_m and rotation_rpy_rad must be 3-vectors")
        object.__setattr__(
            self, "link_transform", _transform(rpy_matrix(self.rotation_rpy), self.translation)
        )


@dataclass(frozen=True)
class RobotModel:
    """Kinematic description of a 6-DOF serial arm.

    joints      : exactly 6 JointDescriptor entries, base to flange
    joint_limits: (6, 2) array of [min, max] rad, min < max
    rate_limits : (6,) array of max |q_dot| rad/s, all > 0
    tcp_offset  : fixed 4x4 transform from the last link to the TCP
    """

    joints: tuple
    joint_limits: np.ndarray
    rate_limits: np.ndarray
    tcp_offset: np.ndarray

    def __post_init__(self):
        if len(self.joints) != NUM_JOINTS:
            raise ValidationError(f"robot model needs exactly {NUM_JOINTS} joints, got {len(self.joints)}")
        object.__setattr__(self, "joints", tuple(self.joints))
        limits = np.asarray(self.joint_limits, dtype=float)
        rates = np.asarray(self.rate_limits, dtype=float)
        if limits.shape != (NUM_JOINTS, 2):
            raise ValidationError("joint_limits_rad must be a 6x2 [min, max] table")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise ValidationError("joint_limits_rad requires min < max for every joint")
        if rates.shape != (NUM_JOINTS,) or np.any(rates <= 0):
            raise ValidationError("rate_limits_rad_s must be 6 positive values")
        tcp = np.asarray(self.tcp_offset, dtype=float)
        if tcp.shape != (4, 4):
            raise ValidationError("tcp_offset must be a 4x4 transform")
        object.__setattr__(self, "joint_limits", limits)
        object.__setattr__(self, "rate_limits", rates)
        object.__setattr__(self, "tcp_offset", tcp)


def make_robot_model(joints, joint_limits, rate_limits, tcp_translation=(0, 0, 0),
                     tcp_rotation_rpy=(0, 0, 0)) -> RobotModel:
    """Convenience constructor from (axis, translation, rpy) triples."""
    descriptors = tuple(JointDescriptor(axis=a, translation=t, rotation_rpy=r) for a, t, r in joints)
    tcp = _transform(rpy_matrix(tcp_rotation_rpy), tcp_translation)
    return RobotModel(joints=descriptors, joint_limits=joint_limits,
                      rate_limits=rate_limits, tcp_offset=tcp)


@dataclass(frozen=True)
class JointState:
    """Joint positions (rad) and rates (rad/s)."""

    q: np.ndarray
    q_dot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "q_dot", np.asarray(self.q_dot, dtype=float))


@dataclass(frozen=True)
class Pose:
    """Cartesian TCP pose: position in m plus a unit quaternion (x, y, z, w)."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))

    @property
    def quaternion_norm(self) -> float:
        return float(np.linalg.norm(self.orientation))


def _chain_transforms(model: RobotModel, q) -> list:
    """World transforms of every frame in the chain; last entry is the TCP."""
    q = np.asarray(q, dtype=float)
    frames = [np.eye(4)]
    T = np.eye(4)
    for joint, angle in zip(model.joints, q):
        R = np.eye(4)
        R[:3, :3] = axis_rotation(joint.axis, angle)
        T = T @ R @ joint.link_transform
        frames.append(T)
    frames.append(T @ model.tcp_offset)
    return frames


def forward_kinematics(model: RobotModel, q) -> Pose:
    """TCP pose for joint vector q (6 values, rad)."""
    T = _chain_transforms(model, q)[-1]
    quat = Rotation.from_matrix(T[:3, :3]).as_quat()
    return Pose(position=T[:3, 3].copy(), orientation=quat)


def tcp_position(model: RobotModel, q) -> np.ndarray:
    """TCP position only; cheaper than forward_kinematics in tight loops."""
    return _chain_transforms(model, q)[-1][:3, 3].copy()


def jacobian(model: RobotModel, q) -> np.ndarray:
    """Geometric Jacobian at the TCP.

    Returns a (6, 6) array; rows 0..2 map joint rates to TCP linear
    velocity (m/s), rows 3..5 to angular velocity (rad/s).
    """
    return fk_and_jacobian(model, q)[1]


def fk_and_jacobian(model: RobotModel, q):
    """(tcp position, 6x6 Jacobian) computed in a single chain pass."""
    frames = _chain_transforms(model, q)
    p_tcp = frames[-1][:3, 3]
    J = np.zeros((6, 6))
    for i, joint in enumerate(model.joints):
        base = frames[i]  # frame in which joint i rotates
        z = base[:3, :3] @ joint.axis
        p = base[:3, 3]
        J[:3, i] = np.cross(z, p_tcp - p)
        J[3:, i] = z
    return p_tcp.copy(), J


def solve_joint_rates(J: np.ndarray, v, damping: float = 0.01) -> np.ndarray:
    """Damped least-squares joint rates for a task-space velocity.

    Solves q_dot = J^T (J J^T + damping^2 I)^-1 v. With damping = 0 and a
    well-conditioned J this is the exact inverse; with damping > 0 the
    amplification of any task direction is capped at 1/(2*damping).
    """
    if damping < 0:
        raise ValidationError("damping must be >= 0")
    J = np.asarray(J, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(J)) and np.all(np.isfinite(v))):
        raise NumericalFailure("non-finite Jacobian or task velocity")
    A = J @ J.T + (damping * damping) * np.eye(J.shape[0])
    try:
        y = np.linalg.solve(A, v)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"joint-rate solve failed: {exc}") from exc
    q_dot = J.T @ y
    if not np.all(np.isfinite(q_dot)):
        raise NumericalFailure("joint-rate solve produced non-finite rates")
    return q_dot


def manipulability(J: np.ndarray) -> float:
    """sqrt(det(J_lin J_lin^T)) of the linear block; 0 at a singularity."""
    J_lin = np.asarray(J, dtype=float)[:3, :]
    g = float(np.linalg.det(J_lin @ J_lin.T))
    return float(np.sqrt(max(g, 0.0)))
