"""Built-in arm descriptions.

The default arm is a generic 1.6 m-reach 6-DOF elbow arm in the class of
common collaborative robots; its numbers are configuration data, not a
datasheet. The same description ships as data/default_arm.yaml.
"""

import numpy as np

from .kinematics import RobotModel, make_robot_model

TWO_PI = 2.0 * np.pi

DEFAULT_ARM_SPEC = {
    "joints": [
        {"axis": "z", "translation_m": [0.0, 0.0, 0.18], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
        {"axis": "y", "translation_m": [0.0, 0.0, 0.60], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
        {"axis": "y", "translation_m": [0.0, 0.0, 0.55], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
        {"axis": "z", "translation_m": [0.0, 0.0, 0.12], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
        {"axis": "y", "translation_m": [0.0, 0.0, 0.10], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
        {"axis": "z", "translation_m": [0.0, 0.0, 0.0], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
    ],
    "joint_limits_rad": [[-TWO_PI, TWO_PI]] * 6,
    "rate_limits_rad_s": [2.0] * 6,
    "tcp_offset": {"translation_m": [0.0, 0.0, 0.10], "rotation_rpy_rad": [0.0, 0.0, 0.0]},
}


def default_arm() -> RobotModel:
    spec = DEFAULT_ARM_SPEC
    joints = [(j["axis"], j["translation_m"], j["rotation_rpy_rad"]) for j in spec["joints"]]
    return make_robot_model(
        joints,
        joint_limits=spec["joint_limits_rad"],
        rate_limits=spec["rate_limits_rad_s"],
        tcp_translation=spec["tcp_offset"]["translation_m"],
        tcp_rotation_rpy=spec["tcp_offset"]["rotation_rpy_rad"],
    )


def single_axis_model(length: float = 1.0) -> RobotModel:
    """Test model: joint 1 about z followed by a z-translation of `length`,
    every other link an identity."""
    joints = [("z", [0.0, 0.0, length], [0.0, 0.0, 0.0])]
    joints += [("z", [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])] * 5
    return make_robot_model(joints, joint_limits=[[-TWO_PI, TWO_PI]] * 6,
                            rate_limits=[2.0] * 6)
