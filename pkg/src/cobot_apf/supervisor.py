"""Mode supervision: picks position control, one of the two avoidance
controllers, or free-drive from the robot-obstacle distance, with a
hysteresis band between the free-drive activation and deactivation radii.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import Mode, ObstacleClass, ObstacleKind, clamp_speed
from .errors import ValidationError

__all__ = ["Mode", "Thresholds", "step_mode", "free_drive_update"]


@dataclass(frozen=True)
class Thresholds:
    """Distance thresholds in m: d_at starts avoidance, d_act latches
    free-drive, d_dct releases it. Requires d_dct > d_act and d_at > d_act."""

    d_at: float = 0.2
    d_act: float = 0.1
    d_dct: float = 0.2

    def __post_init__(self):
        if min(self.d_at, self.d_act, self.d_dct) <= 0:
            raise ValidationError("thresholds must be > 0")
        if not self.d_dct > self.d_act:
            raise ValidationError("d_dct must be strictly greater than d_act")
        if not self.d_at > self.d_act:
            raise ValidationError("d_at must be strictly greater than d_act")


def step_mode(prev: Mode, d_ro: float, obstacle: ObstacleClass, th: Thresholds) -> Mode:
    """Next control mode for the current robot-obstacle distance.

    Free-drive is held while d_ro <= d_dct once entered; otherwise the
    distance zones map to free-drive (< d_act), avoidance (< d_at, split
    by obstacle type), and position control (>= d_at). Boundaries: at
    exactly d_at position control wins, at exactly d_act avoidance wins.
    """
    if d_ro < 0:
        raise ValidationError("d_ro must be >= 0")
    if prev is Mode.FREE_DRIVE and d_ro <= th.d_dct:
        return Mode.FREE_DRIVE
    if d_ro < th.d_act:
        return Mode.FREE_DRIVE
    if d_ro < th.d_at:
        if obstacle.kind is ObstacleKind.TYPE1_IMMINENT:
            return Mode.AVOID_TYPE1
        return Mode.AVOID_TYPE2
    return Mode.POSITION


def free_drive_update(x_r, hand_drag, compliance: float, v_max: float) -> np.ndarray:
    """Free-drive TCP command: follow the drag velocity scaled by the
    compliance factor, clamped to v_max; hold still when nothing pulls.

    x_r is the held TCP position (unused by the velocity-mode surrogate,
    kept for the controller interface).
    """
    del x_r
    if hand_drag is None:
        return np.zeros(3)
    return clamp_speed(compliance * np.asarray(hand_drag, dtype=float), v_max)
