"""Scripted experiment harness: the two calibration sweeps (approach-angle
threshold and avoidance radius), the triangle human-interference task, the
four-object pick-and-place task, and a randomized-track safety probe.

All scenarios are deterministic reconstructions at desk scale; hand tracks
for the interactive tasks ship as fixed piecewise-linear fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .controller import ControlGains, Mode
from .errors import EmptyLog, ValidationError
from .models import default_arm
from .simulator import (
    FAR_AWAY,
    PiecewiseTrack,
    SimConfig,
    StaticTrack,
    TaskPlan,
    TrajectoryLog,
    run,
)
from .supervisor import Thresholds

# A -> B line of the calibration experiments, in base frame
POINT_A = np.array([-0.3, 0.8, 0.7])
POINT_B = np.array([0.3, 0.8, 0.7])
AB_MIDPOINT = np.array([0.0, 0.8, 0.7])
# triangle apex for the evaluation task (reconstruction; only A and B are given)
POINT_C = np.array([0.0, 0.55, 0.7])

# joint configuration whose TCP sits at POINT_A on the default arm
START_Q = np.array([1.8999497064337685, 0.02005850421357596, 1.5230327582613439,
                    0.24048596162128175, 0.5599581132638203, 0.0])

CALIBRATION_THRESHOLDS = Thresholds(d_at=0.2, d_act=0.05, d_dct=0.2)
EVALUATION_THRESHOLDS = Thresholds(d_at=0.2, d_act=0.1, d_dct=0.2)

# pick-and-place fixtures: four rack slots and a drop box, within reach
RACK_SLOTS = np.array([
    [-0.45, 0.75, 0.55],
    [-0.45, 0.60, 0.55],
    [-0.30, 0.75, 0.45],
    [-0.30, 0.60, 0.45],
])
DROP_BOX = np.array([0.45, 0.60, 0.50])
PICK_DWELL_S = 1.0


def calibration_config(theta_obs_deg: float = 45.0, d_at: float = 0.2,
                       dt: float = 0.1) -> SimConfig:
    gains = ControlGains(theta_obs=float(np.deg2rad(theta_obs_deg)))
    thresholds = replace(CALIBRATION_THRESHOLDS, d_at=d_at)
    return SimConfig(robot=default_arm(), gains=gains, thresholds=thresholds,
                     dt=dt, duration_max=60.0, initial_q=START_Q.copy())


def evaluation_config(dt: float = 0.1, duration_max: float = 120.0) -> SimConfig:
    return SimConfig(robot=default_arm(), gains=ControlGains(),
                     thresholds=EVALUATION_THRESHOLDS, dt=dt,
                     duration_max=duration_max, initial_q=START_Q.copy())


@dataclass(frozen=True)
class MetricsReport:
    """Scalar summary of one run."""

    min_d_ro: float
    path_length: float
    duration: float
    time_in_avoidance: float
    time_in_freedrive: float
    mode_switch_count: int
    reached_goals: int

    def to_dict(self) -> dict:
        return {
            "min_d_ro": self.min_d_ro,
            "path_length": self.path_length,
            "duration": self.duration,
            "time_in_avoidance": self.time_in_avoidance,
            "time_in_freedrive": self.time_in_freedrive,
            "mode_switch_count": self.mode_switch_count,
            "reached_goals": self.reached_goals,
        }


def compute_metrics(log: TrajectoryLog) -> MetricsReport:
    """Deterministic reduction of a log; derivable from the emitted file
    alone (the in-memory terminal state is not consulted)."""
    if not log.records:
        raise EmptyLog("cannot compute metrics on an empty log")
    recs = log.records
    d_ro = np.array([r.d_ro for r in recs])
    tcp = np.array([r.tcp for r in recs])
    modes = [r.mode for r in recs]
    waypoints = [r.waypoint for r in recs]
    switches = sum(1 for i in range(1, len(recs)) if modes[i] is not modes[i - 1])
    reached = sum(1 for prev, cur in zip([0] + waypoints[:-1], waypoints) if cur != prev)
    avoid_ticks = sum(1 for m in modes if m in (Mode.AVOID_TYPE1, Mode.AVOID_TYPE2))
    freedrive_ticks = sum(1 for m in modes if m is Mode.FREE_DRIVE)
    return MetricsReport(
        min_d_ro=float(d_ro.min()),
        path_length=float(np.sum(np.linalg.norm(np.diff(tcp, axis=0), axis=1))) if len(recs) > 1 else 0.0,
        duration=len(recs) * log.dt,
        time_in_avoidance=avoid_ticks * log.dt,
        time_in_freedrive=freedrive_ticks * log.dt,
        mode_switch_count=switches,
        reached_goals=reached,
    )


def ab_plan() -> TaskPlan:
    return TaskPlan(waypoints=[POINT_B], arrival_tolerance=0.01)


def run_theta_sweep(values_deg=(35.0, 40.0, 45.0, 50.0)):
    """A->B runs with the hand fixed at the path midpoint; one run per
    approach-angle threshold, avoidance radius fixed at 0.2 m."""
    if len(values_deg) < 1:
        raise ValidationError("theta sweep needs at least one value")
    results = []
    for value in values_deg:
        cfg = calibration_config(theta_obs_deg=value, d_at=0.2)
        log = run(cfg, StaticTrack(AB_MIDPOINT), ab_plan())
        results.append((float(value), compute_metrics(log), log))
    return results


def run_dat_sweep(values_m=(0.1, 0.2, 0.3)):
    """A->B runs with the midpoint hand; one run per avoidance radius,
    angle threshold fixed at 45 degrees."""
    if len(values_m) < 1:
        raise ValidationError("d_at sweep needs at least one value")
    results = []
    for value in values_m:
        cfg = calibration_config(theta_obs_deg=45.0, d_at=float(value))
        log = run(cfg, StaticTrack(AB_MIDPOINT), ab_plan())
        results.append((float(value), compute_metrics(log), log))
    return results


def avoidance_onset(log: TrajectoryLog):
    """(t, d_ro) of the first tick not under position control."""
    for r in log.records:
        if r.mode is not Mode.POSITION:
            return r.t, r.d_ro
    return None


def triangle_plan() -> TaskPlan:
    return TaskPlan(waypoints=[POINT_B, POINT_C, POINT_A],
                    arrival_tolerance=0.01, cycle=True)


def triangle_hand_track() -> PiecewiseTrack:
    """Shipped interference fixture: the hand closes on the middle of the
    B->C leg while the arm travels it, hovers, then withdraws."""
    return PiecewiseTrack(
        times=[0.0, 2.5, 4.2, 5.8, 7.5, 12.0],
        points=[
            [1.5, 1.2, 0.7],
            [0.7, 0.8, 0.7],
            [0.24, 0.567, 0.70],
            [0.24, 0.567, 0.70],
            [1.0, 1.0, 0.7],
            [1.5, 1.2, 0.7],
        ],
    )


def run_triangle_task(hand_track=None):
    """One lap of the cycling triangle plan (three goals); returns
    (metrics, log)."""
    cfg = evaluation_config()
    track = hand_track if hand_track is not None else StaticTrack(FAR_AWAY)
    log = run(cfg, track, triangle_plan(), stop_after_goals=3)
    return compute_metrics(log), log


def pick_place_plan() -> TaskPlan:
    waypoints = []
    for slot in RACK_SLOTS:
        waypoints.append(slot)
        waypoints.append(DROP_BOX)
    return TaskPlan(waypoints=waypoints, arrival_tolerance=0.01,
                    cycle=False, dwell_s=PICK_DWELL_S)


def pick_place_hand_track() -> PiecewiseTrack:
    """Shipped collaborative-task fixture: the hand brushes the second
    rack-to-box transfer leg, withdraws, and later reaches into the drop
    area, pinning the arm into free-drive until it pulls back."""
    return PiecewiseTrack(
        times=[0.0, 14.0, 17.0, 19.5, 22.0, 28.0, 31.5, 34.0, 36.0, 60.0],
        points=[
            [1.5, 1.2, 0.7],
            [1.5, 1.2, 0.7],
            [0.0, 0.72, 0.52],
            [0.0, 0.72, 0.52],
            [0.3, 1.05, 0.75],
            [0.55, 0.75, 0.55],
            [0.48, 0.66, 0.52],
            [0.48, 0.66, 0.52],
            [1.0, 1.1, 0.8],
            [1.5, 1.2, 0.7],
        ],
    )


def run_pick_place_task(hand_track=None):
    """Four pick-dwell-place legs in sequence; returns (metrics, log)."""
    cfg = evaluation_config(duration_max=180.0)
    track = hand_track if hand_track is not None else StaticTrack(FAR_AWAY)
    log = run(cfg, track, pick_place_plan())
    return compute_metrics(log), log


def split_pick_place_log(log: TrajectoryLog):
    """Per-object sub-logs (pick leg + place leg), by waypoint pointer."""
    groups = {}
    for rec in log.records:
        groups.setdefault(min(rec.waypoint // 2, 3), []).append(rec)
    return [TrajectoryLog(records=groups[k], dt=log.dt) for k in sorted(groups)]


def random_hand_track(rng: np.random.Generator, duration: float = 30.0,
                      speed_max: float = 1.0) -> PiecewiseTrack:
    """Random piecewise-linear hand motion through the shared workspace,
    segment speeds bounded by speed_max."""
    lo = np.array([-0.6, 0.3, 0.3])
    hi = np.array([0.6, 1.1, 1.0])
    times = [0.0]
    points = [rng.uniform(lo, hi)]
    while times[-1] < duration:
        target = rng.uniform(lo, hi)
        speed = rng.uniform(0.2, speed_max)
        leg = float(np.linalg.norm(target - points[-1]))
        times.append(times[-1] + max(leg / speed, 0.2))
        points.append(target)
    return PiecewiseTrack(times=times, points=points)


@dataclass
class SafetyProbeResult:
    runs: int
    violations: list        # (index, min_d_ro)
    min_d_ro_overall: float

    @property
    def pass_rate(self) -> float:
        return 1.0 - len(self.violations) / self.runs


def run_random_safety(n_runs: int = 200, seed: int = 0, clearance: float = 0.02,
                      duration: float = 25.0, counterexample_dir=None) -> SafetyProbeResult:
    """Drive the triangle scenario against n random hand tracks; any run
    whose clearance drops to `clearance` or below is a violation and, when
    a directory is given, is written out as a replayable scenario file."""
    rng = np.random.default_rng(seed)
    violations = []
    overall = np.inf
    for i in range(n_runs):
        track = random_hand_track(rng, duration=duration)
        cfg = evaluation_config(duration_max=duration)
        log = run(cfg, track, triangle_plan())
        min_d = min((r.d_ro for r in log.records), default=np.inf)
        overall = min(overall, min_d)
        if min_d <= clearance:
            violations.append((i, float(min_d)))
            if counterexample_dir is not None:
                from pathlib import Path

                from .scenario import Scenario, save_scenario

                path = Path(counterexample_dir) / f"counterexample_{i:03d}.scenario.yaml"
                save_scenario(Scenario(config=cfg, track=track, plan=triangle_plan()), path)
    return SafetyProbeResult(runs=n_runs, violations=violations,
                             min_d_ro_overall=float(overall))
