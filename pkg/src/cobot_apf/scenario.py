"""Scenario/config file parsing and serialization (YAML), trajectory log
CSV IO, and metric report documents.

Every parse validates the full structure: unknown keys are rejected and
constraint violations name the offending field. Serialization round-trips
exactly (floats written in shortest-exact form).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import yaml

from .controller import ControlGains, Mode
from .errors import ParseError, ValidationError
from .kinematics import RobotModel, make_robot_model
from .simulator import (
    FAR_AWAY,
    LiveTrack,
    PiecewiseTrack,
    SimConfig,
    StaticTrack,
    TaskPlan,
    TickRecord,
    TrajectoryLog,
)
from .supervisor import Thresholds

LOG_COLUMNS = ["t", "q1", "q2", "q3", "q4", "q5", "q6", "x", "y", "z",
               "vx", "vy", "vz", "mode", "d_ro", "class", "f1", "f2", "f3", "waypoint"]

_GAIN_KEYS = ["k_pc1", "k_pc2", "k_ca1", "k_ca2", "k_ca3", "k_rep",
              "tau_per_m", "theta_obs_deg", "v_max_m_s"]
_THRESHOLD_KEYS = ["d_at_m", "d_act_m", "d_dct_m"]


@dataclass
class Scenario:
    """A fully-validated simulation setup."""

    config: SimConfig
    track: object
    plan: TaskPlan


def _require_mapping(node, where):
    if not isinstance(node, dict):
        raise ValidationError(f"{where}: expected a mapping")
    return node


def _check_keys(node, allowed, where, required=None):
    unknown = set(node) - set(allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    for key in required if required is not None else allowed:
        if key not in node:
            raise ValidationError(f"{where}: missing key '{key}'")


def _vec3(node, where):
    if not isinstance(node, (list, tuple)) or len(node) != 3:
        raise ValidationError(f"{where}: expected a 3-vector")
    try:
        vec = [float(v) for v in node]
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: entries must be numbers")
    if not all(np.isfinite(vec)):
        raise ValidationError(f"{where}: entries must be finite")
    return vec


def _num(node, where):
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(f"{where}: expected a number")
    return float(node)


def load_yaml(text: str, source: str = "<string>"):
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(f"{source}: {exc.problem}", line=line, column=col) from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def parse_robot(node) -> RobotModel:
    node = _require_mapping(node, "robot")
    _check_keys(node, ["joints", "joint_limits_rad", "rate_limits_rad_s", "tcp_offset"], "robot")
    joints_node = node["joints"]
    if not isinstance(joints_node, list) or len(joints_node) != 6:
        raise ValidationError("robot.joints: exactly 6 joints required")
    joints = []
    for i, jn in enumerate(joints_node):
        where = f"robot.joints[{i}]"
        jn = _require_mapping(jn, where)
        _check_keys(jn, ["axis", "translation_m", "rotation_rpy_rad"], where)
        axis = jn["axis"]
        if not isinstance(axis, str):
            axis = _vec3(axis, f"{where}.axis")
        joints.append((axis, _vec3(jn["translation_m"], f"{where}.translation_m"),
                       _vec3(jn["rotation_rpy_rad"], f"{where}.rotation_rpy_rad")))
    limits = node["joint_limits_rad"]
    if not isinstance(limits, list) or len(limits) != 6:
        raise ValidationError("robot.joint_limits_rad: 6 [min, max] pairs required")
    limits = [[_num(v, "robot.joint_limits_rad") for v in pair] for pair in limits]
    rates = node["rate_limits_rad_s"]
    if not isinstance(rates, list) or len(rates) != 6:
        raise ValidationError("robot.rate_limits_rad_s: 6 values required")
    rates = [_num(v, "robot.rate_limits_rad_s") for v in rates]
    tcp = _require_mapping(node["tcp_offset"], "robot.tcp_offset")
    _check_keys(tcp, ["translation_m", "rotation_rpy_rad"], "robot.tcp_offset")
    return make_robot_model(
        joints, joint_limits=limits, rate_limits=rates,
        tcp_translation=_vec3(tcp["translation_m"], "robot.tcp_offset.translation_m"),
        tcp_rotation_rpy=_vec3(tcp["rotation_rpy_rad"], "robot.tcp_offset.rotation_rpy_rad"))


def parse_gains(node) -> ControlGains:
    node = _require_mapping(node, "gains")
    _check_keys(node, _GAIN_KEYS, "gains")
    theta_deg = _num(node["theta_obs_deg"], "gains.theta_obs_deg")
    if not 0 < theta_deg < 90:
        raise ValidationError("gains.theta_obs_deg: must lie in (0, 90)")
    try:
        return ControlGains(
            k_pc1=_num(node["k_pc1"], "gains.k_pc1"),
            k_pc2=_num(node["k_pc2"], "gains.k_pc2"),
            k_ca1=_num(node["k_ca1"], "gains.k_ca1"),
            k_ca2=_num(node["k_ca2"], "gains.k_ca2"),
            k_ca3=_num(node["k_ca3"], "gains.k_ca3"),
            k_rep=_num(node["k_rep"], "gains.k_rep"),
            tau=_num(node["tau_per_m"], "gains.tau_per_m"),
            theta_obs=float(np.deg2rad(theta_deg)),
            v_max=_num(node["v_max_m_s"], "gains.v_max_m_s"),
        )
    except ValidationError as exc:
        raise ValidationError(f"gains: {exc}") from exc


def parse_thresholds(node) -> Thresholds:
    node = _require_mapping(node, "thresholds")
    _check_keys(node, _THRESHOLD_KEYS, "thresholds")
    d_at = _num(node["d_at_m"], "thresholds.d_at_m")
    d_act = _num(node["d_act_m"], "thresholds.d_act_m")
    d_dct = _num(node["d_dct_m"], "thresholds.d_dct_m")
    if not d_dct > d_act:
        raise ValidationError("thresholds: d_dct_m must be > d_act_m (free-drive hysteresis)")
    try:
        return Thresholds(d_at=d_at, d_act=d_act, d_dct=d_dct)
    except ValidationError as exc:
        raise ValidationError(f"thresholds: {exc}") from exc


def parse_track(node):
    node = _require_mapping(node, "track")
    if len(node) != 1:
        raise ValidationError("track: exactly one of static | piecewise | live")
    kind, body = next(iter(node.items()))
    if kind == "static":
        return StaticTrack(_vec3(body, "track.static"))
    if kind == "piecewise":
        if not isinstance(body, list) or not body:
            raise ValidationError("track.piecewise: non-empty [t, [x, y, z]] list required")
        times, points = [], []
        for i, entry in enumerate(body):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ValidationError(f"track.piecewise[{i}]: expected [t, [x, y, z]]")
            times.append(_num(entry[0], f"track.piecewise[{i}].t"))
            points.append(_vec3(entry[1], f"track.piecewise[{i}].point"))
        try:
            return PiecewiseTrack(times=times, points=points)
        except ValidationError as exc:
            raise ValidationError(f"track.piecewise: {exc}") from exc
    if kind == "live":
        body = _require_mapping(body if body is not None else {}, "track.live")
        _check_keys(body, ["default"], "track.live", required=[])
        default = _vec3(body["default"], "track.live.default") if "default" in body else FAR_AWAY
        return LiveTrack(default=default)
    raise ValidationError(f"track: unknown source '{kind}'")


def parse_plan(node) -> TaskPlan:
    node = _require_mapping(node, "plan")
    _check_keys(node, ["waypoints", "tolerance", "cycle", "dwell_s"], "plan")
    wps = node["waypoints"]
    if not isinstance(wps, list) or not wps:
        raise ValidationError("plan.waypoints: non-empty list required")
    waypoints = [_vec3(w, f"plan.waypoints[{i}]") for i, w in enumerate(wps)]
    if not isinstance(node["cycle"], bool):
        raise ValidationError("plan.cycle: expected true/false")
    try:
        return TaskPlan(waypoints=waypoints,
                        arrival_tolerance=_num(node["tolerance"], "plan.tolerance"),
                        cycle=node["cycle"],
                        dwell_s=_num(node["dwell_s"], "plan.dwell_s"))
    except ValidationError as exc:
        raise ValidationError(f"plan: {exc}") from exc


def parse_scenario_dict(doc) -> Scenario:
    doc = _require_mapping(doc, "scenario")
    _check_keys(doc, ["robot", "gains", "thresholds", "sim", "plan", "track"], "scenario")
    robot = parse_robot(doc["robot"])
    gains = parse_gains(doc["gains"])
    thresholds = parse_thresholds(doc["thresholds"])
    sim = _require_mapping(doc["sim"], "sim")
    _check_keys(sim, ["dt", "duration_max", "initial_q", "damping", "compliance"], "sim",
                required=["dt", "duration_max", "initial_q"])
    initial_q = sim["initial_q"]
    if not isinstance(initial_q, list) or len(initial_q) != 6:
        raise ValidationError("sim.initial_q: 6 values required")
    try:
        config = SimConfig(
            robot=robot, gains=gains, thresholds=thresholds,
            dt=_num(sim["dt"], "sim.dt"),
            duration_max=_num(sim["duration_max"], "sim.duration_max"),
            initial_q=[_num(v, "sim.initial_q") for v in initial_q],
            damping=_num(sim.get("damping", 0.01), "sim.damping"),
            compliance=_num(sim.get("compliance", 1.0), "sim.compliance"),
        )
    except ValidationError as exc:
        raise ValidationError(f"sim: {exc}") from exc
    return Scenario(config=config, track=parse_track(doc["track"]), plan=parse_plan(doc["plan"]))


def parse_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario_dict(load_yaml(text, source=str(path)))


def robot_to_dict(model: RobotModel) -> dict:
    return {
        "joints": [
            {"axis": [float(v) for v in j.axis],
             "translation_m": [float(v) for v in j.translation],
             "rotation_rpy_rad": [float(v) for v in j.rotation_rpy]}
            for j in model.joints
        ],
        "joint_limits_rad": [[float(lo), float(hi)] for lo, hi in model.joint_limits],
        "rate_limits_rad_s": [float(v) for v in model.rate_limits],
        "tcp_offset": {
            "translation_m": [float(v) for v in model.tcp_offset[:3, 3]],
            # default arms carry no tool rotation; recover rpy from the matrix
            "rotation_rpy_rad": _matrix_rpy(model.tcp_offset[:3, :3]),
        },
    }


def _matrix_rpy(R) -> list:
    from scipy.spatial.transform import Rotation

    return [float(v) for v in Rotation.from_matrix(R).as_euler("xyz")]


def gains_to_dict(gains: ControlGains) -> dict:
    return {
        "k_pc1": gains.k_pc1, "k_pc2": gains.k_pc2,
        "k_ca1": gains.k_ca1, "k_ca2": gains.k_ca2, "k_ca3": gains.k_ca3,
        "k_rep": gains.k_rep, "tau_per_m": gains.tau,
        "theta_obs_deg": float(np.rad2deg(gains.theta_obs)),
        "v_max_m_s": gains.v_max,
    }


def thresholds_to_dict(th: Thresholds) -> dict:
    return {"d_at_m": th.d_at, "d_act_m": th.d_act, "d_dct_m": th.d_dct}


def track_to_dict(track) -> dict:
    if isinstance(track, StaticTrack):
        return {"static": [float(v) for v in track.point]}
    if isinstance(track, PiecewiseTrack):
        return {"piecewise": [[float(t), [float(v) for v in p]]
                              for t, p in zip(track.times, track.points)]}
    if isinstance(track, LiveTrack):
        return {"live": {"default": [float(v) for v in track.sample(0.0)]}}
    raise ValidationError(f"unknown track type {type(track).__name__}")


def scenario_to_dict(scn: Scenario) -> dict:
    cfg = scn.config
    return {
        "robot": robot_to_dict(cfg.robot),
        "gains": gains_to_dict(cfg.gains),
        "thresholds": thresholds_to_dict(cfg.thresholds),
        "sim": {
            "dt": cfg.dt, "duration_max": cfg.duration_max,
            "initial_q": [float(v) for v in cfg.initial_q],
            "damping": cfg.damping, "compliance": cfg.compliance,
        },
        "plan": {
            "waypoints": [[float(v) for v in w] for w in scn.plan.waypoints],
            "tolerance": scn.plan.arrival_tolerance,
            "cycle": scn.plan.cycle,
            "dwell_s": scn.plan.dwell_s,
        },
        "track": track_to_dict(scn.track),
    }


def dump_yaml(doc) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def save_scenario(scn: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_yaml(scenario_to_dict(scn)))


def _fmt(value: float) -> str:
    return repr(float(value))


def log_rows(log: TrajectoryLog):
    for r in log.records:
        yield ([_fmt(r.t)] + [_fmt(v) for v in r.q] + [_fmt(v) for v in r.tcp]
               + [_fmt(v) for v in r.v_cmd] + [r.mode.value, _fmt(r.d_ro),
               str(r.obstacle_class)] + [_fmt(v) for v in r.forces] + [str(r.waypoint)])


def write_log(log: TrajectoryLog, path) -> None:
    """Delimiter-separated log: header plus one row per tick, floats in
    shortest exact-round-trip form."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for row in log_rows(log):
            writer.writerow(row)


def read_log(path) -> TrajectoryLog:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty log file")
        if header != LOG_COLUMNS:
            raise ParseError(f"{path}: unexpected log header {header}")
        records = []
        for row in reader:
            if len(row) != len(LOG_COLUMNS):
                raise ParseError(f"{path}: row {len(records) + 2} has {len(row)} fields")
            records.append(TickRecord(
                t=float(row[0]),
                q=np.array([float(v) for v in row[1:7]]),
                tcp=np.array([float(v) for v in row[7:10]]),
                v_cmd=np.array([float(v) for v in row[10:13]]),
                mode=Mode(row[13]),
                d_ro=float(row[14]),
                obstacle_class=int(row[15]),
                forces=tuple(float(v) for v in row[16:19]),
                waypoint=int(row[19]),
            ))
    dt = records[1].t - records[0].t if len(records) > 1 else 0.1
    return TrajectoryLog(records=records, dt=dt)


def log_to_csv_text(log: TrajectoryLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(LOG_COLUMNS)
    for row in log_rows(log):
        writer.writerow(row)
    return buf.getvalue()
