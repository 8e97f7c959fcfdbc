"""Generates the shipped scenario/spec documents from the experiment
definitions, so files and code cannot drift apart. Run as a module to
rebuild src/cobot_apf/data/."""

from __future__ import annotations

from pathlib import Path

import yaml

from . import experiments as exp
from . import scenario as scn
from .models import DEFAULT_ARM_SPEC
from .simulator import LiveTrack, SimConfig, StaticTrack

DATA_DIR = Path(__file__).parent / "data"


def default_scenario() -> scn.Scenario:
    return scn.Scenario(config=exp.calibration_config(),
                        track=StaticTrack(exp.AB_MIDPOINT),
                        plan=exp.ab_plan())


def triangle_scenario() -> scn.Scenario:
    return scn.Scenario(config=exp.evaluation_config(),
                        track=exp.triangle_hand_track(),
                        plan=exp.triangle_plan())


def pickplace_scenario() -> scn.Scenario:
    return scn.Scenario(config=exp.evaluation_config(duration_max=180.0),
                        track=exp.pick_place_hand_track(),
                        plan=exp.pick_place_plan())


def live_scenario() -> scn.Scenario:
    cfg = exp.evaluation_config(duration_max=3600.0)
    return scn.Scenario(config=cfg, track=LiveTrack(), plan=exp.triangle_plan())


def sweep_spec(parameter: str, values: list, scenario_file: str) -> dict:
    return {"sweep": {"parameter": parameter, "values": values}, "scenario": scenario_file}


def build_all(target: Path = DATA_DIR) -> list:
    target.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, doc) -> None:
        path = target / name
        path.write_text(yaml.safe_dump(doc, sort_keys=False, default_flow_style=None),
                        encoding="utf-8")
        written.append(path)

    put("default_arm.yaml", DEFAULT_ARM_SPEC)
    put("default.scenario.yaml", scn.scenario_to_dict(default_scenario()))
    put("triangle.scenario.yaml", scn.scenario_to_dict(triangle_scenario()))
    put("pickplace.scenario.yaml", scn.scenario_to_dict(pickplace_scenario()))
    put("live.scenario.yaml", scn.scenario_to_dict(live_scenario()))
    put("theta_sweep.spec.yaml",
        sweep_spec("theta_obs", [35, 40, 45, 50], "default.scenario.yaml"))
    put("dat_sweep.spec.yaml",
        sweep_spec("d_at", [0.1, 0.2, 0.3], "default.scenario.yaml"))
    put("safety.spec.yaml", sweep_spec("random_safety", [200], "triangle.scenario.yaml"))
    return written


if __name__ == "__main__":
    for path in build_all():
        print(path)
