"""Command-line entry point: run, sweep, serve, validate, metrics.

Exit codes: 0 success, 1 parse/validation problems, 2 runtime failures
(joint limit hit, numerical failure).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from . import experiments as exp
from . import scenario as scn
from .errors import CobotApfError, NumericalFailure, ParseError, ValidationError
from .simulator import run as run_sim

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobot-apf",
        description="Potential-field collision avoidance simulator for a 6-DOF arm",
    )
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="simulate a scenario file, write log and report")
    p_run.add_argument("scenario", type=Path)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--dt", type=float, default=None, help="override sim.dt")
    p_run.add_argument("--seed", type=int, default=None, help="seed for randomized tracks")
    p_run.add_argument("--quiet", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a spec file")
    p_sweep.add_argument("spec", type=Path)
    p_sweep.add_argument("--out", type=Path, default=Path("out"))
    p_sweep.add_argument("--dt", type=float, default=None)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--quiet", action="store_true")

    p_serve = sub.add_parser("serve", help="serve the live bridge and UI for a scenario")
    p_serve.add_argument("scenario", type=Path)
    p_serve.add_argument("--port", type=int, default=8090)
    p_serve.add_argument("--quiet", action="store_true")

    p_val = sub.add_parser("validate", help="parse and validate a scenario file")
    p_val.add_argument("scenario", type=Path)

    p_met = sub.add_parser("metrics", help="recompute the metrics report from a log file")
    p_met.add_argument("log", type=Path)
    return parser


def _say(quiet: bool, *parts):
    if not quiet:
        print(*parts)


def _report_doc(report: exp.MetricsReport, scenario: scn.Scenario | None) -> dict:
    doc = {"report": report.to_dict()}
    if scenario is not None:
        doc["config"] = scn.scenario_to_dict(scenario)
    return doc


def _write_xy(log, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for r in log.records:
            fh.write(f"{r.tcp[0]!r},{r.tcp[1]!r}\n")


def cmd_run(args) -> int:
    scenario = scn.parse_scenario(args.scenario)
    if args.dt is not None:
        scenario = scn.Scenario(config=replace(scenario.config, dt=args.dt),
                                track=scenario.track, plan=scenario.plan)
    log = run_sim(scenario.config, scenario.track, scenario.plan)
    args.out.mkdir(parents=True, exist_ok=True)
    scn.write_log(log, args.out / "log.csv")
    report = exp.compute_metrics(log)
    (args.out / "report.yaml").write_text(
        yaml.safe_dump(_report_doc(report, scenario), sort_keys=False), encoding="utf-8")
    _write_xy(log, args.out / "xy.csv")
    _say(args.quiet, f"wrote {args.out}/log.csv ({len(log.records)} ticks), report.yaml, xy.csv")
    if log.halted:
        _say(args.quiet, f"run halted: {log.halted}")
        return EXIT_RUNTIME
    return EXIT_OK


def _load_sweep_spec(path: Path):
    doc = scn.load_yaml(path.read_text(encoding="utf-8"), source=str(path))
    if not isinstance(doc, dict) or set(doc) != {"sweep", "scenario"}:
        raise ValidationError("sweep spec: expected exactly the keys 'sweep' and 'scenario'")
    sweep = doc["sweep"]
    if not isinstance(sweep, dict) or set(sweep) != {"parameter", "values"}:
        raise ValidationError("sweep.sweep: expected keys 'parameter' and 'values'")
    parameter = sweep["parameter"]
    if parameter not in ("theta_obs", "d_at", "random_safety"):
        raise ValidationError("sweep.parameter: one of theta_obs | d_at | random_safety")
    values = sweep["values"]
    if not isinstance(values, list) or not values:
        raise ValidationError("sweep.values: non-empty list required")
    base_path = (path.parent / doc["scenario"]).resolve()
    return parameter, values, scn.parse_scenario(base_path)


def _apply_parameter(scenario: scn.Scenario, parameter: str, value: float) -> scn.Scenario:
    cfg = scenario.config
    if parameter == "theta_obs":
        if not 0 < value < 90:
            raise ValidationError("sweep theta_obs values must lie in (0, 90) deg")
        gains = replace(cfg.gains, theta_obs=float(np.deg2rad(value)))
        cfg = replace(cfg, gains=gains)
    else:
        thresholds = replace(cfg.thresholds, d_at=float(value))
        cfg = replace(cfg, thresholds=thresholds)
    return scn.Scenario(config=cfg, track=scenario.track, plan=scenario.plan)


def cmd_sweep(args) -> int:
    parameter, values, base = _load_sweep_spec(args.spec)
    args.out.mkdir(parents=True, exist_ok=True)
    if parameter == "random_safety":
        n_runs = int(values[0])
        result = exp.run_random_safety(n_runs=n_runs, seed=args.seed,
                                       counterexample_dir=args.out)
        doc = {"random_safety": {
            "runs": result.runs, "seed": args.seed,
            "violations": [{"index": i, "min_d_ro": d} for i, d in result.violations],
            "pass_rate": result.pass_rate,
            "min_d_ro_overall": result.min_d_ro_overall,
        }}
        (args.out / "safety_report.yaml").write_text(
            yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
        _say(args.quiet, f"safety probe: {result.pass_rate:.1%} of {result.runs} runs clear")
        return EXIT_OK
    for value in values:
        scenario = _apply_parameter(base, parameter, float(value))
        if args.dt is not None:
            scenario = scn.Scenario(config=replace(scenario.config, dt=args.dt),
                                    track=scenario.track, plan=scenario.plan)
        log = run_sim(scenario.config, scenario.track, scenario.plan)
        tag = f"{parameter}_{value:g}"
        run_dir = args.out / tag
        run_dir.mkdir(parents=True, exist_ok=True)
        scn.write_log(log, run_dir / "log.csv")
        report = exp.compute_metrics(log)
        (run_dir / "report.yaml").write_text(
            yaml.safe_dump(_report_doc(report, scenario), sort_keys=False), encoding="utf-8")
        _write_xy(log, run_dir / "xy.csv")
        _say(args.quiet, f"{tag}: min_d_ro={report.min_d_ro:.4f} path={report.path_length:.4f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scn.parse_scenario(args.scenario)
    print(f"{args.scenario}: valid")
    return EXIT_OK


def cmd_metrics(args) -> int:
    log = scn.read_log(args.log)
    report = exp.compute_metrics(log)
    print(yaml.safe_dump({"report": report.to_dict()}, sort_keys=False), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .bridge import serve  # deferred: pulls in the web stack

    scenario = scn.parse_scenario(args.scenario)
    serve(scenario, port=args.port, quiet=args.quiet)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "serve": cmd_serve,
                "validate": cmd_validate, "metrics": cmd_metrics}
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except CobotApfError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
