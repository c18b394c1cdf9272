"""Command-line entry point.

Subcommands: ``run`` (single scenario), ``batch`` (seeded generated
scenarios), ``compare`` (field planner vs grid baseline, per agent), and
``generate`` (write a random scenario file). Every report path writes
delimited output plus JSON metrics, and renders figures alongside unless
``--no-figures`` is given. Exit codes: 0 success, 1 simulation-level failure,
2 usage/config error. All randomness flows from explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import cbs as cbs_mod
from . import figures, metrics
from .apf import Agent
from .scenario import (
    Density,
    GenerationError,
    ParseError,
    Scenario,
    ValidationError,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .simulator import Outcome, SimResult, run, write_trajectory_csv

USAGE_ERROR = 2
SIM_FAILURE = 1


class DynamicScenarioError(Exception):
    """The grid baseline is static; moving obstacles cannot be compared."""


def _load_scenario_file(path: Path) -> Scenario:
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    return load_scenario(path.read_text())


def _write_run_outputs(
    result: SimResult,
    scenario: Scenario,
    out_dir: Path,
    with_figures: bool,
) -> metrics.RunMetrics:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(result, scenario, out_dir)
    run_metrics = metrics.compute_run_metrics(result, scenario)
    metrics.write_run_metrics(run_metrics, out_dir / "metrics.json", result.collided_with)
    if with_figures:
        figures.render_trajectory(result, scenario, out_dir / "trajectory.png")
        figures.render_velocity(result, out_dir / "velocity.png")
    return run_metrics


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load_scenario_file(Path(args.scenario))
    result = run(scenario)
    _write_run_outputs(result, scenario, Path(args.out), not args.no_figures)
    if result.outcome is not Outcome.SUCCESS:
        reason = result.outcome.value
        if result.collided_with is not None:
            reason += f" (obstacle {result.collided_with})"
        print(f"simulation failed: {reason}", file=sys.stderr)
        return SIM_FAILURE
    print(f"success in {result.completion_time:.2f} s; outputs in {args.out}")
    return 0


def _batch_record(seed: int, density: str, dynamic: int) -> dict:
    """Run one generated scenario and reduce it to a metrics record."""
    scenario = generate_scenario(seed, density, dynamic)
    result = run(scenario)
    m = metrics.compute_run_metrics(result, scenario)
    record = metrics.run_metrics_to_dict(m, result.collided_with)
    record["seed"] = seed
    del record["velocity_series"]  # per-run files carry the series; keep records light
    return record


def cmd_batch(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = list(range(args.seed, args.seed + args.n))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_batch_record, seeds,
                                    [args.density] * len(seeds), [args.dynamic] * len(seeds)))
    else:
        records = [_batch_record(s, args.density, args.dynamic) for s in seeds]
    records.sort(key=lambda r: r["seed"])

    for record in records:
        run_dir = out_dir / f"run_{record['seed']}"
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "metrics.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")

    outcomes = ["seed,outcome,collided_with,completion_time,traj_length_drone,traj_length_robot,"
                "min_clearance_drone,min_clearance_robot,mean_robot_deviation"]
    for r in records:

        def fmt(v) -> str:
            return "" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))

        outcomes.append(",".join([
            str(r["seed"]), r["outcome"], fmt(r["collided_with"]), fmt(r["completion_time"]),
            fmt(r["traj_length_drone"]), fmt(r["traj_length_robot"]),
            fmt(r["min_clearance_drone"]), fmt(r["min_clearance_robot"]),
            fmt(r["mean_robot_deviation"]),
        ]))
    (out_dir / "outcomes.csv").write_text("\n".join(outcomes) + "\n")

    counts: dict[str, int] = {}
    successes = 0
    for r in records:
        if r["outcome"] == Outcome.SUCCESS.value:
            successes += 1
        else:
            counts[r["outcome"]] = counts.get(r["outcome"], 0) + 1
    summary = metrics.BatchSummary(
        total=len(records), successes=successes,
        success_rate=100.0 * successes / len(records),
        failure_histogram=dict(sorted(counts.items())),
    )
    metrics.write_batch_summary(summary, out_dir / "batch_summary.json",
                                per_run=[{k: r[k] for k in ("seed", "outcome")} for r in records])
    if not args.no_figures:
        figures.render_batch(summary, out_dir / "batch_summary.png")
    print(f"{summary.successes}/{summary.total} runs succeeded "
          f"({summary.success_rate:.1f}%); outputs in {out_dir}")
    return 0


def _single_agent_cbs(grid: cbs_mod.GridMap, start_cell, goal_cell):
    try:
        return cbs_mod.cbs_solve(grid, [(start_cell, goal_cell)]), None
    except cbs_mod.BudgetExceeded as e:
        return None, str(e)


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = _load_scenario_file(Path(args.scenario))
    if scenario.moving_obstacles():
        raise DynamicScenarioError(
            "scenario has moving obstacles; the grid baseline plans against a static snapshot"
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolution = args.resolution

    result = run(scenario)
    write_trajectory_csv(result, scenario, out_dir)
    run_metrics = metrics.compute_run_metrics(result, scenario)
    metrics.write_run_metrics(run_metrics, out_dir / "metrics.json", result.collided_with)

    grid_2d = cbs_mod.rasterize(scenario, resolution, cbs_mod.GridMode.TWO_D)
    grid_3d = cbs_mod.rasterize(scenario, resolution, cbs_mod.GridMode.THREE_D)
    robot_sol, robot_err = _single_agent_cbs(
        grid_2d, grid_2d.cell_of(scenario.robot_start), grid_2d.cell_of(scenario.robot_goal))
    drone_sol, drone_err = _single_agent_cbs(
        grid_3d, grid_3d.cell_of(scenario.drone_start), grid_3d.cell_of(scenario.drone_goal))

    def cbs_row(method: str, agent: str, sol, err) -> dict:
        if sol is None:
            return {"method": method, "agent": agent, "trajectory_length_m": None,
                    "min_obstacle_distance_m": None,
                    "status": f"unsolved: {err}" if err else "unsolved"}
        return {"method": method, "agent": agent,
                "trajectory_length_m": sol.lengths_m[0],
                "min_obstacle_distance_m": (None if sol.min_clearances_m[0] == float("inf")
                                            else sol.min_clearances_m[0]),
                "status": "ok"}

    rows = [
        cbs_row("grid-2d", "robot", robot_sol, robot_err),
        {"method": "field", "agent": "robot",
         "trajectory_length_m": run_metrics.traj_length_robot,
         "min_obstacle_distance_m": (None if run_metrics.min_clearance_robot == float("inf")
                                     else run_metrics.min_clearance_robot),
         "status": result.outcome.value},
        cbs_row("grid-3d", "drone", drone_sol, drone_err),
        {"method": "field", "agent": "drone",
         "trajectory_length_m": run_metrics.traj_length_drone,
         "min_obstacle_distance_m": (None if run_metrics.min_clearance_drone == float("inf")
                                     else run_metrics.min_clearance_drone),
         "status": result.outcome.value},
    ]

    if args.joint:
        cells = [
            (grid_2d.cell_of(scenario.robot_start), grid_2d.cell_of(scenario.robot_goal)),
            (grid_2d.cell_of(scenario.drone_start), grid_2d.cell_of(scenario.drone_goal)),
        ]
        if len({cells[0][0], cells[1][0]}) < 2 or len({cells[0][1], cells[1][1]}) < 2:
            rows.append({"method": "grid-2d-joint", "agent": "both", "trajectory_length_m": None,
                         "min_obstacle_distance_m": None,
                         "status": "unavailable: agents share a start or goal cell"})
        else:
            try:
                joint = cbs_mod.cbs_solve(grid_2d, cells)
            except cbs_mod.BudgetExceeded as e:
                joint, joint_err = None, str(e)
            else:
                joint_err = None
            if joint is None:
                rows.append({"method": "grid-2d-joint", "agent": "both", "trajectory_length_m": None,
                             "min_obstacle_distance_m": None,
                             "status": f"unsolved: {joint_err}" if joint_err else "unsolved"})
            else:
                for idx, agent in enumerate(("robot", "drone")):
                    rows.append({"method": "grid-2d-joint", "agent": agent,
                                 "trajectory_length_m": joint.lengths_m[idx],
                                 "min_obstacle_distance_m": joint.min_clearances_m[idx],
                                 "status": "ok"})

    header = "method,agent,trajectory_length_m,min_obstacle_distance_m,status"
    csv_lines = [header]
    for r in rows:
        length = "" if r["trajectory_length_m"] is None else f"{r['trajectory_length_m']:.6f}"
        clear = "" if r["min_obstacle_distance_m"] is None else f"{r['min_obstacle_distance_m']:.6f}"
        csv_lines.append(f"{r['method']},{r['agent']},{length},{clear},{r['status']}")
    (out_dir / "comparison.csv").write_text("\n".join(csv_lines) + "\n")
    (out_dir / "comparison.json").write_text(json.dumps(
        {"schema": 1, "resolution": resolution, "rows": rows}, indent=2, sort_keys=True) + "\n")

    if not args.no_figures:
        figures.render_comparison(result, scenario, grid_2d, robot_sol, grid_3d, drone_sol,
                                  out_dir / "comparison.png")
        figures.render_trajectory(result, scenario, out_dir / "trajectory.png")
    print(f"comparison written to {out_dir}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    scenario = generate_scenario(args.seed, args.density, args.dynamic)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(save_scenario(scenario))
    print(f"scenario written to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tandemnav",
        description="Deterministic aerial-leader / ground-follower simulation and planning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario file")
    p_run.add_argument("--scenario", required=True, help="scenario YAML path")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="run n seeded generated scenarios")
    p_batch.add_argument("--n", type=int, required=True, help="number of runs")
    p_batch.add_argument("--seed", type=int, required=True, help="first seed; runs use seed..seed+n-1")
    p_batch.add_argument("--density", choices=["sparse", "dense"], required=True)
    p_batch.add_argument("--dynamic", type=int, required=True, help="moving obstacles per scenario")
    p_batch.add_argument("--out", required=True, help="output directory")
    p_batch.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_batch.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_batch.set_defaults(func=cmd_batch)

    p_cmp = sub.add_parser("compare", help="field planner vs grid baseline on a static scenario")
    p_cmp.add_argument("--scenario", required=True, help="scenario YAML path")
    p_cmp.add_argument("--resolution", type=float, default=cbs_mod.DEFAULT_RESOLUTION,
                       help="grid resolution in meters")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--joint", action="store_true",
                       help="also solve both agents jointly on the 2D grid")
    p_cmp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_cmp.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("generate", help="write a random scenario file")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--density", choices=["sparse", "dense"], required=True)
    p_gen.add_argument("--dynamic", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="output scenario path")
    p_gen.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, GenerationError, DynamicScenarioError,
            FileNotFoundError, NotADirectoryError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
