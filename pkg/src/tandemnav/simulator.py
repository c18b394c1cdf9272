"""Deterministic fixed-timestep orchestration of the full pipeline.

Per step, in fixed order: obstacles advance, the guidance point replans
against the current obstacle positions, the drone tracks it, the reference
point steps through the impedance links, the robot follows the reference,
collisions are checked, then termination. Identical scenarios produce
bit-identical results; there is no wall-clock or hidden randomness anywhere.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .apf import Agent, ApfForce, ApfStatus, SingularityError, apf_step, attraction_force, repulsion_force
from .control import DronePids, DroneState, RobotPids, RobotState, drone_track_step, robot_follow_step
from .geometry import Vec3
from .impedance import ImpedanceState, LinkMode, robot_reference_step
from .scenario import Obstacle, ObstacleKind, Scenario, obstacle_position

_ZERO = Vec3(0.0, 0.0, 0.0)


class ConfigError(Exception):
    """Scenario cannot be simulated as configured."""


class Outcome(Enum):
    SUCCESS = "Success"
    COLLISION_DRONE = "CollisionDrone"
    COLLISION_ROBOT = "CollisionRobot"
    LOCAL_MINIMUM = "LocalMinimum"
    TIMEOUT = "Timeout"


@dataclass(frozen=True, slots=True)
class SimFrame:
    t: float
    drone: DroneState
    robot: RobotState
    robot_ref: Vec3
    link_mode: LinkMode
    apf_force: ApfForce
    obstacle_positions: tuple[tuple[int, Vec3], ...]


@dataclass(frozen=True, slots=True)
class SimResult:
    frames: tuple[SimFrame, ...]
    outcome: Outcome
    collided_with: int | None = None
    completion_time: float | None = None

    @property
    def success(self) -> bool:
        return self.outcome is Outcome.SUCCESS


def check_collision(
    agent_pos: Vec3,
    agent_radius: float,
    obstacles: list[tuple[Obstacle, Vec3]],
    agent: Agent,
) -> int | None:
    """Id of the first obstacle body overlapping the agent disc, else None.

    The robot is checked in plan view against every obstacle. The drone is
    checked only against full obstacles tall enough to reach its altitude;
    ground-only obstacles never collide with it.
    """
    for obstacle, center in obstacles:
        if agent is Agent.DRONE:
            if obstacle.kind is ObstacleKind.GROUND_ONLY:
                continue
            if obstacle.height < agent_pos.z:
                continue
        if agent_pos.distance_xy(center) < obstacle.body_radius + agent_radius:
            return obstacle.id
    return None


def _probe_force(carrot: Vec3, goal: Vec3, obstacles, coeffs) -> ApfForce:
    """Force snapshot for the initial frame; zero if the field is singular."""
    attraction = attraction_force(carrot, goal.with_z(carrot.z), coeffs.attraction_gain)
    try:
        repulsion = repulsion_force(carrot, obstacles, coeffs.repulsion_gain, Agent.DRONE)
    except SingularityError:
        return ApfForce(attraction=_ZERO, repulsion=_ZERO)
    return ApfForce(attraction=attraction, repulsion=repulsion)


def run(scenario: Scenario) -> SimResult:
    """Simulate a scenario to completion.

    Returns a result with the frame trajectory and one of: Success (both
    agents within goal tolerance), CollisionDrone/CollisionRobot (body
    overlap, with the obstacle id), LocalMinimum (guidance point stagnated
    away from the goal), or Timeout.
    """
    coeffs = scenario.coeffs
    dt = scenario.dt
    tolerance = scenario.goal_tolerance
    n_steps = int(math.floor(scenario.max_time / dt + 1e-9))

    carrot = scenario.drone_start.with_z(scenario.drone_altitude)
    drone = DroneState(pos=scenario.drone_start, vel=_ZERO)
    to_goal = scenario.robot_goal - scenario.robot_start
    heading = math.atan2(to_goal.y, to_goal.x) if to_goal.norm_xy() > 1e-9 else 0.0
    robot = RobotState(pos=scenario.robot_start, heading=heading)
    robot_ref = scenario.robot_start.xy()
    link_state = ImpedanceState.at_rest(coeffs)
    link_mode = LinkMode.drone(0.0)
    drone_pids = DronePids()
    robot_pids = RobotPids()
    step_window: deque[float] = deque(maxlen=100)

    obstacles_now = [(o, obstacle_position(o, 0.0)) for o in scenario.obstacles]
    frames: list[SimFrame] = [SimFrame(
        t=0.0, drone=drone, robot=robot, robot_ref=robot_ref, link_mode=link_mode,
        apf_force=_probe_force(carrot, scenario.drone_goal, obstacles_now, coeffs),
        obstacle_positions=tuple((o.id, p) for o, p in obstacles_now),
    )]

    outcome: Outcome | None = None
    collided_with: int | None = None
    completion_time: float | None = None

    for k in range(n_steps):
        t = (k + 1) * dt
        obstacles_now = [(o, obstacle_position(o, t)) for o in scenario.obstacles]

        # a moving obstacle can sweep over the guidance point; replan from the
        # vehicle rather than evaluating a singular field
        for obstacle, center in obstacles_now:
            if obstacle.kind is ObstacleKind.FULL and \
                    carrot.distance_xy(center) <= obstacle.body_radius + 2e-6:
                carrot = drone.pos.with_z(scenario.drone_altitude)
                break
        try:
            carrot_new, force, status = apf_step(
                carrot, scenario.drone_goal, obstacles_now, coeffs, dt,
                goal_tolerance=tolerance, recent_steps=step_window,
            )
        except SingularityError:
            carrot_new = drone.pos.with_z(scenario.drone_altitude)
            force = ApfForce(attraction=_ZERO, repulsion=_ZERO)
            status = ApfStatus.PROGRESSING
        if status is not ApfStatus.GOAL_REACHED:
            step_window.append(carrot_new.distance_to(carrot))
        carrot = carrot_new

        drone, drone_pids = drone_track_step(drone, carrot, drone_pids, coeffs, dt)
        robot_ref, link_state, link_mode = robot_reference_step(
            link_state, link_mode, drone.pos, drone.vel, robot_ref,
            obstacles_now, coeffs, dt, t,
        )
        robot, robot_pids = robot_follow_step(robot, robot_ref, robot_pids, coeffs, dt)

        frames.append(SimFrame(
            t=t, drone=drone, robot=robot, robot_ref=robot_ref, link_mode=link_mode,
            apf_force=force,
            obstacle_positions=tuple((o.id, p) for o, p in obstacles_now),
        ))

        hit = check_collision(drone.pos, scenario.drone_radius, obstacles_now, Agent.DRONE)
        if hit is not None:
            outcome, collided_with = Outcome.COLLISION_DRONE, hit
            break
        hit = check_collision(robot.pos, scenario.robot_radius, obstacles_now, Agent.ROBOT)
        if hit is not None:
            outcome, collided_with = Outcome.COLLISION_ROBOT, hit
            break
        if drone.pos.distance_to(scenario.drone_goal) <= tolerance and \
                robot.pos.distance_xy(scenario.robot_goal) <= tolerance:
            outcome, completion_time = Outcome.SUCCESS, t
            break
        if status is ApfStatus.LOCAL_MINIMUM:
            outcome = Outcome.LOCAL_MINIMUM
            break

    if outcome is None:
        outcome = Outcome.TIMEOUT

    return SimResult(
        frames=tuple(frames), outcome=outcome,
        collided_with=collided_with, completion_time=completion_time,
    )


# ---------------------------------------------------------------------------
# Trajectory dump
# ---------------------------------------------------------------------------

TRAJECTORY_HEADER = "t,drone_x,drone_y,drone_z,robot_x,robot_y,robot_heading,ref_x,ref_y,mode"


def write_trajectory_csv(result: SimResult, scenario: Scenario, out_dir: Path) -> list[Path]:
    """Write the per-frame trajectory plus one file per moving obstacle."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []

    main = out_dir / "trajectory.csv"
    lines = [TRAJECTORY_HEADER]
    for f in result.frames:
        lines.append(
            f"{f.t:.6f},{f.drone.pos.x:.6f},{f.drone.pos.y:.6f},{f.drone.pos.z:.6f},"
            f"{f.robot.pos.x:.6f},{f.robot.pos.y:.6f},{f.robot.heading:.6f},"
            f"{f.robot_ref.x:.6f},{f.robot_ref.y:.6f},{f.link_mode.label()}"
        )
    main.write_text("\n".join(lines) + "\n")
    paths.append(main)

    for obstacle in scenario.moving_obstacles():
        path = out_dir / f"obstacle_{obstacle.id}.csv"
        rows = ["t,x,y"]
        for f in result.frames:
            pos = next(p for oid, p in f.obstacle_positions if oid == obstacle.id)
            rows.append(f"{f.t:.6f},{pos.x:.6f},{pos.y:.6f}")
        path.write_text("\n".join(rows) + "\n")
        paths.append(path)
    return paths
