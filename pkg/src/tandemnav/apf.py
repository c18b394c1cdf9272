"""Potential-field guidance for the drone.

The total steering force is the sum of an attraction toward the goal,
proportional to the goal distance, and a per-obstacle repulsion that is zero
beyond the activation clearance and grows as the inverse of the surface
clearance inside it. The force is treated as a velocity command saturated at
the drone's speed limit; all forces act in the ground plane and the guidance
point keeps its planning altitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .geometry import Vec3
from .scenario import CoeffSet, Obstacle, ObstacleKind

SURFACE_EPS = 1e-6

# Stagnation test: mean per-step displacement over a full window below this
# threshold, with the goal not reached, is reported as a local minimum.
STAGNATION_WINDOW = 100
STAGNATION_MEAN_STEP = 1e-3


class SingularityError(Exception):
    """Evaluation point is on (or inside) an obstacle surface."""


class Agent(Enum):
    DRONE = "drone"
    ROBOT = "robot"


class ApfStatus(Enum):
    PROGRESSING = "progressing"
    GOAL_REACHED = "goal_reached"
    LOCAL_MINIMUM = "local_minimum"


@dataclass(frozen=True, slots=True)
class ApfForce:
    attraction: Vec3
    repulsion: Vec3

    @property
    def total(self) -> Vec3:
        return self.attraction + self.repulsion


def relevant_obstacles(
    obstacles: Iterable[tuple[Obstacle, Vec3]], agent: Agent
) -> list[tuple[Obstacle, Vec3]]:
    """Filter (obstacle, position-at-t) pairs: the drone ignores ground-only."""
    if agent is Agent.DRONE:
        return [(o, p) for o, p in obstacles if o.kind is ObstacleKind.FULL]
    return list(obstacles)


def attraction_force(pos: Vec3, goal: Vec3, attraction_gain: float) -> Vec3:
    """Pull toward the goal with magnitude gain * distance."""
    return (goal - pos) * attraction_gain


def repulsion_force(
    pos: Vec3,
    obstacles: Iterable[tuple[Obstacle, Vec3]],
    repulsion_gain: float,
    agent: Agent,
    surface_distance: bool = True,
) -> Vec3:
    """Sum of per-obstacle pushes, evaluated in the ground plane.

    Each relevant obstacle contributes gain * (1/d - 1/d_active) along the
    unit vector from its center to ``pos``, where d is the plan-view
    clearance from the body surface (or center distance when
    ``surface_distance`` is False) and d_active is the obstacle's
    ``safe_radius``. Contributions vanish for d > d_active, so the field is
    continuous at the activation boundary.
    """
    fx = fy = 0.0
    for obstacle, center in relevant_obstacles(obstacles, agent):
        dx = pos.x - center.x
        dy = pos.y - center.y
        center_dist = math.hypot(dx, dy)
        d = center_dist - obstacle.body_radius if surface_distance else center_dist
        if d < SURFACE_EPS:
            raise SingularityError(
                f"evaluation point within {SURFACE_EPS} m of obstacle {obstacle.id} surface"
            )
        if d > obstacle.safe_radius:
            continue
        magnitude = repulsion_gain * (1.0 / d - 1.0 / obstacle.safe_radius)
        fx += magnitude * dx / center_dist
        fy += magnitude * dy / center_dist
    return Vec3(fx, fy, 0.0)


def apf_step(
    pos: Vec3,
    goal: Vec3,
    obstacles: Iterable[tuple[Obstacle, Vec3]],
    coeffs: CoeffSet,
    dt: float,
    goal_tolerance: float = 0.15,
    recent_steps: Sequence[float] | None = None,
) -> tuple[Vec3, ApfForce, ApfStatus]:
    """Advance the guidance point one step.

    The net force, projected to the ground plane, becomes a velocity command
    clipped to the drone speed limit; z is held at the current planning
    altitude. Within ``goal_tolerance`` of the goal the point freezes and
    reports GOAL_REACHED. ``recent_steps`` is the caller-maintained window of
    previous per-step displacements used by the stagnation test.
    """
    if pos.distance_xy(goal) <= goal_tolerance:
        force = ApfForce(attraction=Vec3(0.0, 0.0, 0.0), repulsion=Vec3(0.0, 0.0, 0.0))
        return pos, force, ApfStatus.GOAL_REACHED

    attraction = attraction_force(pos, goal.with_z(pos.z), coeffs.attraction_gain)
    repulsion = repulsion_force(pos, obstacles, coeffs.repulsion_gain, Agent.DRONE)
    force = ApfForce(attraction=attraction, repulsion=repulsion)

    velocity = force.total.clipped(coeffs.max_speed_drone)
    new_pos = Vec3(pos.x + velocity.x * dt, pos.y + velocity.y * dt, pos.z)

    status = ApfStatus.PROGRESSING
    if recent_steps is not None and len(recent_steps) >= STAGNATION_WINDOW:
        window = list(recent_steps)[-STAGNATION_WINDOW:]
        if sum(window) / len(window) < STAGNATION_MEAN_STEP:
            status = ApfStatus.LOCAL_MINIMUM
    return new_pos, force, status
