"""Virtual mass-spring-damper links driving the ground robot's reference point.

The reference point is the drone's ground projection plus a second-order
displacement state: ref(t) = projection(t) + dx(t), with
m*ddx + d*ddx' + k*dx = F_ext. While linked to the drone, F_ext pulls the
reference toward the projection, so the equilibrium offset is zero (exact
leader tracking). Inside a ground obstacle's deflection region the drone link
is disconnected and the forcing switches to a constant-magnitude radial push
(stiffness times deflect_gain * deflect_radius), so the offset settles at
exactly the deflection magnitude and returns to zero after the region exits.
A 10% hysteresis band on the region radius prevents mode chattering. The
reference point's z component is identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

from .geometry import Vec3, left_perp_xy
from .scenario import CoeffSet, Obstacle, ObstacleKind

HYSTERESIS = 0.1
_TIE_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class ImpedanceState:
    """Second-order link state: per-axis displacement and its rate, plus params."""

    delta_pos: Vec3
    delta_vel: Vec3
    mass: float
    damping: float
    stiffness: float

    @staticmethod
    def at_rest(coeffs: CoeffSet) -> "ImpedanceState":
        zero = Vec3(0.0, 0.0, 0.0)
        return ImpedanceState(zero, zero, coeffs.link_mass, coeffs.link_damping, coeffs.link_stiffness)

    def energy(self) -> float:
        """Mechanical energy of the unforced link (kinetic + spring)."""
        v2 = self.delta_vel.dot(self.delta_vel)
        x2 = self.delta_pos.dot(self.delta_pos)
        return 0.5 * self.mass * v2 + 0.5 * self.stiffness * x2


@dataclass(frozen=True, slots=True)
class LinkMode:
    """Which link forces the reference: the drone (obstacle_id None) or one obstacle."""

    obstacle_id: int | None
    entered_at: float

    @property
    def is_drone_link(self) -> bool:
        return self.obstacle_id is None

    @staticmethod
    def drone(t: float = 0.0) -> "LinkMode":
        return LinkMode(obstacle_id=None, entered_at=t)

    def label(self) -> str:
        return "drone" if self.is_drone_link else f"obstacle:{self.obstacle_id}"


def integrate_link(state: ImpedanceState, f_ext: Vec3, dt: float) -> ImpedanceState:
    """One semi-implicit Euler step of m*a + d*v + k*x = f_ext."""
    m, d, k = state.mass, state.damping, state.stiffness
    ax = (f_ext.x - d * state.delta_vel.x - k * state.delta_pos.x) / m
    ay = (f_ext.y - d * state.delta_vel.y - k * state.delta_pos.y) / m
    az = (f_ext.z - d * state.delta_vel.z - k * state.delta_pos.z) / m
    vel = Vec3(state.delta_vel.x + dt * ax, state.delta_vel.y + dt * ay, state.delta_vel.z + dt * az)
    pos = Vec3(state.delta_pos.x + dt * vel.x, state.delta_pos.y + dt * vel.y, state.delta_pos.z + dt * vel.z)
    return replace(state, delta_pos=pos, delta_vel=vel)


def drone_link_force(drone_pos: Vec3, drone_vel: Vec3, robot_ref: Vec3, coeffs: CoeffSet) -> Vec3:
    """Spring pull of the reference toward the drone's ground projection.

    ``drone_vel`` is accepted for velocity-feedforward variants but unused by
    the default proportional law.
    """
    del drone_vel
    offset = drone_pos.xy() - robot_ref.xy()
    return offset * coeffs.leader_pull_gain


def obstacle_deflection(
    robot_pos: Vec3,
    obstacle: Obstacle,
    obstacle_center: Vec3,
    deflect_gain: float,
    travel_dir: Vec3,
) -> Vec3:
    """Displacement of magnitude deflect_gain * deflect_radius, radially outward.

    The magnitude does not depend on penetration depth. When the heading
    passes through the obstacle (the ray along ``travel_dir`` intersects the
    body disc ahead, where the radial direction is anti-parallel and cannot
    steer aside) or the radial direction is degenerate, the displacement
    deflects to the left of ``travel_dir`` instead.
    """
    if obstacle.deflect_radius is None:
        raise ValueError(f"obstacle {obstacle.id} has no deflection region")
    magnitude = deflect_gain * obstacle.deflect_radius
    dx = robot_pos.x - obstacle_center.x
    dy = robot_pos.y - obstacle_center.y
    dist = math.hypot(dx, dy)
    if dist <= _TIE_EPS:
        return left_perp_xy(travel_dir) * magnitude
    # collision course: obstacle body ahead on the travel ray
    ahead = -(dx * travel_dir.x + dy * travel_dir.y)
    lateral = abs(dx * travel_dir.y - dy * travel_dir.x)
    if ahead > 0.0 and lateral <= obstacle.body_radius:
        return left_perp_xy(travel_dir) * magnitude
    return Vec3(dx / dist * magnitude, dy / dist * magnitude, 0.0)


def update_link_mode(
    mode: LinkMode,
    position: Vec3,
    obstacles: Iterable[tuple[Obstacle, Vec3]],
    t: float,
    hysteresis: float = HYSTERESIS,
) -> LinkMode:
    """Switch links based on the reference point's plan-view position.

    Entry: position inside a ground obstacle's deflect_radius (nearest wins,
    by surface distance, ties by id). Exit: position beyond
    deflect_radius * (1 + hysteresis) of the linked obstacle. Full obstacles
    never create links.
    """
    ground = [
        (o, c) for o, c in obstacles
        if o.kind is ObstacleKind.GROUND_ONLY and o.deflect_radius is not None
    ]
    if not mode.is_drone_link:
        current = next(((o, c) for o, c in ground if o.id == mode.obstacle_id), None)
        if current is not None:
            o, c = current
            if position.distance_xy(c) <= o.deflect_radius * (1.0 + hysteresis):
                return mode
    candidates = [
        (position.distance_xy(c) - o.body_radius, o.id)
        for o, c in ground
        if position.distance_xy(c) <= o.deflect_radius
    ]
    if candidates:
        _, obstacle_id = min(candidates)
        if obstacle_id == mode.obstacle_id:
            return mode
        return LinkMode(obstacle_id=obstacle_id, entered_at=t)
    if mode.is_drone_link:
        return mode
    return LinkMode.drone(t)


def robot_reference_step(
    state: ImpedanceState,
    mode: LinkMode,
    drone_pos: Vec3,
    drone_vel: Vec3,
    robot_ref: Vec3,
    obstacles: Iterable[tuple[Obstacle, Vec3]],
    coeffs: CoeffSet,
    dt: float,
    t: float,
) -> tuple[Vec3, ImpedanceState, LinkMode]:
    """Advance the reference point one step: mode switch, forcing, integration.

    The obstacle link fully replaces the drone link while active: the ODE
    forcing switches source, never summing both. The reference stays anchored
    to the leader's ground projection in both modes, so mode switches keep it
    continuous and the offset state stays bounded.
    """
    obstacles = list(obstacles)
    new_mode = update_link_mode(mode, robot_ref, obstacles, t)

    if new_mode.is_drone_link:
        f_ext = drone_link_force(drone_pos, drone_vel, robot_ref, coeffs)
    else:
        pair = next(((o, c) for o, c in obstacles if o.id == new_mode.obstacle_id), None)
        if pair is None:
            raise ValueError(f"linked obstacle {new_mode.obstacle_id} not present at t={t}")
        obstacle, center = pair
        if drone_vel.norm_xy() > 1e-9:
            travel_dir = drone_vel.xy().normalized()
        else:
            travel_dir = Vec3(1.0, 0.0, 0.0)
        displacement = obstacle_deflection(robot_ref, obstacle, center, coeffs.deflect_gain, travel_dir)
        f_ext = displacement * coeffs.link_stiffness

    state = integrate_link(state, f_ext, dt)
    new_ref = (drone_pos.xy() + state.delta_pos).xy()
    return new_ref, state, new_mode
