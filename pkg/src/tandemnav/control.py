"""PID path followers: a kinematic drone tracker and a differential-drive robot.

The drone runs an independent position PID per axis whose output is a velocity
command saturated at the drone speed limit. The robot runs a cascaded pair:
a heading PID commanding turn rate and a distance PID commanding forward
speed, the latter gated by the cosine of the heading error (floored at zero,
so the robot never reverses while misaligned).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Vec3, wrap_angle
from .scenario import CoeffSet, PidGains

_STANDSTILL_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


@dataclass(frozen=True, slots=True)
class DroneState:
    pos: Vec3
    vel: Vec3


@dataclass(frozen=True, slots=True)
class RobotState:
    """Unicycle state; pos.z is 0 always, heading in (-pi, pi]."""

    pos: Vec3
    heading: float
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True, slots=True)
class DronePids:
    x: PidState = PidState()
    y: PidState = PidState()
    z: PidState = PidState()


@dataclass(frozen=True, slots=True)
class RobotPids:
    heading: PidState = PidState()
    distance: PidState = PidState()


def pid_update(
    state: PidState,
    error: float,
    gains: PidGains,
    dt: float,
    integral_limit: float = 2.0,
) -> tuple[float, PidState]:
    """One PID step with integral clamping (anti-windup)."""
    integral = state.integral + error * dt
    integral = min(max(integral, -integral_limit), integral_limit)
    derivative = (error - state.prev_error) / dt
    output = gains.kp * error + gains.ki * integral + gains.kd * derivative
    return output, PidState(integral=integral, prev_error=error)


def drone_track_step(
    state: DroneState,
    ref_pos: Vec3,
    pids: DronePids,
    coeffs: CoeffSet,
    dt: float,
) -> tuple[DroneState, DronePids]:
    """Track a reference point with per-axis position PID -> velocity command."""
    gains = coeffs.drone_pid
    limit = coeffs.integral_limit
    vx, px = pid_update(pids.x, ref_pos.x - state.pos.x, gains, dt, limit)
    vy, py = pid_update(pids.y, ref_pos.y - state.pos.y, gains, dt, limit)
    vz, pz = pid_update(pids.z, ref_pos.z - state.pos.z, gains, dt, limit)
    vel = Vec3(vx, vy, vz).clipped(coeffs.max_speed_drone)
    pos = Vec3(state.pos.x + vel.x * dt, state.pos.y + vel.y * dt, state.pos.z + vel.z * dt)
    return DroneState(pos=pos, vel=vel), DronePids(px, py, pz)


def robot_follow_step(
    state: RobotState,
    ref_pos: Vec3,
    pids: RobotPids,
    coeffs: CoeffSet,
    dt: float,
) -> tuple[RobotState, RobotPids]:
    """Steer the unicycle toward a ground reference point.

    Turn rate comes from a PID on the wrapped heading error, forward speed
    from a PID on the remaining distance scaled by max(cos(heading error), 0).
    """
    dx = ref_pos.x - state.pos.x
    dy = ref_pos.y - state.pos.y
    distance = math.hypot(dx, dy)
    if distance < _STANDSTILL_EPS:
        return RobotState(pos=state.pos, heading=state.heading, v=0.0, omega=0.0), pids

    heading_error = wrap_angle(math.atan2(dy, dx) - state.heading)
    limit = coeffs.integral_limit
    omega, heading_pid = pid_update(pids.heading, heading_error, coeffs.robot_heading_pid, dt, limit)
    omega = min(max(omega, -coeffs.max_turn_rate), coeffs.max_turn_rate)
    speed_cmd, distance_pid = pid_update(pids.distance, distance, coeffs.robot_distance_pid, dt, limit)
    v = speed_cmd * max(math.cos(heading_error), 0.0)
    v = min(max(v, 0.0), coeffs.max_speed_robot)

    heading = wrap_angle(state.heading + omega * dt)
    pos = Vec3(state.pos.x + v * math.cos(heading) * dt, state.pos.y + v * math.sin(heading) * dt, 0.0)
    return RobotState(pos=pos, heading=heading, v=v, omega=omega), RobotPids(heading_pid, distance_pid)
