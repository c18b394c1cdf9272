"""Scenario data model: obstacles, coefficients, file I/O, and random generation.

A scenario file is a YAML document with top-level keys ``schema``, ``arena``,
``agents``, ``obstacles``, ``coeffs``, ``sim``. Lengths are meters, times are
seconds. ``schema: 1`` is mandatory. See README for the full schema.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
import yaml

from .geometry import Vec3

ARENA_SIZE_DEFAULT = 10.0
DRONE_RADIUS_DEFAULT = 0.12
ROBOT_RADIUS_DEFAULT = 0.20
MAX_PLACEMENT_ATTEMPTS = 10_000


class ParseError(Exception):
    """Scenario document is not well-formed."""


class ValidationError(Exception):
    """A scenario invariant is violated. Message names the offending field."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


class GenerationError(Exception):
    """Random placement failed within the attempt budget."""


class ObstacleKind(Enum):
    FULL = "full"          # influences both agents
    GROUND_ONLY = "ground"  # below drone altitude; influences only the robot


@dataclass(frozen=True, slots=True)
class WaypointLoop:
    """Closed polyline the obstacle traverses at constant speed, wrapping."""

    waypoints: tuple[Vec3, ...]
    speed: float


@dataclass(frozen=True, slots=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(name, f"PID gain must be finite and >= 0, got {v}")


@dataclass(frozen=True, slots=True)
class CoeffSet:
    """All tuning coefficients. Reference values ship in data/reference.yaml."""

    attraction_gain: float
    repulsion_gain: float
    link_mass: float
    link_damping: float
    link_stiffness: float
    deflect_gain: float
    leader_pull_gain: float
    max_speed_drone: float
    max_speed_robot: float
    max_turn_rate: float
    integral_limit: float
    drone_pid: PidGains
    robot_heading_pid: PidGains
    robot_distance_pid: PidGains

    def __post_init__(self) -> None:
        # deflect_gain and PID gains may be zero (null deflection / null
        # controller); everything else must be strictly positive.
        strictly_positive = (
            "attraction_gain", "repulsion_gain", "link_mass", "link_damping",
            "link_stiffness", "leader_pull_gain", "max_speed_drone",
            "max_speed_robot", "max_turn_rate", "integral_limit",
        )
        for name in strictly_positive:
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValidationError(f"coeffs.{name}", f"must be finite and > 0, got {v}")
        if not math.isfinite(self.deflect_gain) or self.deflect_gain < 0.0:
            raise ValidationError("coeffs.deflect_gain", f"must be finite and >= 0, got {self.deflect_gain}")

    @property
    def damping_regime(self) -> str:
        """Classify the link damping (recorded for reports, not constrained)."""
        disc = self.link_damping**2 - 4.0 * self.link_mass * self.link_stiffness
        if abs(disc) < 1e-12:
            return "critically_damped"
        return "overdamped" if disc > 0 else "underdamped"


@dataclass(frozen=True, slots=True)
class Obstacle:
    """Vertical cylinder, optionally traversing a closed waypoint loop.

    ``safe_radius`` is the repulsion activation clearance measured from the
    body surface (an annulus of that width around the body). For ground-only
    obstacles ``deflect_radius`` is the radius, from the center, of the region
    in which the robot's reference point is deflected.
    """

    id: int
    kind: ObstacleKind
    center: Vec3
    body_radius: float
    safe_radius: float
    height: float
    deflect_radius: float | None = None
    motion: WaypointLoop | None = None

    def __post_init__(self) -> None:
        path = f"obstacles[{self.id}]"
        if self.body_radius <= 0.0:
            raise ValidationError(f"{path}.body_radius", f"must be > 0, got {self.body_radius}")
        if self.safe_radius <= self.body_radius:
            raise ValidationError(
                f"{path}.safe_radius",
                f"must exceed body_radius ({self.body_radius}), got {self.safe_radius}",
            )
        if self.height <= 0.0:
            raise ValidationError(f"{path}.height", f"must be > 0, got {self.height}")
        if self.kind is ObstacleKind.GROUND_ONLY:
            if self.deflect_radius is None:
                raise ValidationError(f"{path}.deflect_radius", "required for ground obstacles")
            if self.deflect_radius < self.body_radius:
                raise ValidationError(
                    f"{path}.deflect_radius",
                    f"must be >= body_radius ({self.body_radius}), got {self.deflect_radius}",
                )
        if self.center.z != 0.0:
            raise ValidationError(f"{path}.center", "obstacle base must sit at z=0")
        if self.motion is not None:
            if len(self.motion.waypoints) < 2:
                raise ValidationError(f"{path}.motion.waypoints", "need at least 2 waypoints")
            if self.motion.speed <= 0.0:
                raise ValidationError(f"{path}.motion.speed", f"must be > 0, got {self.motion.speed}")
            if any(w.z != 0.0 for w in self.motion.waypoints):
                raise ValidationError(f"{path}.motion.waypoints", "waypoints must have z=0")
            if _loop_perimeter(self.motion.waypoints) <= 1e-9:
                raise ValidationError(f"{path}.motion.waypoints", "loop perimeter is degenerate")

    @property
    def is_moving(self) -> bool:
        return self.motion is not None


@dataclass(frozen=True, slots=True)
class Scenario:
    """Complete, validated experiment description."""

    obstacles: tuple[Obstacle, ...]
    drone_start: Vec3
    drone_goal: Vec3
    robot_start: Vec3
    robot_goal: Vec3
    drone_altitude: float
    coeffs: CoeffSet
    dt: float
    max_time: float
    goal_tolerance: float
    seed: int
    arena_size_x: float = ARENA_SIZE_DEFAULT
    arena_size_y: float = ARENA_SIZE_DEFAULT
    drone_radius: float = DRONE_RADIUS_DEFAULT
    robot_radius: float = ROBOT_RADIUS_DEFAULT

    def __post_init__(self) -> None:
        if not (0.0 < self.dt <= 0.1):
            raise ValidationError("sim.dt", f"must be in (0, 0.1], got {self.dt}")
        if self.max_time <= 0.0:
            raise ValidationError("sim.max_time", f"must be > 0, got {self.max_time}")
        if self.goal_tolerance <= 0.0:
            raise ValidationError("sim.goal_tolerance", f"must be > 0, got {self.goal_tolerance}")
        if self.drone_altitude <= 0.0:
            raise ValidationError("agents.drone_altitude", f"must be > 0, got {self.drone_altitude}")
        if self.drone_radius <= 0.0 or self.robot_radius <= 0.0:
            raise ValidationError("agents", "agent radii must be > 0")
        if self.robot_start.z != 0.0 or self.robot_goal.z != 0.0:
            raise ValidationError("agents.robot_start", "robot start/goal must have z=0")
        ids = [o.id for o in self.obstacles]
        if len(set(ids)) != len(ids):
            raise ValidationError("obstacles", f"duplicate obstacle ids: {sorted(ids)}")
        for o in self.obstacles:
            if o.kind is ObstacleKind.GROUND_ONLY and o.height >= self.drone_altitude:
                raise ValidationError(
                    f"obstacles[{o.id}].height",
                    f"ground obstacle height {o.height} must stay below drone altitude {self.drone_altitude}",
                )
            for name, p in (
                ("drone_start", self.drone_start), ("drone_goal", self.drone_goal),
                ("robot_start", self.robot_start), ("robot_goal", self.robot_goal),
            ):
                if p.distance_xy(o.center) <= o.body_radius:
                    raise ValidationError(
                        f"agents.{name}",
                        f"lies inside obstacle {o.id} body (radius {o.body_radius})",
                    )

    def moving_obstacles(self) -> tuple[Obstacle, ...]:
        return tuple(o for o in self.obstacles if o.is_moving)


def _loop_perimeter(waypoints: tuple[Vec3, ...]) -> float:
    total = 0.0
    n = len(waypoints)
    for i in range(n):
        total += waypoints[i].distance_xy(waypoints[(i + 1) % n])
    return total


def obstacle_position(obstacle: Obstacle, t: float) -> Vec3:
    """Position of the obstacle center at time ``t`` (t >= 0).

    Static obstacles stay at their center. Moving ones walk the closed
    polyline through their waypoints at constant speed, wrapping at the
    perimeter, so the position is periodic with period perimeter/speed.
    """
    if obstacle.motion is None:
        return obstacle.center
    wps = obstacle.motion.waypoints
    perimeter = _loop_perimeter(wps)
    s = (obstacle.motion.speed * t) % perimeter
    n = len(wps)
    for i in range(n):
        a = wps[i]
        b = wps[(i + 1) % n]
        seg = a.distance_xy(b)
        if s <= seg:
            if seg <= 1e-12:
                return a
            frac = s / seg
            return Vec3(a.x + (b.x - a.x) * frac, a.y + (b.y - a.y) * frac, 0.0)
        s -= seg
    return wps[0]  # numerical fallthrough at exact perimeter


# ---------------------------------------------------------------------------
# Reference coefficients
# ---------------------------------------------------------------------------

def _coeffs_from_mapping(data: dict[str, Any], path: str = "coeffs") -> CoeffSet:
    def gains(key: str) -> PidGains:
        sub = data.get(key)
        if not isinstance(sub, dict):
            raise ValidationError(f"{path}.{key}", "expected a mapping with kp/ki/kd")
        try:
            return PidGains(float(sub["kp"]), float(sub["ki"]), float(sub["kd"]))
        except KeyError as e:
            raise ValidationError(f"{path}.{key}", f"missing gain {e}") from e

    scalar_fields = (
        "attraction_gain", "repulsion_gain", "link_mass", "link_damping",
        "link_stiffness", "deflect_gain", "leader_pull_gain",
        "max_speed_drone", "max_speed_robot", "max_turn_rate", "integral_limit",
    )
    kwargs: dict[str, Any] = {}
    for name in scalar_fields:
        if name not in data:
            raise ValidationError(f"{path}.{name}", "missing required coefficient")
        try:
            kwargs[name] = float(data[name])
        except (TypeError, ValueError) as e:
            raise ValidationError(f"{path}.{name}", f"not a number: {data[name]!r}") from e
    return CoeffSet(
        drone_pid=gains("drone_pid"),
        robot_heading_pid=gains("robot_heading_pid"),
        robot_distance_pid=gains("robot_distance_pid"),
        **kwargs,
    )


def reference_coeffs() -> CoeffSet:
    """Load the shipped reference coefficient set."""
    text = importlib.resources.files("tandemnav.data").joinpath("reference.yaml").read_text()
    return _coeffs_from_mapping(yaml.safe_load(text))


# ---------------------------------------------------------------------------
# YAML load / save
# ---------------------------------------------------------------------------

def _require(data: dict[str, Any], key: str, path: str) -> Any:
    if key not in data:
        raise ValidationError(f"{path}.{key}" if path else key, "missing required key")
    return data[key]


def _vec3(value: Any, path: str, z: float | None = None) -> Vec3:
    if not isinstance(value, (list, tuple)) or len(value) not in (2, 3):
        raise ValidationError(path, f"expected [x, y] or [x, y, z], got {value!r}")
    try:
        nums = [float(v) for v in value]
    except (TypeError, ValueError) as e:
        raise ValidationError(path, f"non-numeric component in {value!r}") from e
    if len(nums) == 2:
        nums.append(0.0 if z is None else z)
    try:
        return Vec3(*nums)
    except ValueError as e:
        raise ValidationError(path, str(e)) from e


def load_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document. Raises ParseError or ValidationError."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ParseError(f"invalid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"scenario document must be a mapping, got {type(data).__name__}")

    schema = data.get("schema")
    if schema != 1:
        raise ValidationError("schema", f"expected schema 1, got {schema!r}")

    arena = data.get("arena", {})
    if not isinstance(arena, dict):
        raise ValidationError("arena", "expected a mapping")
    agents = _require(data, "agents", "")
    if not isinstance(agents, dict):
        raise ValidationError("agents", "expected a mapping")
    sim = _require(data, "sim", "")
    if not isinstance(sim, dict):
        raise ValidationError("sim", "expected a mapping")
    coeffs_data = _require(data, "coeffs", "")
    if not isinstance(coeffs_data, dict):
        raise ValidationError("coeffs", "expected a mapping")

    altitude = float(_require(agents, "drone_altitude", "agents"))
    obstacles: list[Obstacle] = []
    raw_obstacles = data.get("obstacles", []) or []
    if not isinstance(raw_obstacles, list):
        raise ValidationError("obstacles", "expected a list")
    for i, raw in enumerate(raw_obstacles):
        path = f"obstacles[{i}]"
        if not isinstance(raw, dict):
            raise ValidationError(path, "expected a mapping")
        kind_token = _require(raw, "kind", path)
        try:
            kind = ObstacleKind(kind_token)
        except ValueError:
            raise ValidationError(f"{path}.kind", f"expected 'full' or 'ground', got {kind_token!r}") from None
        motion = None
        raw_motion = raw.get("motion", "static")
        if isinstance(raw_motion, dict):
            wps = _require(raw_motion, "waypoints", f"{path}.motion")
            if not isinstance(wps, list):
                raise ValidationError(f"{path}.motion.waypoints", "expected a list")
            motion = WaypointLoop(
                waypoints=tuple(_vec3(w, f"{path}.motion.waypoints[{j}]") for j, w in enumerate(wps)),
                speed=float(_require(raw_motion, "speed", f"{path}.motion")),
            )
        elif raw_motion != "static":
            raise ValidationError(f"{path}.motion", f"expected 'static' or a waypoint mapping, got {raw_motion!r}")
        obstacles.append(Obstacle(
            id=int(_require(raw, "id", path)),
            kind=kind,
            center=_vec3(_require(raw, "center", path), f"{path}.center"),
            body_radius=float(_require(raw, "body_radius", path)),
            safe_radius=float(_require(raw, "safe_radius", path)),
            height=float(_require(raw, "height", path)),
            deflect_radius=(float(raw["deflect_radius"]) if "deflect_radius" in raw else None),
            motion=motion,
        ))

    return Scenario(
        obstacles=tuple(obstacles),
        drone_start=_vec3(_require(agents, "drone_start", "agents"), "agents.drone_start", z=altitude),
        drone_goal=_vec3(_require(agents, "drone_goal", "agents"), "agents.drone_goal", z=altitude),
        robot_start=_vec3(_require(agents, "robot_start", "agents"), "agents.robot_start"),
        robot_goal=_vec3(_require(agents, "robot_goal", "agents"), "agents.robot_goal"),
        drone_altitude=altitude,
        coeffs=_coeffs_from_mapping(coeffs_data),
        dt=float(_require(sim, "dt", "sim")),
        max_time=float(_require(sim, "max_time", "sim")),
        goal_tolerance=float(_require(sim, "goal_tolerance", "sim")),
        seed=int(_require(sim, "seed", "sim")),
        arena_size_x=float(arena.get("size_x", ARENA_SIZE_DEFAULT)),
        arena_size_y=float(arena.get("size_y", ARENA_SIZE_DEFAULT)),
        drone_radius=float(agents.get("drone_radius", DRONE_RADIUS_DEFAULT)),
        robot_radius=float(agents.get("robot_radius", ROBOT_RADIUS_DEFAULT)),
    )


def _coeffs_to_mapping(c: CoeffSet) -> dict[str, Any]:
    return {
        "attraction_gain": c.attraction_gain,
        "repulsion_gain": c.repulsion_gain,
        "link_mass": c.link_mass,
        "link_damping": c.link_damping,
        "link_stiffness": c.link_stiffness,
        "deflect_gain": c.deflect_gain,
        "leader_pull_gain": c.leader_pull_gain,
        "max_speed_drone": c.max_speed_drone,
        "max_speed_robot": c.max_speed_robot,
        "max_turn_rate": c.max_turn_rate,
        "integral_limit": c.integral_limit,
        "drone_pid": {"kp": c.drone_pid.kp, "ki": c.drone_pid.ki, "kd": c.drone_pid.kd},
        "robot_heading_pid": {"kp": c.robot_heading_pid.kp, "ki": c.robot_heading_pid.ki, "kd": c.robot_heading_pid.kd},
        "robot_distance_pid": {"kp": c.robot_distance_pid.kp, "ki": c.robot_distance_pid.ki, "kd": c.robot_distance_pid.kd},
    }


def save_scenario(scenario: Scenario) -> str:
    """Serialize to the YAML schema. load_scenario(save_scenario(s)) == s."""
    obstacles = []
    for o in scenario.obstacles:
        entry: dict[str, Any] = {
            "id": o.id,
            "kind": o.kind.value,
            "center": [o.center.x, o.center.y],
            "body_radius": o.body_radius,
            "safe_radius": o.safe_radius,
            "height": o.height,
        }
        if o.deflect_radius is not None:
            entry["deflect_radius"] = o.deflect_radius
        if o.motion is not None:
            entry["motion"] = {
                "waypoints": [[w.x, w.y] for w in o.motion.waypoints],
                "speed": o.motion.speed,
            }
        else:
            entry["motion"] = "static"
        obstacles.append(entry)

    doc = {
        "schema": 1,
        "arena": {"size_x": scenario.arena_size_x, "size_y": scenario.arena_size_y},
        "agents": {
            "drone_start": [scenario.drone_start.x, scenario.drone_start.y, scenario.drone_start.z],
            "drone_goal": [scenario.drone_goal.x, scenario.drone_goal.y, scenario.drone_goal.z],
            "robot_start": [scenario.robot_start.x, scenario.robot_start.y],
            "robot_goal": [scenario.robot_goal.x, scenario.robot_goal.y],
            "drone_altitude": scenario.drone_altitude,
            "drone_radius": scenario.drone_radius,
            "robot_radius": scenario.robot_radius,
        },
        "obstacles": obstacles,
        "coeffs": _coeffs_to_mapping(scenario.coeffs),
        "sim": {
            "dt": scenario.dt,
            "max_time": scenario.max_time,
            "goal_tolerance": scenario.goal_tolerance,
            "seed": scenario.seed,
        },
    }
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=None)


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------

class Density(Enum):
    SPARSE = "sparse"
    DENSE = "dense"


_COUNT_RANGE = {Density.SPARSE: (4, 6), Density.DENSE: (10, 14)}

_START_GOAL_CLEARANCE = 1.0   # extra clearance beyond body radius
_INTER_OBSTACLE_GAP = 0.5     # minimum surface-to-surface gap
_ARENA_MARGIN = 1.2           # obstacle centers stay this far from walls


def generate_scenario(
    seed: int,
    density: Density | str,
    dynamic_count: int,
    coeffs: CoeffSet | None = None,
) -> Scenario:
    """Deterministic random scenario in a 10 m x 10 m arena.

    Obstacles are rejection-sampled to keep at least 0.5 m inter-body
    clearance and to stay clear of the start/goal points. Sparse draws 4-6
    obstacles, dense 10-14. The first ``dynamic_count`` obstacles patrol a
    two-point loop at a speed no greater than half the agents' speed limit,
    alternating ground/full kinds, with the sweep kept away from start and
    goal. Identical arguments always produce an identical scenario.
    """
    if isinstance(density, str):
        density = Density(density.lower())
    if dynamic_count < 0:
        raise GenerationError(f"dynamic_count must be >= 0, got {dynamic_count}")
    coeffs = coeffs if coeffs is not None else reference_coeffs()
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF]))

    arena = ARENA_SIZE_DEFAULT
    altitude = 1.5
    start_xy = (round(float(rng.uniform(0.7, 1.3)), 6), round(float(rng.uniform(0.7, 1.3)), 6))
    goal_xy = (round(float(rng.uniform(8.7, 9.3)), 6), round(float(rng.uniform(8.7, 9.3)), 6))
    start = Vec3(start_xy[0], start_xy[1], 0.0)
    goal = Vec3(goal_xy[0], goal_xy[1], 0.0)

    lo, hi = _COUNT_RANGE[density]
    count = int(rng.integers(lo, hi + 1))
    if dynamic_count > count:
        raise GenerationError(f"dynamic_count {dynamic_count} exceeds obstacle count {count}")

    placed: list[tuple[float, float, float]] = []  # (x, y, body_radius)
    attempts = 0
    while len(placed) < count:
        attempts += 1
        if attempts > MAX_PLACEMENT_ATTEMPTS:
            raise GenerationError(
                f"obstacle placement failed after {MAX_PLACEMENT_ATTEMPTS} attempts "
                f"(seed={seed}, density={density.value})"
            )
        r = float(rng.uniform(0.2, 0.35))
        x = float(rng.uniform(_ARENA_MARGIN, arena - _ARENA_MARGIN))
        y = float(rng.uniform(_ARENA_MARGIN, arena - _ARENA_MARGIN))
        if math.hypot(x - start.x, y - start.y) < r + _START_GOAL_CLEARANCE:
            continue
        if math.hypot(x - goal.x, y - goal.y) < r + _START_GOAL_CLEARANCE:
            continue
        if any(math.hypot(x - px, y - py) < r + pr + _INTER_OBSTACLE_GAP for px, py, pr in placed):
            continue
        placed.append((round(x, 6), round(y, 6), round(r, 6)))

    kinds = [ObstacleKind.FULL if rng.random() < 0.5 else ObstacleKind.GROUND_ONLY for _ in placed]
    # dense scenarios exercise both behaviors; guarantee one of each kind
    if density is Density.DENSE or len(kinds) >= 2:
        if all(k is ObstacleKind.FULL for k in kinds):
            kinds[-1] = ObstacleKind.GROUND_ONLY
        if all(k is ObstacleKind.GROUND_ONLY for k in kinds):
            kinds[-1] = ObstacleKind.FULL
    # moving obstacles mirror the dynamic setup: one ground, one full, alternating
    for j in range(dynamic_count):
        kinds[j] = ObstacleKind.GROUND_ONLY if j % 2 == 0 else ObstacleKind.FULL

    obstacles: list[Obstacle] = []
    for i, ((x, y, r), kind) in enumerate(zip(placed, kinds)):
        center = Vec3(x, y, 0.0)
        safe = round(float(rng.uniform(0.5, 0.7)), 6)
        if kind is ObstacleKind.GROUND_ONLY:
            height = round(float(rng.uniform(0.3, 0.8)), 6)
            deflect = round(r + float(rng.uniform(0.45, 0.6)), 6)
        else:
            height = round(float(rng.uniform(2.0, 3.0)), 6)
            deflect = None
        motion = None
        if i < dynamic_count:
            motion = _sample_motion(rng, center, start, goal, arena, coeffs)
        obstacles.append(Obstacle(
            id=i, kind=kind, center=center, body_radius=r,
            safe_radius=safe, height=height, deflect_radius=deflect, motion=motion,
        ))

    return Scenario(
        obstacles=tuple(obstacles),
        drone_start=start.with_z(altitude),
        drone_goal=goal.with_z(altitude),
        robot_start=start,
        robot_goal=goal,
        drone_altitude=altitude,
        coeffs=coeffs,
        dt=0.02,
        max_time=60.0,
        goal_tolerance=0.15,
        seed=seed,
    )


def _sample_motion(
    rng: np.random.Generator,
    center: Vec3,
    start: Vec3,
    goal: Vec3,
    arena: float,
    coeffs: CoeffSet,
) -> WaypointLoop:
    """Two-point patrol segment clear of start/goal, speed <= 0.5 * v_max."""
    v_cap = 0.5 * min(coeffs.max_speed_drone, coeffs.max_speed_robot)
    speed = round(float(rng.uniform(0.5, 0.9)) * v_cap, 6)
    for _ in range(200):
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        length = float(rng.uniform(1.5, 3.0))
        fx = min(max(center.x + length * math.cos(theta), 0.8), arena - 0.8)
        fy = min(max(center.y + length * math.sin(theta), 0.8), arena - 0.8)
        far = Vec3(round(fx, 6), round(fy, 6), 0.0)
        if far.distance_xy(center) < 1.0:
            continue
        if _segment_clearance(center, far, start) < 1.2:
            continue
        if _segment_clearance(center, far, goal) < 1.2:
            continue
        return WaypointLoop(waypoints=(center, far), speed=speed)
    # fall back to a short, slow hover-in-place oscillation near the center
    far = Vec3(round(center.x + 0.6, 6), center.y, 0.0)
    return WaypointLoop(waypoints=(center, far), speed=speed)


def _segment_clearance(a: Vec3, b: Vec3, p: Vec3) -> float:
    """Distance from point p to segment ab in the ground plane."""
    ax, ay, bx, by = a.x, a.y, b.x, b.y
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 <= 1e-18:
        return p.distance_xy(a)
    u = ((p.x - ax) * dx + (p.y - ay) * dy) / seg2
    u = min(max(u, 0.0), 1.0)
    return math.hypot(p.x - (ax + u * dx), p.y - (ay + u * dy))
