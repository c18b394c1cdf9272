"""Conflict-based search baseline on 2D and 3D grids.

The scenario is rasterized into a static occupancy grid (obstacle snapshot at
t=0, bodies inflated by a safety margin). The low level is a time-expanded A*
(orthogonal moves plus wait) under vertex and edge constraints; the high
level is a best-first constraint-tree search that branches on the first
conflict and returns a conflict-free, cost-optimal solution, where cost is
the sum over agents of timesteps to final goal arrival.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .geometry import Vec3
from .scenario import Obstacle, ObstacleKind, Scenario, obstacle_position

DEFAULT_RESOLUTION = 0.5
DEFAULT_INFLATION = 0.5  # meters added to body radius when blocking cells
DEFAULT_NODE_BUDGET = 100_000

Cell = tuple[int, int, int]


class RasterError(Exception):
    """Start or goal cell is blocked."""


class BudgetExceeded(Exception):
    """High-level search abandoned after the node budget (not proof of absence)."""


class GridMode(Enum):
    TWO_D = "2d"
    THREE_D = "3d"


@dataclass(frozen=True, slots=True)
class ObstacleDisc:
    """Plan-view snapshot of one relevant obstacle for clearance metrics."""

    id: int
    x: float
    y: float
    body_radius: float
    height: float


@dataclass(frozen=True, slots=True)
class GridMap:
    resolution: float
    nx: int
    ny: int
    nz: int
    blocked: frozenset[Cell]
    discs: tuple[ObstacleDisc, ...]

    def in_bounds(self, cell: Cell) -> bool:
        ix, iy, iz = cell
        return 0 <= ix < self.nx and 0 <= iy < self.ny and 0 <= iz < self.nz

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    def cell_of(self, point: Vec3) -> Cell:
        r = self.resolution
        ix = min(max(int(point.x // r), 0), self.nx - 1)
        iy = min(max(int(point.y // r), 0), self.ny - 1)
        iz = min(max(int(point.z // r), 0), self.nz - 1)
        return (ix, iy, iz)

    def center_of(self, cell: Cell) -> Vec3:
        r = self.resolution
        return Vec3((cell[0] + 0.5) * r, (cell[1] + 0.5) * r, (cell[2] + 0.5) * r)


@dataclass(frozen=True, slots=True)
class Constraint:
    """Forbid an agent from occupying ``cell`` at ``timestep`` (vertex), or
    from moving ``from_cell`` -> ``cell`` arriving at ``timestep`` (edge)."""

    agent: int
    cell: Cell
    timestep: int
    from_cell: Cell | None = None

    @property
    def is_edge(self) -> bool:
        return self.from_cell is not None


@dataclass(frozen=True, slots=True)
class CbsSolution:
    paths: tuple[tuple[Cell, ...], ...]
    cost: int
    lengths_m: tuple[float, ...]
    min_clearances_m: tuple[float, ...]


def rasterize(
    scenario: Scenario,
    resolution: float,
    mode: GridMode,
    inflation: float | None = None,
) -> GridMap:
    """Occupancy grid from the obstacle snapshot at t=0.

    2D grids block on every obstacle (the robot's world); 3D grids block only
    on full obstacles, up to each cylinder's height, leaving ground obstacles
    invisible to the drone. Cell centers within body_radius + inflation of an
    obstacle center are blocked; inflation defaults to 0.5 m.
    """
    if resolution <= 0.0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    infl = DEFAULT_INFLATION if inflation is None else inflation
    nx = max(1, math.ceil(scenario.arena_size_x / resolution - 1e-9))
    ny = max(1, math.ceil(scenario.arena_size_y / resolution - 1e-9))
    if mode is GridMode.THREE_D:
        nz = int(scenario.drone_altitude // resolution) + 2
    else:
        nz = 1

    relevant: list[tuple[Obstacle, Vec3]] = []
    for o in scenario.obstacles:
        if mode is GridMode.THREE_D and o.kind is not ObstacleKind.FULL:
            continue
        relevant.append((o, obstacle_position(o, 0.0)))

    blocked: set[Cell] = set()
    for o, c in relevant:
        reach = o.body_radius + infl
        ix_lo = max(0, int((c.x - reach) // resolution))
        ix_hi = min(nx - 1, int((c.x + reach) // resolution))
        iy_lo = max(0, int((c.y - reach) // resolution))
        iy_hi = min(ny - 1, int((c.y + reach) // resolution))
        for ix in range(ix_lo, ix_hi + 1):
            for iy in range(iy_lo, iy_hi + 1):
                cx = (ix + 0.5) * resolution
                cy = (iy + 0.5) * resolution
                if math.hypot(cx - c.x, cy - c.y) > reach:
                    continue
                for iz in range(nz):
                    if (iz + 0.5) * resolution <= o.height:
                        blocked.add((ix, iy, iz))

    discs = tuple(ObstacleDisc(o.id, c.x, c.y, o.body_radius, o.height) for o, c in relevant)
    grid = GridMap(resolution=resolution, nx=nx, ny=ny, nz=nz,
                   blocked=frozenset(blocked), discs=discs)

    if mode is GridMode.THREE_D:
        start, goal = scenario.drone_start, scenario.drone_goal
    else:
        start, goal = scenario.robot_start, scenario.robot_goal
    for name, p in (("start", start), ("goal", goal)):
        if not grid.is_free(grid.cell_of(p)):
            raise RasterError(f"{mode.value} {name} cell {grid.cell_of(p)} is blocked")
    return grid


def _moves(grid: GridMap) -> list[Cell]:
    moves: list[Cell] = [(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    if grid.nz > 1:
        moves += [(0, 0, 1), (0, 0, -1)]
    return moves


def low_level_astar(
    grid: GridMap,
    start: Cell,
    goal: Cell,
    constraints: Iterable[Constraint],
    agent: int,
) -> tuple[Cell, ...] | None:
    """Minimal-length time-expanded A* path respecting the agent's constraints.

    Moves are orthogonal (4-connected in 2D, 6-connected in 3D) plus wait,
    one cell per timestep. Returns the cell sequence indexed by timestep, or
    None when no path exists within the search horizon.
    """
    vertex_banned: set[tuple[Cell, int]] = set()
    edge_banned: set[tuple[Cell, Cell, int]] = set()
    latest_goal_ban = -1
    max_t = 0
    for c in constraints:
        if c.agent != agent:
            continue
        max_t = max(max_t, c.timestep)
        if c.is_edge:
            assert c.from_cell is not None
            edge_banned.add((c.from_cell, c.cell, c.timestep))
        else:
            vertex_banned.add((c.cell, c.timestep))
            if c.cell == goal:
                latest_goal_ban = max(latest_goal_ban, c.timestep)

    if not grid.is_free(start) or not grid.is_free(goal):
        return None

    horizon = grid.nx * grid.ny * grid.nz + max_t + 1
    moves = _moves(grid)

    def h(cell: Cell) -> int:
        return abs(cell[0] - goal[0]) + abs(cell[1] - goal[1]) + abs(cell[2] - goal[2])

    counter = 0
    open_heap: list[tuple[int, int, int, Cell, int]] = [(h(start), 0, counter, start, 0)]
    came_from: dict[tuple[Cell, int], tuple[Cell, int]] = {}
    closed: set[tuple[Cell, int]] = set()

    while open_heap:
        f, g, _, cell, t = heapq.heappop(open_heap)
        if (cell, t) in closed:
            continue
        closed.add((cell, t))
        if cell == goal and t > latest_goal_ban:
            path = [cell]
            key = (cell, t)
            while key in came_from:
                key = came_from[key]
                path.append(key[0])
            return tuple(reversed(path))
        if t >= horizon:
            continue
        for dx, dy, dz in moves:
            nxt: Cell = (cell[0] + dx, cell[1] + dy, cell[2] + dz)
            if not grid.is_free(nxt):
                continue
            if (nxt, t + 1) in vertex_banned or (nxt, t + 1) in closed:
                continue
            if (cell, nxt, t + 1) in edge_banned:
                continue
            counter += 1
            key = (nxt, t + 1)
            if key not in came_from:
                came_from[key] = (cell, t)
            heapq.heappush(open_heap, (g + 1 + h(nxt), g + 1, counter, nxt, t + 1))
    return None


def _position(path: tuple[Cell, ...], t: int) -> Cell:
    return path[t] if t < len(path) else path[-1]


def _first_conflict(paths: tuple[tuple[Cell, ...], ...]) -> tuple[str, int, int, int] | None:
    """Earliest conflict as (kind, agent_i, agent_j, timestep); vertex before edge."""
    horizon = max(len(p) for p in paths)
    n = len(paths)
    for t in range(horizon):
        for i in range(n):
            for j in range(i + 1, n):
                if _position(paths[i], t) == _position(paths[j], t):
                    return ("vertex", i, j, t)
        if t == 0:
            continue
        for i in range(n):
            for j in range(i + 1, n):
                if _position(paths[i], t - 1) == _position(paths[j], t) and \
                        _position(paths[i], t) == _position(paths[j], t - 1) and \
                        _position(paths[i], t) != _position(paths[i], t - 1):
                    return ("edge", i, j, t)
    return None


def count_conflicts(paths: tuple[tuple[Cell, ...], ...]) -> int:
    """Exhaustive pairwise vertex/edge conflict count (used for verification)."""
    horizon = max(len(p) for p in paths)
    n = len(paths)
    count = 0
    for t in range(horizon):
        for i in range(n):
            for j in range(i + 1, n):
                if _position(paths[i], t) == _position(paths[j], t):
                    count += 1
                if t > 0 and _position(paths[i], t - 1) == _position(paths[j], t) and \
                        _position(paths[i], t) == _position(paths[j], t - 1) and \
                        _position(paths[i], t) != _position(paths[i], t - 1):
                    count += 1
    return count


def path_length_m(path: tuple[Cell, ...], resolution: float) -> float:
    """Metric length: cell-changing moves times resolution (waits are free)."""
    moves = sum(1 for a, b in zip(path, path[1:]) if a != b)
    return moves * resolution


def path_min_clearance_m(path: tuple[Cell, ...], grid: GridMap) -> float:
    """Min distance from path cell centers to the nearest obstacle surface.

    Cylinder surface distance: plan-view gap at or below the top, slant
    distance above it. +inf when the grid has no relevant obstacles.
    """
    if not grid.discs:
        return math.inf
    best = math.inf
    for cell in path:
        center = grid.center_of(cell)
        for disc in grid.discs:
            xy_gap = math.hypot(center.x - disc.x, center.y - disc.y) - disc.body_radius
            if center.z <= disc.height:
                d = xy_gap
            elif xy_gap <= 0.0:
                d = center.z - disc.height
            else:
                d = math.hypot(xy_gap, center.z - disc.height)
            best = min(best, d)
    return best


def cbs_metrics(
    solution: CbsSolution,
    grid: GridMap,
    scenario: Scenario | None = None,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-agent (metric length, min obstacle clearance) of a solution."""
    del scenario  # obstacle snapshot travels with the grid
    lengths = tuple(path_length_m(p, grid.resolution) for p in solution.paths)
    clearances = tuple(path_min_clearance_m(p, grid) for p in solution.paths)
    return lengths, clearances


def cbs_solve(
    grid: GridMap,
    agents: list[tuple[Cell, Cell]],
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> CbsSolution | None:
    """Conflict-free, cost-optimal plan for all agents, or None if unsolvable.

    Best-first search over a constraint tree ordered by total cost: the first
    conflict (vertex before edge) spawns two children, each constraining one
    of the agents involved. Raises BudgetExceeded after expanding
    ``node_budget`` high-level nodes.
    """
    if not agents:
        raise ValueError("need at least one agent")
    starts = [a[0] for a in agents]
    goals = [a[1] for a in agents]
    if len(set(starts)) != len(starts) or len(set(goals)) != len(goals):
        raise ValueError("agent starts and goals must be distinct")
    for i, (s, g) in enumerate(agents):
        if not grid.is_free(s) or not grid.is_free(g):
            raise ValueError(f"agent {i} start/goal must be unblocked and in bounds")

    root_paths: list[tuple[Cell, ...]] = []
    for i, (s, g) in enumerate(agents):
        path = low_level_astar(grid, s, g, [], i)
        if path is None:
            return None
        root_paths.append(path)

    def total_cost(paths: Iterable[tuple[Cell, ...]]) -> int:
        return sum(len(p) - 1 for p in paths)

    counter = 0
    root = (total_cost(root_paths), 0, tuple(root_paths), ())
    open_heap: list[tuple[int, int, tuple[tuple[Cell, ...], ...], tuple[Constraint, ...]]] = [root]
    expanded = 0

    while open_heap:
        cost, _, paths, constraints = heapq.heappop(open_heap)
        expanded += 1
        if expanded > node_budget:
            raise BudgetExceeded(f"abandoned after {node_budget} high-level nodes")

        conflict = _first_conflict(paths)
        if conflict is None:
            lengths = tuple(path_length_m(p, grid.resolution) for p in paths)
            clearances = tuple(path_min_clearance_m(p, grid) for p in paths)
            return CbsSolution(paths=paths, cost=cost, lengths_m=lengths,
                               min_clearances_m=clearances)

        kind, i, j, t = conflict
        for agent in (i, j):
            if kind == "vertex":
                new_constraint = Constraint(agent=agent, cell=_position(paths[agent], t), timestep=t)
            else:
                new_constraint = Constraint(
                    agent=agent, cell=_position(paths[agent], t), timestep=t,
                    from_cell=_position(paths[agent], t - 1),
                )
            child_constraints = constraints + (new_constraint,)
            new_path = low_level_astar(grid, agents[agent][0], agents[agent][1],
                                       child_constraints, agent)
            if new_path is None:
                continue
            child_paths = tuple(new_path if a == agent else p for a, p in enumerate(paths))
            counter += 1
            heapq.heappush(open_heap, (total_cost(child_paths), counter, child_paths, child_constraints))
    return None
