"""Quantitative measures over completed simulation runs.

Covers trajectory length, completion time, minimum obstacle clearance,
robot-vs-reference deviation (averaged over ground-obstacle episodes plus a
short tail after re-attachment, with the all-frames mean reported alongside),
raw velocity series, and batch success summaries. Counts are exact integers;
the success rate is their ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .apf import Agent, relevant_obstacles
from .scenario import Obstacle, Scenario
from .simulator import Outcome, SimFrame, SimResult

METRICS_SCHEMA = 1
REATTACH_WINDOW_S = 1.0


class EmptyBatch(Exception):
    """A batch summary needs at least one result."""


@dataclass(frozen=True, slots=True)
class DeviationStats:
    mean: float        # over ground-obstacle episode frames + re-attach tail
    mean_all: float    # over every frame
    max: float
    series: tuple[tuple[float, float], ...]
    window_frames: int


@dataclass(frozen=True, slots=True)
class RunMetrics:
    outcome: str
    traj_length_drone: float
    traj_length_robot: float
    completion_time: float | None
    min_clearance_drone: float
    min_clearance_robot: float
    mean_robot_deviation: float
    mean_robot_deviation_all: float
    max_robot_deviation: float
    velocity_series: dict[str, tuple[tuple[float, float], ...]]
    damping_regime: str


@dataclass(frozen=True, slots=True)
class BatchSummary:
    total: int
    successes: int
    success_rate: float
    failure_histogram: dict[str, int]

    def success_rate_exact(self) -> Fraction:
        return Fraction(100 * self.successes, self.total)


def trajectory_length(frames: Sequence[SimFrame], agent: Agent) -> float:
    """Sum of consecutive positional Euclidean distances."""
    if len(frames) < 2:
        raise ValueError("need at least 2 frames")
    total = 0.0
    if agent is Agent.DRONE:
        for a, b in zip(frames, frames[1:]):
            total += a.drone.pos.distance_to(b.drone.pos)
    else:
        for a, b in zip(frames, frames[1:]):
            total += a.robot.pos.distance_to(b.robot.pos)
    return total


def min_obstacle_distance(
    frames: Sequence[SimFrame],
    obstacles: Iterable[Obstacle],
    agent: Agent,
) -> float:
    """Min over frames of agent distance to the nearest relevant obstacle surface.

    Obstacle positions are taken from each frame (moving obstacles are
    evaluated where they actually were). Returns +inf when the agent has no
    relevant obstacles.
    """
    by_id = {o.id: o for o, _ in relevant_obstacles([(o, o.center) for o in obstacles], agent)}
    if not by_id:
        return math.inf
    best = math.inf
    for f in frames:
        pos = f.drone.pos if agent is Agent.DRONE else f.robot.pos
        for oid, center in f.obstacle_positions:
            o = by_id.get(oid)
            if o is None:
                continue
            best = min(best, pos.distance_xy(center) - o.body_radius)
    return best


def robot_deviation(frames: Sequence[SimFrame], window_s: float = REATTACH_WINDOW_S) -> DeviationStats:
    """Plan-view |robot - reference| statistics.

    The headline mean is taken over frames spent in an obstacle link plus a
    ``window_s`` tail after each re-attachment (the region near ground
    obstacles); the all-frames mean is reported alongside. The max spans all
    frames. With no obstacle episodes the windowed mean is 0 by convention.
    """
    series: list[tuple[float, float]] = []
    windowed: list[float] = []
    tail_until = -math.inf
    prev_obstacle_link = False
    max_dev = 0.0
    total = 0.0
    for f in frames:
        dev = f.robot.pos.distance_xy(f.robot_ref)
        series.append((f.t, dev))
        total += dev
        max_dev = max(max_dev, dev)
        in_obstacle = not f.link_mode.is_drone_link
        if prev_obstacle_link and not in_obstacle:
            tail_until = f.t + window_s
        if in_obstacle or f.t <= tail_until:
            windowed.append(dev)
        prev_obstacle_link = in_obstacle
    mean_all = total / len(series) if series else 0.0
    mean_windowed = sum(windowed) / len(windowed) if windowed else 0.0
    return DeviationStats(
        mean=mean_windowed, mean_all=mean_all, max=max_dev,
        series=tuple(series), window_frames=len(windowed),
    )


def velocity_series(frames: Sequence[SimFrame], agent: Agent) -> tuple[tuple[float, float], ...]:
    """Forward-difference speeds, one sample per frame transition."""
    out: list[tuple[float, float]] = []
    for a, b in zip(frames, frames[1:]):
        dt = b.t - a.t
        if agent is Agent.DRONE:
            d = a.drone.pos.distance_to(b.drone.pos)
        else:
            d = a.robot.pos.distance_to(b.robot.pos)
        out.append((a.t, d / dt))
    return tuple(out)


def batch_success(results: Sequence[SimResult]) -> BatchSummary:
    """Exact success counts and failure histogram over a batch."""
    if not results:
        raise EmptyBatch("no results to summarize")
    total = len(results)
    successes = sum(1 for r in results if r.outcome is Outcome.SUCCESS)
    histogram: dict[str, int] = {}
    for r in results:
        if r.outcome is not Outcome.SUCCESS:
            histogram[r.outcome.value] = histogram.get(r.outcome.value, 0) + 1
    return BatchSummary(
        total=total, successes=successes,
        success_rate=100.0 * successes / total,
        failure_histogram=dict(sorted(histogram.items())),
    )


def compute_run_metrics(result: SimResult, scenario: Scenario) -> RunMetrics:
    deviation = robot_deviation(result.frames)
    return RunMetrics(
        outcome=result.outcome.value,
        traj_length_drone=trajectory_length(result.frames, Agent.DRONE),
        traj_length_robot=trajectory_length(result.frames, Agent.ROBOT),
        completion_time=result.completion_time,
        min_clearance_drone=min_obstacle_distance(result.frames, scenario.obstacles, Agent.DRONE),
        min_clearance_robot=min_obstacle_distance(result.frames, scenario.obstacles, Agent.ROBOT),
        mean_robot_deviation=deviation.mean,
        mean_robot_deviation_all=deviation.mean_all,
        max_robot_deviation=deviation.max,
        velocity_series={
            "drone": velocity_series(result.frames, Agent.DRONE),
            "robot": velocity_series(result.frames, Agent.ROBOT),
        },
        damping_regime=scenario.coeffs.damping_regime,
    )


# ---------------------------------------------------------------------------
# Schema-versioned documents (JSON; infinities stored as null)
# ---------------------------------------------------------------------------

def _finite_or_none(v: float | None) -> float | None:
    if v is None or math.isinf(v):
        return None
    return v


def run_metrics_to_dict(metrics: RunMetrics, collided_with: int | None = None) -> dict:
    return {
        "schema": METRICS_SCHEMA,
        "outcome": metrics.outcome,
        "collided_with": collided_with,
        "completion_time": metrics.completion_time,
        "traj_length_drone": metrics.traj_length_drone,
        "traj_length_robot": metrics.traj_length_robot,
        "min_clearance_drone": _finite_or_none(metrics.min_clearance_drone),
        "min_clearance_robot": _finite_or_none(metrics.min_clearance_robot),
        "mean_robot_deviation": metrics.mean_robot_deviation,
        "mean_robot_deviation_all": metrics.mean_robot_deviation_all,
        "max_robot_deviation": metrics.max_robot_deviation,
        "damping_regime": metrics.damping_regime,
        "velocity_series": {
            agent: [[t, v] for t, v in series]
            for agent, series in metrics.velocity_series.items()
        },
    }


def write_run_metrics(metrics: RunMetrics, path: Path, collided_with: int | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(run_metrics_to_dict(metrics, collided_with), indent=2, sort_keys=True) + "\n")


def load_run_metrics(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != METRICS_SCHEMA:
        raise ValueError(f"unsupported metrics schema: {data.get('schema')!r}")
    return data


def batch_summary_to_dict(summary: BatchSummary, per_run: list[dict] | None = None) -> dict:
    doc = {
        "schema": METRICS_SCHEMA,
        "total": summary.total,
        "successes": summary.successes,
        "success_rate": summary.success_rate,
        "failure_histogram": summary.failure_histogram,
    }
    if per_run is not None:
        doc["runs"] = per_run
    return doc


def write_batch_summary(summary: BatchSummary, path: Path, per_run: list[dict] | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(batch_summary_to_dict(summary, per_run), indent=2, sort_keys=True) + "\n")


def load_batch_summary(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != METRICS_SCHEMA:
        raise ValueError(f"unsupported summary schema: {data.get('schema')!r}")
    return data
