"""Figure rendering for report output.

Every CLI report path drops PNG figures next to its delimited output: a plan
view of the run (obstacle bodies with their influence regions, both agent
tracks, the deflected reference, moving-obstacle trails), the per-agent
velocity series, the grid-vs-field comparison overlay, and the batch outcome
histogram. matplotlib is imported lazily so library use stays headless-safe.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

from .cbs import GridMap
from .metrics import BatchSummary, velocity_series
from .scenario import ObstacleKind, Scenario
from .simulator import SimResult

if TYPE_CHECKING:
    from .cbs import CbsSolution

_STYLE = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}

_FULL_BODY = "#222222"
_FULL_REGION = "#bdbdbd"
_GROUND_BODY = "#2e8b57"
_GROUND_REGION = "#b7e4c7"


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _draw_obstacles(ax, scenario: Scenario) -> None:
    from matplotlib.patches import Circle

    for o in scenario.obstacles:
        c = (o.center.x, o.center.y)
        if o.kind is ObstacleKind.FULL:
            ax.add_patch(Circle(c, o.body_radius + o.safe_radius, color=_FULL_REGION, alpha=0.5, zorder=1))
            ax.add_patch(Circle(c, o.body_radius, color=_FULL_BODY, zorder=3))
        else:
            if o.deflect_radius is not None:
                ax.add_patch(Circle(c, o.deflect_radius, color=_GROUND_REGION, alpha=0.6, zorder=1))
            ax.add_patch(Circle(c, o.body_radius, color=_GROUND_BODY, zorder=3))
        if o.motion is not None:
            xs = [w.x for w in o.motion.waypoints] + [o.motion.waypoints[0].x]
            ys = [w.y for w in o.motion.waypoints] + [o.motion.waypoints[0].y]
            ax.plot(xs, ys, "--", color="purple", linewidth=1.0, zorder=2)


def render_trajectory(result: SimResult, scenario: Scenario, path: Path) -> Path:
    """Plan view of one run."""
    plt = _plt()
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 6.4))
        _draw_obstacles(ax, scenario)
        frames = result.frames
        ax.plot([f.drone.pos.x for f in frames], [f.drone.pos.y for f in frames],
                "-", color="black", linewidth=1.4, label="drone", zorder=4)
        ax.plot([f.robot.pos.x for f in frames], [f.robot.pos.y for f in frames],
                "--", color="tab:blue", linewidth=1.4, label="robot", zorder=4)
        ax.plot([f.robot_ref.x for f in frames], [f.robot_ref.y for f in frames],
                "-", color="tab:orange", linewidth=0.8, alpha=0.8, label="robot reference", zorder=4)
        ax.plot(scenario.robot_start.x, scenario.robot_start.y, "o", color="tab:green",
                markersize=8, label="start", zorder=5)
        ax.plot(scenario.robot_goal.x, scenario.robot_goal.y, "*", color="tab:red",
                markersize=12, label="goal", zorder=5)
        ax.set_xlim(0, scenario.arena_size_x)
        ax.set_ylim(0, scenario.arena_size_y)
        ax.set_aspect("equal")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title(f"outcome: {result.outcome.value}")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def render_velocity(result: SimResult, path: Path) -> Path:
    """Per-agent speed over time."""
    from .apf import Agent

    plt = _plt()
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(2, 1, figsize=(7.0, 4.6), sharex=True)
        for ax, agent, color in ((axes[0], Agent.DRONE, "black"), (axes[1], Agent.ROBOT, "tab:blue")):
            series = velocity_series(result.frames, agent)
            ax.plot([t for t, _ in series], [v for _, v in series], color=color, linewidth=0.9)
            ax.set_ylabel(f"{agent.value} speed [m/s]")
        axes[1].set_xlabel("t [s]")
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def render_comparison(
    result: SimResult,
    scenario: Scenario,
    grid_2d: GridMap,
    robot_solution: "CbsSolution | None",
    grid_3d: GridMap,
    drone_solution: "CbsSolution | None",
    path: Path,
) -> Path:
    """Field trajectories over the 2D occupancy grid with both grid plans."""
    plt = _plt()
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 6.4))
        res = grid_2d.resolution
        for (ix, iy, _) in sorted(grid_2d.blocked):
            ax.add_patch(plt.Rectangle((ix * res, iy * res), res, res,
                                       color="#f4cccc", zorder=0))
        _draw_obstacles(ax, scenario)
        frames = result.frames
        ax.plot([f.drone.pos.x for f in frames], [f.drone.pos.y for f in frames],
                "-", color="black", linewidth=1.4, label="field: drone", zorder=4)
        ax.plot([f.robot.pos.x for f in frames], [f.robot.pos.y for f in frames],
                "--", color="tab:blue", linewidth=1.4, label="field: robot", zorder=4)
        if robot_solution is not None:
            pts = [grid_2d.center_of(c) for c in robot_solution.paths[0]]
            ax.plot([p.x for p in pts], [p.y for p in pts], "-o", color="tab:red",
                    markersize=2.5, linewidth=1.0, label="grid: robot (2D)", zorder=4)
        if drone_solution is not None:
            pts = [grid_3d.center_of(c) for c in drone_solution.paths[0]]
            ax.plot([p.x for p in pts], [p.y for p in pts], "-s", color="tab:purple",
                    markersize=2.5, linewidth=1.0, label="grid: drone (3D)", zorder=4)
        ax.set_xlim(0, scenario.arena_size_x)
        ax.set_ylim(0, scenario.arena_size_y)
        ax.set_aspect("equal")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def render_batch(summary: BatchSummary, path: Path) -> Path:
    """Outcome histogram for a batch."""
    plt = _plt()
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        labels = ["Success"] + sorted(summary.failure_histogram)
        counts = [summary.successes] + [summary.failure_histogram[k] for k in sorted(summary.failure_histogram)]
        colors = ["tab:green"] + ["tab:red"] * (len(labels) - 1)
        ax.bar(labels, counts, color=colors)
        ax.set_ylabel("runs")
        ax.set_title(f"{summary.successes}/{summary.total} succeeded "
                     f"({summary.success_rate:.1f}%)")
        if counts:
            ax.set_ylim(0, max(counts) * 1.2 + 1)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path
