"""Deterministic simulation and planning for an aerial-leader / ground-follower pair."""

from .apf import (
    Agent,
    ApfForce,
    ApfStatus,
    SingularityError,
    apf_step,
    attraction_force,
    repulsion_force,
)
from .cbs import (
    BudgetExceeded,
    CbsSolution,
    Constraint,
    GridMap,
    GridMode,
    RasterError,
    cbs_metrics,
    cbs_solve,
    low_level_astar,
    rasterize,
)
from .control import (
    DronePids,
    DroneState,
    PidState,
    RobotPids,
    RobotState,
    drone_track_step,
    pid_update,
    robot_follow_step,
)
from .geometry import Vec3, wrap_angle
from .impedance import (
    ImpedanceState,
    LinkMode,
    drone_link_force,
    integrate_link,
    obstacle_deflection,
    robot_reference_step,
    update_link_mode,
)
from .metrics import (
    BatchSummary,
    EmptyBatch,
    RunMetrics,
    batch_success,
    compute_run_metrics,
    min_obstacle_distance,
    robot_deviation,
    trajectory_length,
)
from .scenario import (
    CoeffSet,
    Density,
    GenerationError,
    Obstacle,
    ObstacleKind,
    ParseError,
    PidGains,
    Scenario,
    ValidationError,
    WaypointLoop,
    generate_scenario,
    load_scenario,
    obstacle_position,
    reference_coeffs,
    save_scenario,
)
from .simulator import (
    ConfigError,
    Outcome,
    SimFrame,
    SimResult,
    check_collision,
    run,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Agent", "ApfForce", "ApfStatus", "SingularityError",
    "apf_step", "attraction_force", "repulsion_force",
    "BudgetExceeded", "CbsSolution", "Constraint", "GridMap", "GridMode",
    "RasterError", "cbs_metrics", "cbs_solve", "low_level_astar", "rasterize",
    "DronePids", "DroneState", "PidState", "RobotPids", "RobotState",
    "drone_track_step", "pid_update", "robot_follow_step",
    "Vec3", "wrap_angle",
    "ImpedanceState", "LinkMode", "drone_link_force", "integrate_link",
    "obstacle_deflection", "robot_reference_step", "update_link_mode",
    "BatchSummary", "EmptyBatch", "RunMetrics", "batch_success",
    "compute_run_metrics", "min_obstacle_distance", "robot_deviation", "trajectory_length",
    "CoeffSet", "Density", "GenerationError", "Obstacle", "ObstacleKind",
    "ParseError", "PidGains", "Scenario", "ValidationError", "WaypointLoop",
    "generate_scenario", "load_scenario", "obstacle_position", "reference_coeffs", "save_scenario",
    "ConfigError", "Outcome", "SimFrame", "SimResult",
    "check_collision", "run", "write_trajectory_csv",
    "__version__",
]
