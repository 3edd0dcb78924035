"""Semi-autonomous steering correction for teleoperated driving.

A predictive controller tracks the remote operator's steering command and
overrides it only as far as needed to keep the vehicle's front corners
out of superelliptic obstacle bounds.  The package bundles the vehicle
model, the potential field, a dense QP solver, the controller itself, a
synthetic teleoperator, scenario execution with traces and plots, and a
websocket bridge for steering a live session from a browser.
"""

from .field import EllipseBound, FieldSpec, RectObstacle, bound_rectangle, scale_factor
from .mpc import MpcConfig, SteeringController, SteeringProblem, SteeringSolution
from .qp import DenseQpSolver, QpSolution, QuadProgram
from .scenarios import Scenario, builtin_names, builtin_scenario, load_scenario
from .simtrace import SimTrace, TickRecord
from .simulate import SimEngine, benchmark, final_line_offset, run_scenario
from .teleop import DesiredPath, TeleopGains, TeleopTracker, fbl_steering, path_errors
from .vehicle import (
    FrontEdges,
    VehicleParams,
    VehiclePose,
    euler_step,
    front_edges,
    rk4_step,
    side_slip,
)

__all__ = [
    "EllipseBound",
    "FieldSpec",
    "RectObstacle",
    "bound_rectangle",
    "scale_factor",
    "MpcConfig",
    "SteeringController",
    "SteeringProblem",
    "SteeringSolution",
    "DenseQpSolver",
    "QpSolution",
    "QuadProgram",
    "Scenario",
    "builtin_names",
    "builtin_scenario",
    "load_scenario",
    "SimTrace",
    "TickRecord",
    "SimEngine",
    "benchmark",
    "final_line_offset",
    "run_scenario",
    "DesiredPath",
    "TeleopGains",
    "TeleopTracker",
    "fbl_steering",
    "path_errors",
    "FrontEdges",
    "VehicleParams",
    "VehiclePose",
    "euler_step",
    "front_edges",
    "rk4_step",
    "side_slip",
]

__version__ = "0.1.0"
