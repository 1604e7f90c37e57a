"""Metro corridor traction-power simulation with real-time departure rescheduling."""

__version__ = "0.1.0"

from .engine import Policy, Scenario, SimTrace, run_pair, run_scenario
from .metrics import ComparisonReport, compare
from .scheduling import SchedulerParams, ScheduleInstance, DepartureDecision, decide
from .solver import BipProblem, BipSolution, solve, solve_exhaustive

__all__ = [
    "__version__",
    "Policy",
    "Scenario",
    "SimTrace",
    "run_pair",
    "run_scenario",
    "ComparisonReport",
    "compare",
    "SchedulerParams",
    "ScheduleInstance",
    "DepartureDecision",
    "decide",
    "BipProblem",
    "BipSolution",
    "solve",
    "solve_exhaustive",
]
