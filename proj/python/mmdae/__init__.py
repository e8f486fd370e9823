"""Python front end for the mass-matrix DAE engine."""

from ._mmdae import (
    DaeProblem,
    DynamicSystem,
    Error,
    EvaluationError,
    ParseError,
    PowerFlowSolution,
    SolverError,
    SystemCase,
    Trajectory,
    ValidationError,
    bench,
    init_dynamics,
    integrate,
    load_case,
    nr_powerflow,
    parse_case,
    to_traditional,
)


def initialize(case):
    """Power flow followed by dynamic initialization."""
    return init_dynamics(case, nr_powerflow(case))


__all__ = [
    "DaeProblem",
    "DynamicSystem",
    "Error",
    "EvaluationError",
    "ParseError",
    "PowerFlowSolution",
    "SolverError",
    "SystemCase",
    "Trajectory",
    "ValidationError",
    "bench",
    "init_dynamics",
    "initialize",
    "integrate",
    "load_case",
    "nr_powerflow",
    "parse_case",
    "to_traditional",
]
