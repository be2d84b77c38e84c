"""Exact scheduling: model construction, branch-and-bound, brute-force oracle,
feasibility checking, and LP-format export."""

from .feasibility import Violation, check_feasibility
from .lpwriter import ParsedLp, export_lp, parse_lp, solve_parsed
from .model import MilpModel, build_model, delay_sentinel
from .oracle import OracleResult, SizeError, brute_force_oracle
from .solver import (
    ScheduleSolution,
    SolverLimits,
    SolverStats,
    solution_from_json,
    solution_to_json,
    solve_bnb,
)

__all__ = [
    "MilpModel",
    "OracleResult",
    "ParsedLp",
    "ScheduleSolution",
    "SizeError",
    "SolverLimits",
    "SolverStats",
    "Violation",
    "brute_force_oracle",
    "build_model",
    "check_feasibility",
    "delay_sentinel",
    "export_lp",
    "parse_lp",
    "solution_from_json",
    "solution_to_json",
    "solve_bnb",
    "solve_parsed",
]
