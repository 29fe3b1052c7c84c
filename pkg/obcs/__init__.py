"""
obcs: one-bit compressed sensing by sign truncated matching pursuit.
Contains the recovery algorithms, the BIHT baseline, metrics, a brute-force
oracle and the benchmark harness behind the command line and the dashboard.
"""
from obcs.baselines import BihtConfig, run_biht
from obcs.model import MeasurementEnsemble, RecoveryResult, SparseSignal, generate_instance
from obcs.reduction import build_reduced_problem, certify_solution, lift_solution, select_first_index
from obcs.solvers import Objective
from obcs.strmp import StrmpConfig, run_strmp

__all__ = [
    "BihtConfig",
    "MeasurementEnsemble",
    "Objective",
    "RecoveryResult",
    "SparseSignal",
    "StrmpConfig",
    "build_reduced_problem",
    "certify_solution",
    "generate_instance",
    "lift_solution",
    "run_biht",
    "run_strmp",
    "select_first_index",
]
