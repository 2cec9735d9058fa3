"""Tensor completion for radio maps via Douglas-Rachford splitting."""
from .dr import DivergenceError, SolverConfig, SolverReport, dr_step, solve
from .problems import Method, ProblemSpec, complete, evaluate_unsampled, nmse_db, objective_value
from .samples import SampleSet

__version__ = "0.1.0"
