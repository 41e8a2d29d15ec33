"""Duality-gap driven block coordinate descent for generalized linear models."""
from .data import Dataset, SyntheticSpec, block_op_norm_sq, column_norms_sq, gen_synthetic, load_libsvm, transpose, write_libsvm
from .engine import DuhlConfig, GapMemory, RefreshMode, RoundTrace, run_block_cd, run_duhl, swap_count
from .kernels import BACKEND
from .problems import Family, ProblemSpec, TrainState, coord_gap, coord_gaps, dual_map_w, lasso_B, objective, total_gap
from .selectors import PolicyKind, SelectionPolicy, rho, select_importance, select_random, select_sequential, select_topm
from .solver import LocalBlockView, SolverBudget, exact_block_solve, measure_theta, solve_block

__version__ = "0.1.0"
