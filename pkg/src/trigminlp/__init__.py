"""Global optimization of MINLPs with trigonometric and bilinear terms.

Nonlinear terms are relaxed by piecewise polyhedral cells over adaptively
refined partitions; the resulting MILPs give lower bounds that tighten until
the gap to a feasible upper bound closes.
"""
from .assembly import build_relaxation, initial_partitions
from .driver import (IterationRecord, SolveConfig, SolveResult, export_results, prepare,
                     relative_gap, solve_global)
from .fbbt import InfeasibleModelError, fbbt_tighten
from .functions import Sinusoid, make_function
from .mdppp import (MdpppInstance, apply_optimality_cuts, build_mdppp_model,
                    generate_instance, heading_heuristic)
from .model import FactoredModel, ModelBuilder, validate_model
from .oracle import dp_oracle
from .partitioning import Partition, base_partition
from .principal import apply_principal_domains
from .refinement import RefinementConfig, StrategyConfig, refine_partition

__version__ = "0.1.0"

__all__ = [
    "FactoredModel", "InfeasibleModelError", "IterationRecord", "MdpppInstance", "ModelBuilder",
    "Partition", "RefinementConfig", "Sinusoid", "SolveConfig", "SolveResult", "StrategyConfig",
    "apply_optimality_cuts", "apply_principal_domains", "base_partition", "build_mdppp_model",
    "build_relaxation", "dp_oracle", "export_results", "fbbt_tighten", "generate_instance",
    "heading_heuristic", "initial_partitions", "make_function", "prepare", "refine_partition",
    "relative_gap", "solve_global", "validate_model",
]
