"""Constrained control allocation under magnitude and rate limits.

Allocators map a moment demand ``nu`` to effector deflections ``u`` through
an effectiveness matrix ``B``. Besides the classical pseudoinverse family and
a box-constrained least-squares QP, the package implements an iterative
dynamic allocator that combines closed-form weighted least-squares gains with
saturation and residual redistribution.
"""
from .allocators import (AllocationResult, IdcaConfig, idca, pica, qpca, rpica, rspica,
                         saturated_pica)
from .ams import MomentSet, contains, moment_set
from .bvls import CyclingError, bvls
from .config import ConfigError, ScenarioConfig, load_config, validate_config
from .core import (ActuatorLimits, ActuatorState, AllocationError, DegenerateLimitsError,
                   DegenerateWeightsError, DimensionError, EffectiveBounds, effective_bounds,
                   is_feasible, saturate, saturate_rate)
from .linalg import LinearFilterGains, filter_gains, pinv, rank
from .reference import generic_qp
from .steady_state import conditionalize, steady_state_target
from .weighting import (DragModel, WeightingConfig, WeightingMatrices, compute_weights,
                        magnitude_weights, rate_weights)

__version__ = "0.1.0"

__all__ = [
    "AllocationResult", "IdcaConfig", "idca", "pica", "qpca", "rpica", "rspica", "saturated_pica",
    "MomentSet", "contains", "moment_set", "CyclingError", "bvls",
    "ConfigError", "ScenarioConfig", "load_config", "validate_config",
    "ActuatorLimits", "ActuatorState", "AllocationError", "DegenerateLimitsError",
    "DegenerateWeightsError", "DimensionError", "EffectiveBounds", "effective_bounds",
    "is_feasible", "saturate", "saturate_rate",
    "LinearFilterGains", "filter_gains", "pinv", "rank", "generic_qp",
    "conditionalize", "steady_state_target",
    "DragModel", "WeightingConfig", "WeightingMatrices", "compute_weights",
    "magnitude_weights", "rate_weights",
]
