"""Symmetry-aware analysis and simulation of multi-agent, multi-option opinion dynamics."""

from .dynamics import HomogeneousModel, ModelParams, TensorModel, drift, perturb
from .errors import OpinionError
from .simulation import RampSpec, SimConfig, integrate, random_init
from .spectral import balance_terms, critical_lambdas
from .state import DeviationState, OpinionState, classify_group

__version__ = "0.1.0"

__all__ = [
    "DeviationState",
    "HomogeneousModel",
    "ModelParams",
    "OpinionError",
    "OpinionState",
    "RampSpec",
    "SimConfig",
    "TensorModel",
    "balance_terms",
    "classify_group",
    "critical_lambdas",
    "drift",
    "integrate",
    "perturb",
    "random_init",
]
