"""Planning sequences of informative measurements by maximizing outcome entropy."""
from __future__ import annotations

from .entropy import OutcomeDistribution, entropy, gaussian_entropy, information_content
from .errors import (
    ConsistencyError,
    InfoPlanError,
    ModelError,
    NumericalError,
    ResourceError,
    TargetNotReached,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "InfoPlanError",
    "ModelError",
    "NumericalError",
    "OutcomeDistribution",
    "ResourceError",
    "TargetNotReached",
    "__version__",
    "entropy",
    "gaussian_entropy",
    "information_content",
]
