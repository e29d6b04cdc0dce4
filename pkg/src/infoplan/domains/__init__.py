"""Reference measurement problems."""
from .guess import GuessModel, guess_model, questions_needed
from .submarine import (
    Found,
    Grid,
    SubmarineProcess,
    admissible_moves,
    destinations,
    sonar_coverage,
    stranded_configuration,
    submarine_process,
)
from .weighing import WeighingModel, weighing_model, weighings_needed

__all__ = [
    "Found",
    "Grid",
    "GuessModel",
    "SubmarineProcess",
    "WeighingModel",
    "admissible_moves",
    "destinations",
    "guess_model",
    "questions_needed",
    "sonar_coverage",
    "stranded_configuration",
    "submarine_process",
    "weighing_model",
    "weighings_needed",
]
