"""Declarative Monte Carlo experiment runner and CLI."""
from .energy import energy_permutation_test, energy_statistic
from .report import ExperimentReport, Flag
from .residuals import local_alternative, transported_residual
from .spec import PRESETS, load_spec, preset_spec, validate_spec

__all__ = [
    "energy_permutation_test", "energy_statistic",
    "ExperimentReport", "Flag",
    "local_alternative", "transported_residual",
    "PRESETS", "load_spec", "preset_spec", "validate_spec",
]
