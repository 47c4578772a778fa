"""Interval type-2 Takagi-Sugeno model identification by regularized fuzzy
c-regression, a Gaussian/Student-t hyperplane membership and Karnik-Mendel
type reduction."""
from .consequent import fit_model, predict, predict_batch, predict_raw
from .core import (
    CoefficientInterval,
    Config,
    ConfigError,
    Dataset,
    ModelFileError,
    SGDConfig,
    TSKModel,
    load_model,
    save_model,
    validate_config,
)
from .typereduce import NoFireError, km_brute_force, km_reduce

__all__ = [
    "CoefficientInterval",
    "Config",
    "ConfigError",
    "Dataset",
    "ModelFileError",
    "NoFireError",
    "SGDConfig",
    "TSKModel",
    "fit_model",
    "km_brute_force",
    "km_reduce",
    "load_model",
    "predict",
    "predict_batch",
    "predict_raw",
    "save_model",
    "validate_config",
]
