"""Synthetic time-series augmentation via a time-varying AR model.

Fit per-channel mean and variance curves from an ensemble of aligned
run-to-failure (or otherwise aligned) series, then generate new series
whose time-dependent moments match the fitted curves. See the dataset,
stats, interp, tvar, augment and validate modules; the `tvaraug` console
script wires them into a fit -> generate -> validate pipeline.
"""

__version__ = "0.1.0"

from .errors import (TvaraugError, MissingColumn, NonNumericValue,
                     DuplicateTimestamp, EmptyUnit, DegenerateLength,
                     OutOfRange, InvalidOrder, NegativeRadicand,
                     ZeroInterpValue, NonFiniteStats, DegenerateCovariance,
                     SchemaVersionMismatch, CorruptModel, ShapeMismatch,
                     LengthMismatch, ConfigError)
from .dataset import (ALIGN_BY_RUL, ALIGN_BY_TIME, ColumnSchema, Dataset,
                      align_by_rul, dataset_from_arrays, load_dataset,
                      write_dataset)
from .stats import (EnsembleStats, ensemble_cov, ensemble_mean,
                    ensemble_stats, moments_from_array)
from .interp import (SinusoidInterp, TableInterp, eval_interp, fit_direct,
                     fit_sinusoid, interp_from_payload)
from .tvar import (MOMENT_MATCHING, RAW_VARIANCE, ChannelModel,
                   ChannelTvarParams, SubProcess, TvarModel, basis_f0,
                   basis_f1, build_model, coeff_a, coeff_b, cov_closed,
                   cov_sum_form, derive_seed, generate_closed,
                   generate_closed_single, generate_recursive, mean_closed,
                   mean_prod_form, theoretical_cov_diag, theoretical_mean)
from .augment import (SyntheticBatch, augment, batch_to_dataset, fit,
                      load_model, save_model)
from .validate import (Tolerances, ValidationReport, compare_to_source,
                       monte_carlo_moments, phm_score, rmse)

__all__ = [
    "__version__",
    "TvaraugError", "MissingColumn", "NonNumericValue", "DuplicateTimestamp",
    "EmptyUnit", "DegenerateLength", "OutOfRange", "InvalidOrder",
    "NegativeRadicand", "ZeroInterpValue", "NonFiniteStats",
    "DegenerateCovariance", "SchemaVersionMismatch", "CorruptModel",
    "ShapeMismatch", "LengthMismatch", "ConfigError",
    "ALIGN_BY_RUL", "ALIGN_BY_TIME", "ColumnSchema", "Dataset",
    "align_by_rul", "dataset_from_arrays", "load_dataset", "write_dataset",
    "EnsembleStats", "ensemble_cov", "ensemble_mean", "ensemble_stats",
    "moments_from_array",
    "SinusoidInterp", "TableInterp", "eval_interp", "fit_direct",
    "fit_sinusoid", "interp_from_payload",
    "MOMENT_MATCHING", "RAW_VARIANCE", "ChannelModel", "ChannelTvarParams",
    "SubProcess", "TvarModel", "basis_f0", "basis_f1", "build_model",
    "coeff_a", "coeff_b", "cov_closed", "cov_sum_form", "derive_seed",
    "generate_closed", "generate_closed_single", "generate_recursive",
    "mean_closed", "mean_prod_form", "theoretical_cov_diag",
    "theoretical_mean",
    "SyntheticBatch", "augment", "batch_to_dataset", "fit", "load_model",
    "save_model",
    "Tolerances", "ValidationReport", "compare_to_source",
    "monte_carlo_moments", "phm_score", "rmse",
]
