"""Shuffled linear models: local linear models on random Gaussian operating points."""

__version__ = "0.1.0"

from .errors import ConfigError, InputError, NumericalError, ShapeError, SlmError
from .linalg import frobenius_sq, numerical_rank, pseudoinverse_solve
from .models import (
    ElmParams,
    LinearModelParams,
    SlmParams,
    eval_elm,
    eval_lm,
    eval_slm,
    eval_tsm_product,
    param_count,
    predict_elm,
    predict_slm,
)
from .rbf import RandomSpec, RbfBank, activation, check_distinct_norms, generate_bank
from .training import Dataset, FitReport, build_h_matrix, build_k_matrix, check_k_rank, fit_elm, fit_slm
