"""Evaluators for linear, shuffled-linear, ELM and Takagi-Sugeno models.

Layout of the SLM coefficient matrix ``gamma`` (shape ``((n+1)*h, m)``):
block ``i`` occupies rows ``i*(n+1) .. i*(n+1)+n``. Its first ``n`` rows are
the transposed local slope ``alpha_i`` (m x n) and its last row is the
offset ``beta_i``, so that block ``i`` applied to ``z = [x; 1]`` gives
``alpha_i x + beta_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError
from .rbf import RbfBank, activations

__all__ = [
    "ElmParams",
    "LinearModelParams",
    "SlmParams",
    "augment",
    "eval_elm",
    "eval_lm",
    "eval_slm",
    "eval_slm_terms",
    "eval_tsm_product",
    "param_count",
    "predict_elm",
    "predict_slm",
    "slm_features",
]


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if not np.all(np.isfinite(a)):
        raise InputError("parameters contain non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LinearModelParams:
    alpha: np.ndarray  # (m, n)
    beta: np.ndarray  # (m,)

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64, ndmin=2)
        beta = np.array(self.beta, dtype=np.float64).reshape(-1)
        if alpha.shape[0] != beta.shape[0]:
            raise ShapeError(f"alpha has {alpha.shape[0]} rows, beta has {beta.shape[0]} entries")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise InputError("linear model parameters contain non-finite entries")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True, eq=False)
class SlmParams:
    bank: RbfBank
    gamma: np.ndarray

    def __post_init__(self):
        gamma = _readonly(self.gamma)
        rows = (self.bank.dim_in + 1) * self.bank.count_models
        if gamma.shape[0] != rows:
            raise ShapeError(f"gamma needs {rows} rows for n={self.bank.dim_in}, "
                             f"h={self.bank.count_models}; got {gamma.shape[0]}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def dim_out(self) -> int:
        return self.gamma.shape[1]

    def local_model(self, i: int) -> LinearModelParams:
        """The ``alpha_i x + beta_i`` block of model `i`."""
        n = self.bank.dim_in
        block = self.gamma[i * (n + 1):(i + 1) * (n + 1)]
        return LinearModelParams(block[:n].T, block[n])

    def zero_slopes(self) -> "SlmParams":
        """Copy with every ``alpha_i`` set to zero."""
        n = self.bank.dim_in
        g = np.array(self.gamma)
        for i in range(self.bank.count_models):
            g[i * (n + 1):i * (n + 1) + n] = 0.0
        return SlmParams(self.bank, g)


@dataclass(frozen=True, eq=False)
class ElmParams:
    bank: RbfBank
    b_matrix: np.ndarray

    def __post_init__(self):
        b = _readonly(self.b_matrix)
        if b.shape[0] != self.bank.count_models:
            raise ShapeError(f"B needs {self.bank.count_models} rows, got {b.shape[0]}")
        object.__setattr__(self, "b_matrix", b)

    @property
    def dim_out(self) -> int:
        return self.b_matrix.shape[1]


def _as_batch(x, n: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1
    x = x.reshape(1, -1) if single else x
    if x.ndim != 2 or x.shape[1] != n:
        raise ShapeError(f"inputs must have dimension {n}, got shape {x.shape}")
    return x, single


def _check_point(x, n: int) -> np.ndarray:
    x, _ = _as_batch(x, n)
    if x.shape[0] != 1:
        raise ShapeError("expected a single input vector")
    if not np.all(np.isfinite(x)):
        raise InputError("x contains non-finite entries")
    return x


def augment(x) -> np.ndarray:
    """Append a trailing 1 to each row: ``z = [x; 1]``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim <= 1:
        return np.append(x.reshape(-1), 1.0)
    return np.hstack([x, np.ones((x.shape[0], 1))])


def slm_features(g: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Row-wise block product: row j is ``[g_j1 z_j, ..., g_jh z_j]``."""
    return (g[:, :, None] * z[:, None, :]).reshape(g.shape[0], -1)


def eval_lm(lm: LinearModelParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != lm.alpha.shape[1]:
        raise ShapeError(f"x has dimension {x.shape[0]}, model expects {lm.alpha.shape[1]}")
    return lm.alpha @ x + lm.beta


def predict_slm(p: SlmParams, x) -> np.ndarray:
    """SLM output for a batch (N, n) -> (N, m), using the stacked form."""
    x = np.asarray(x, dtype=np.float64)
    return slm_features(activations(p.bank, x), augment(x)) @ p.gamma


def predict_elm(p: ElmParams, x) -> np.ndarray:
    return activations(p.bank, np.asarray(x, dtype=np.float64)) @ p.b_matrix


def eval_slm(p: SlmParams, x) -> np.ndarray:
    x = _check_point(x, p.bank.dim_in)
    return predict_slm(p, x)[0]


def eval_elm(p: ElmParams, x) -> np.ndarray:
    x = _check_point(x, p.bank.dim_in)
    return predict_elm(p, x)[0]


def eval_slm_terms(p: SlmParams, x) -> np.ndarray:
    """Sum-of-local-models evaluation, one term per node.

    Mathematically identical to :func:`eval_slm`; kept as an independent
    reference path.
    """
    x = _check_point(x, p.bank.dim_in)[0]
    out = np.zeros(p.dim_out)
    for i in range(p.bank.count_models):
        d = x - p.bank.centers[i]
        weight = np.exp(-p.bank.widths[i] * float(d @ d))
        out += weight * eval_lm(p.local_model(i), x)
    return out


def eval_tsm_product(p: SlmParams, x) -> np.ndarray:
    """Takagi-Sugeno reading of an SLM.

    Each rule fires with the product of one-dimensional Gaussian memberships
    ``exp(-b_i (x_k - a_ik)^2)`` over the input coordinates; the rule
    consequents are the local linear models.
    """
    x = _check_point(x, p.bank.dim_in)[0]
    memberships = np.exp(-p.bank.widths[:, None] * (x[None, :] - p.bank.centers) ** 2)
    firing = np.prod(memberships, axis=1)
    out = np.zeros(p.dim_out)
    for i in range(p.bank.count_models):
        out += firing[i] * eval_lm(p.local_model(i), x)
    return out


def param_count(model) -> int:
    """Number of free (trained) parameters: ``h*m*(n+1)`` for SLM, ``h*m`` for ELM."""
    if isinstance(model, SlmParams):
        return int(model.gamma.size)
    if isinstance(model, ElmParams):
        return int(model.b_matrix.size)
    raise TypeError(f"unsupported model type {type(model).__name__}")
