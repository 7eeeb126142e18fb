"""Closed-form fitting of SLM and ELM output parameters.

Both models are linear in their trained parameters once the random bank is
fixed, so training is a single minimum-norm least-squares solve against a
regressor matrix: ``H`` (N x h) for the ELM, ``K`` (N x (n+1)h) for the SLM.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, ShapeError
from .linalg import as_matrix, lstsq_svd, numerical_rank
from .models import ElmParams, SlmParams, augment, slm_features
from .rbf import RbfBank, activations

__all__ = [
    "Dataset",
    "FitReport",
    "build_h_matrix",
    "build_k_matrix",
    "build_k_matrix_naive",
    "build_z",
    "check_k_rank",
    "fit_elm",
    "fit_slm",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """N input/target pairs stored as `inputs` (N, n) and `targets` (N, m)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.inputs, "inputs")
        t = as_matrix(self.targets, "targets")
        if x.shape[0] != t.shape[0]:
            raise ShapeError(f"{x.shape[0]} inputs but {t.shape[0]} targets")
        if x.shape[0] < 1:
            raise InputError("dataset is empty")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", t)

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def dim_in(self) -> int:
        return self.inputs.shape[1]

    @property
    def dim_out(self) -> int:
        return self.targets.shape[1]

    def head(self, count: int) -> "Dataset":
        return Dataset(self.inputs[:count], self.targets[:count])


@dataclass
class FitReport:
    kind: str
    n: int
    m: int
    h: int
    N: int
    train_mse: float
    train_sse: float
    k_build_seconds: float
    solve_seconds: float
    rank_of_regressor: int
    regressor_cols: int
    sigma_max: float
    sigma_min_kept: float

    @property
    def condition(self) -> float:
        return self.sigma_max / self.sigma_min_kept if self.sigma_min_kept > 0 else math.inf

    @property
    def full_rank(self) -> bool:
        return self.rank_of_regressor == min(self.N, self.regressor_cols)

    def to_dict(self):
        return asdict(self)


def _check_dims(bank: RbfBank, data: Dataset):
    if data.dim_in != bank.dim_in:
        raise ShapeError(f"data inputs have dimension {data.dim_in}, bank expects {bank.dim_in}")


def build_z(x) -> np.ndarray:
    """Augmented input ``[x; 1]``."""
    return augment(np.asarray(x, dtype=np.float64).reshape(-1))


def build_h_matrix(bank: RbfBank, data: Dataset) -> np.ndarray:
    """Hidden-layer output matrix, entry (j, i) = g_i(x_j)."""
    _check_dims(bank, data)
    return activations(bank, data.inputs)


def build_k_matrix(bank: RbfBank, data: Dataset) -> np.ndarray:
    """SLM regressor: row j is ``[g_1(x_j) z_j^T, ..., g_h(x_j) z_j^T]``.

    Assembled block-wise. ``z_j`` is formed once per row and every block is
    a scaled copy of it, so only h Gaussians are evaluated per sample.
    """
    _check_dims(bank, data)
    return slm_features(activations(bank, data.inputs), augment(data.inputs))


def build_k_matrix_naive(bank: RbfBank, data: Dataset) -> np.ndarray:
    """Entry-by-entry assembly of K, re-evaluating the Gaussian for every column."""
    _check_dims(bank, data)
    xs = data.inputs.tolist()
    centers = bank.centers.tolist()
    widths = bank.widths.tolist()
    n, h = bank.dim_in, bank.count_models
    rows = []
    for x in xs:
        z = x + [1.0]
        row = []
        for i in range(h):
            a, b = centers[i], widths[i]
            for k in range(n + 1):
                d2 = 0.0
                for c in range(n):
                    diff = x[c] - a[c]
                    d2 += diff * diff
                row.append(float(np.exp(-d2 * b)) * z[k])
        rows.append(row)
    return np.array(rows, dtype=np.float64).reshape(len(xs), (n + 1) * h)


def _fit(kind, bank, data, build, rank_tol, ridge):
    _check_dims(bank, data)
    t0 = time.perf_counter()
    reg = build(bank, data)
    t1 = time.perf_counter()
    sol = lstsq_svd(reg, data.targets, rank_tol, ridge=ridge)
    t2 = time.perf_counter()
    resid = reg @ sol.x - data.targets
    sse = float(np.sum(resid * resid))
    report = FitReport(
        kind=kind,
        n=bank.dim_in,
        m=data.dim_out,
        h=bank.count_models,
        N=len(data),
        train_mse=sse / len(data),
        train_sse=sse,
        k_build_seconds=t1 - t0,
        solve_seconds=t2 - t1,
        rank_of_regressor=sol.rank,
        regressor_cols=reg.shape[1],
        sigma_max=sol.sigma_max,
        sigma_min_kept=sol.sigma_min_kept,
    )
    return sol.x, report


def fit_slm(bank: RbfBank, data: Dataset, rank_tol=None, ridge: float = 0.0):
    """Fit all local linear models jointly: ``gamma = K^+ T``.

    Returns
    -------
    (SlmParams, FitReport)
        `train_mse` is the squared error summed over outputs and averaged
        over samples; `train_sse` is the unaveraged sum.
    """
    gamma, report = _fit("slm", bank, data, build_k_matrix, rank_tol, ridge)
    return SlmParams(bank, gamma), report


def fit_elm(bank: RbfBank, data: Dataset, rank_tol=None, ridge: float = 0.0):
    """Fit ELM output weights: ``B = H^+ T``."""
    b, report = _fit("elm", bank, data, build_h_matrix, rank_tol, ridge)
    return ElmParams(bank, b), report


def check_k_rank(bank: RbfBank, data: Dataset, rank_tol=None) -> int:
    """Numerical rank of K; full rank means ``min(N, (n+1)h)``."""
    return numerical_rank(build_k_matrix(bank, data), rank_tol)
