"""Dense least-squares primitives built on the singular value decomposition.

Matrices are plain 2-D ``float64`` numpy arrays. Every public routine checks
that its operands are finite and shaped consistently before doing any work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError

__all__ = [
    "LstsqResult",
    "as_matrix",
    "default_rank_tol",
    "frobenius_sq",
    "lstsq_svd",
    "numerical_rank",
    "pseudoinverse_solve",
]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a finite 2-D float64 array, raising on bad input."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def default_rank_tol(shape) -> float:
    """Relative singular value cutoff: ``max(rows, cols) * eps``."""
    return max(shape) * np.finfo(np.float64).eps if len(shape) else 0.0


def _resolve_tol(rank_tol, shape) -> float:
    if rank_tol is None:
        return default_rank_tol(shape)
    if not np.isfinite(rank_tol) or rank_tol < 0:
        raise InputError(f"rank_tol must be a finite non-negative number, got {rank_tol}")
    return float(rank_tol)


@dataclass(frozen=True)
class LstsqResult:
    """Minimum-norm solution together with the spectrum it was computed from.

    Attributes
    ----------
    x : ndarray, shape (p, m)
        The minimum-norm least-squares solution.
    rank : int
        Number of singular values kept.
    singular_values : ndarray
        All singular values of the regressor, in descending order.
    """

    x: np.ndarray
    rank: int
    singular_values: np.ndarray

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def sigma_min_kept(self) -> float:
        return float(self.singular_values[self.rank - 1]) if self.rank else 0.0

    @property
    def condition(self) -> float:
        """Ratio of the largest to the smallest retained singular value."""
        if self.rank == 0:
            return float("inf")
        return self.sigma_max / self.sigma_min_kept


def lstsq_svd(a, t, rank_tol=None, ridge: float = 0.0) -> LstsqResult:
    """Solve ``min ||a x - t||_F`` with minimal ``||x||_F`` via a thin SVD.

    Singular values at or below ``rank_tol * sigma_max`` are treated as zero.
    A positive `ridge` replaces ``1/s`` by ``s / (s**2 + ridge)`` on the kept
    values; this is an extension and is off by default.
    """
    a = as_matrix(a, "a")
    t = as_matrix(t, "t")
    if a.shape[0] != t.shape[0]:
        raise ShapeError(f"row mismatch: a has {a.shape[0]} rows, t has {t.shape[0]}")
    if ridge < 0:
        raise InputError(f"ridge must be non-negative, got {ridge}")
    tol = _resolve_tol(rank_tol, a.shape)
    p, m = a.shape[1], t.shape[1]
    if a.size == 0:
        return LstsqResult(np.zeros((p, m)), 0, np.zeros(0))

    u, s, vt = np.linalg.svd(a, full_matrices=False)
    keep = s > tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        return LstsqResult(np.zeros((p, m)), 0, s)
    sk = s[:rank]
    inv = sk / (sk * sk + ridge) if ridge > 0 else 1.0 / sk
    x = vt[:rank].T @ (inv[:, None] * (u[:, :rank].T @ t))
    return LstsqResult(x, rank, s)


def pseudoinverse_solve(a, t, rank_tol=None) -> np.ndarray:
    """Return ``a^+ t``, the minimum-norm least-squares solution.

    Parameters
    ----------
    a : array_like, shape (N, p)
    t : array_like, shape (N, m)
        A 1-D `t` is treated as a single column.
    rank_tol : float, optional
        Relative cutoff on singular values. Defaults to ``max(N, p) * eps``.

    Returns
    -------
    ndarray, shape (p, m)
    """
    return lstsq_svd(a, t, rank_tol).x


def numerical_rank(a, rank_tol=None) -> int:
    """Count singular values above ``rank_tol * sigma_max``; zero matrix -> 0."""
    a = as_matrix(a, "a")
    if a.size == 0:
        return 0
    tol = _resolve_tol(rank_tol, a.shape)
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def frobenius_sq(a) -> float:
    """Sum of squared entries."""
    arr = np.asarray(a, dtype=np.float64)
    return float(np.sum(arr * arr))
