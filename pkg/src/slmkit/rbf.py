"""Gaussian radial basis nodes and their random hidden parameters.

A node with center ``a`` and width ``b > 0`` responds to ``x`` with
``exp(-b * ||x - a||**2)``. Centers and widths are drawn once from
continuous distributions, independently of any training data, and never
tuned afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError, InputError, ShapeError

RNG_NAME = "numpy.random.PCG64"
WIDTH_FLOOR = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.variance)) or self.variance < 0:
            raise ConfigError(f"normal distribution needs finite mean and variance >= 0, got {self}")

    def sample(self, rng, size):
        return rng.normal(self.mean, np.sqrt(self.variance), size=size)

    def to_dict(self):
        return {"kind": "normal", "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise ConfigError(f"uniform distribution needs finite lo < hi, got {self}")

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size=size)

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate <= 0:
            raise ConfigError(f"exponential distribution needs rate > 0, got {self}")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size=size)

    def to_dict(self):
        return {"kind": "exponential", "rate": self.rate}


Distribution = Union[Normal, Uniform, Exponential]
_DISTS = {"normal": Normal, "uniform": Uniform, "exponential": Exponential}


def dist_from_dict(d) -> Distribution:
    if isinstance(d, (Normal, Uniform, Exponential)):
        return d
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"distribution must be a mapping with a 'kind' key, got {d!r}")
    params = dict(d)
    kind = params.pop("kind")
    if kind not in _DISTS:
        raise ConfigError(f"unknown distribution kind {kind!r}; expected one of {sorted(_DISTS)}")
    try:
        return _DISTS[kind](**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} distribution: {exc}") from None


@dataclass(frozen=True)
class RandomSpec:
    """How centers and widths of a bank are drawn.

    Centers are i.i.d. per coordinate. Widths must come from a distribution
    with no mass below zero; draws under `width_floor` are redrawn.
    """

    center_dist: Distribution = field(default_factory=lambda: Normal(0.0, 2.0))
    width_dist: Distribution = field(default_factory=lambda: Uniform(0.0, 1.0))
    seed: int = 0
    width_floor: float = WIDTH_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "center_dist", dist_from_dict(self.center_dist))
        object.__setattr__(self, "width_dist", dist_from_dict(self.width_dist))
        if isinstance(self.center_dist, Exponential):
            raise ConfigError("center distribution must be normal or uniform")
        if isinstance(self.width_dist, Normal):
            raise ConfigError("width distribution must be uniform (lo >= 0) or exponential")
        if isinstance(self.width_dist, Uniform) and self.width_dist.lo < 0:
            raise ConfigError("uniform width distribution needs lo >= 0")
        if not self.width_floor > 0:
            raise ConfigError("width_floor must be positive")
        if isinstance(self.width_dist, Uniform) and self.width_dist.hi <= self.width_floor:
            raise ConfigError("uniform width distribution lies entirely below width_floor")

    def with_seed(self, seed: int) -> "RandomSpec":
        return RandomSpec(self.center_dist, self.width_dist, int(seed), self.width_floor)

    def to_dict(self):
        return {
            "center_dist": self.center_dist.to_dict(),
            "width_dist": self.width_dist.to_dict(),
            "seed": self.seed,
            "width_floor": self.width_floor,
        }

    @classmethod
    def from_dict(cls, d) -> "RandomSpec":
        return cls(
            center_dist=dist_from_dict(d["center_dist"]),
            width_dist=dist_from_dict(d["width_dist"]),
            seed=int(d["seed"]),
            width_floor=float(d.get("width_floor", WIDTH_FLOOR)),
        )


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RbfBank:
    """Fixed hidden layer: `centers` has shape (h, n), `widths` shape (h,)."""

    centers: np.ndarray
    widths: np.ndarray
    seed: int = 0

    def __post_init__(self):
        centers = _frozen(self.centers)
        widths = _frozen(self.widths).reshape(-1)
        if centers.ndim != 2:
            raise ShapeError(f"centers must be 2-D (h, n), got shape {centers.shape}")
        if centers.shape[0] != widths.shape[0]:
            raise ShapeError(f"{centers.shape[0]} centers but {widths.shape[0]} widths")
        if not np.all(np.isfinite(centers)):
            raise InputError("centers contain non-finite entries")
        if not np.all(np.isfinite(widths)) or np.any(widths <= 0):
            raise InputError("widths must be finite and strictly positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)

    @property
    def dim_in(self) -> int:
        return self.centers.shape[1]

    @property
    def count_models(self) -> int:
        return self.centers.shape[0]

    def prefix(self, h: int) -> "RbfBank":
        """The first `h` nodes of this bank."""
        if not 1 <= h <= self.count_models:
            raise ShapeError(f"prefix length {h} outside 1..{self.count_models}")
        return RbfBank(self.centers[:h], self.widths[:h], self.seed)

    def __eq__(self, other):
        if not isinstance(other, RbfBank):
            return NotImplemented
        return (
            self.seed == other.seed
            and np.array_equal(self.centers, other.centers)
            and np.array_equal(self.widths, other.widths)
        )

    def to_dict(self):
        return {
            "seed": self.seed,
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "RbfBank":
        centers = np.asarray(d["centers"], dtype=np.float64)
        if centers.size == 0:
            centers = centers.reshape(0, 0)
        return cls(centers, np.asarray(d["widths"], dtype=np.float64), int(d.get("seed", 0)))


def generate_bank(spec: RandomSpec, dim_in: int, count_models: int) -> RbfBank:
    """Draw `count_models` centers in R^dim_in and their widths from `spec`.

    The result depends only on the arguments; the generator is PCG64 seeded
    with ``spec.seed``. Widths below ``spec.width_floor`` are redrawn.
    """
    if dim_in < 1 or count_models < 1:
        raise ConfigError(f"need dim_in >= 1 and count_models >= 1, got {dim_in}, {count_models}")
    rng = make_rng(spec.seed)
    centers = spec.center_dist.sample(rng, (count_models, dim_in))
    widths = spec.width_dist.sample(rng, count_models)
    bad = widths < spec.width_floor
    while np.any(bad):
        widths[bad] = spec.width_dist.sample(rng, int(np.count_nonzero(bad)))
        bad = widths < spec.width_floor
    return RbfBank(centers, widths, spec.seed)


def sq_distances(bank: RbfBank, x) -> np.ndarray:
    """Squared distances from each row of `x` (N, n) to every center: (N, h)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != bank.dim_in:
        raise ShapeError(f"inputs must have shape (N, {bank.dim_in}), got {x.shape}")
    diff = x[:, None, :] - bank.centers[None, :, :]
    d2 = np.zeros(diff.shape[:2])
    for k in range(diff.shape[2]):  # fixed summation order over coordinates
        d2 += diff[:, :, k] * diff[:, :, k]
    return d2


def activations(bank: RbfBank, x) -> np.ndarray:
    """Node outputs ``exp(-b_i ||x_j - a_i||^2)`` for a batch, shape (N, h)."""
    return np.exp(-sq_distances(bank, x) * bank.widths)


def activation(bank: RbfBank, i: int, x) -> float:
    """Output of node `i` at a single point `x`."""
    if not 0 <= i < bank.count_models:
        raise ShapeError(f"node index {i} outside 0..{bank.count_models - 1}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != bank.dim_in:
        raise ShapeError(f"x has dimension {x.shape[0]}, bank expects {bank.dim_in}")
    if not np.all(np.isfinite(x)):
        raise InputError("x contains non-finite entries")
    d = x - bank.centers[i]
    return float(np.exp(-bank.widths[i] * float(d @ d)))


def check_distinct_norms(x, a, rel_tol: float = 1e-12) -> bool:
    """True when no two points of `x` are equidistant from `a`.

    Two distances count as equal when they differ by at most
    ``rel_tol * max(d1, d2)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    d = np.sort(np.linalg.norm(x - a, axis=1))
    gaps = np.diff(d)
    return bool(np.all(gaps > rel_tol * d[1:]))
