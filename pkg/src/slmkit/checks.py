"""Seeded Monte-Carlo suites for the structural properties of the SLM.

Each suite returns a :class:`CheckResult` with one diagnostic line per
instance; the CLI ``check`` command prints these and sets its exit code from
:attr:`CheckResult.passed`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import frobenius_sq, numerical_rank
from .models import ElmParams, SlmParams, augment, eval_elm, eval_slm, eval_tsm_product
from .rbf import Normal, RandomSpec, check_distinct_norms, generate_bank, make_rng
from .training import Dataset, build_k_matrix, check_k_rank, fit_slm

INTERP_SIZES = tuple(itertools.product((6, 12, 30), (1, 2)))


@dataclass
class CheckResult:
    name: str
    total: int = 0
    passes: int = 0
    min_pass: int = 0
    max_deviation: float = 0.0
    lines: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.passes >= self.min_pass

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f", max deviation {self.max_deviation:.3e}" if self.max_deviation else ""
        return f"{self.name}: {status} {self.passes}/{self.total} (need {self.min_pass}){extra}"


def distinct_inputs(rng, count: int, dim: int) -> np.ndarray:
    """Standard-normal points whose augmented matrix Z has full rank."""
    while True:
        x = rng.standard_normal((count, dim))
        if numerical_rank(augment(x)) == min(count, dim + 1) and len(np.unique(x, axis=0)) == count:
            return x


def rank_suite(seeds: int = 100, max_rows: int = 30, max_cols: int = 30, base_seed: int = 0) -> CheckResult:
    """numerical_rank(K) == min(N, (n+1)h) on random small instances."""
    res = CheckResult("rank", min_pass=seeds)
    for s in range(seeds):
        rng = make_rng(base_seed + s)
        n = int(rng.integers(1, 4))
        h = int(rng.integers(1, max_cols // (n + 1) + 1))
        N = int(rng.integers(2, max_rows + 1))
        x = distinct_inputs(rng, N, n)
        bank = generate_bank(RandomSpec(seed=base_seed + s), n, h)
        data = Dataset(x, np.zeros((N, 1)))
        rank = check_k_rank(bank, data)
        want = min(N, (n + 1) * h)
        sv = np.linalg.svd(build_k_matrix(bank, data), compute_uv=False)
        cond = sv[0] / sv[min(want, sv.size) - 1]
        ok = rank == want
        res.total += 1
        res.passes += ok
        res.lines.append(f"seed={base_seed + s} N={N} n={n} h={h} rank={rank} expected={want} "
                         f"cond={cond:.3e} {'ok' if ok else 'FAIL'}")
    return res


def interpolation_instance(seed: int, N: int, n: int, m: int = 2):
    """Random exact-interpolation problem with h = N / (n+1)."""
    if N % (n + 1):
        raise ValueError(f"N={N} is not divisible by n+1={n + 1}")
    rng = make_rng(seed)
    x = distinct_inputs(rng, N, n)
    t = rng.standard_normal((N, m))
    bank = generate_bank(RandomSpec(seed=seed), n, N // (n + 1))
    return bank, Dataset(x, t)


def interpolation_suite(seeds: int = 50, sizes=INTERP_SIZES, min_pass=None,
                        tol: float = 1e-12, base_seed: int = 0) -> CheckResult:
    """Square K fits arbitrary targets: ``||K G - T||^2 <= tol ||T||^2``."""
    res = CheckResult("interpolation", min_pass=seeds if min_pass is None else min_pass)
    sizes = list(sizes)
    for s in range(seeds):
        N, n = sizes[s % len(sizes)]
        bank, data = interpolation_instance(base_seed + s, N, n)
        params, rep = fit_slm(bank, data)
        k = build_k_matrix(bank, data)
        ratio = frobenius_sq(k @ params.gamma - data.targets) / frobenius_sq(data.targets)
        sv = np.linalg.svd(k, compute_uv=False)
        cond = sv[0] / sv[-1] if sv[-1] > 0 else math.inf
        ok = ratio <= tol
        res.total += 1
        res.passes += ok
        res.max_deviation = max(res.max_deviation, ratio)
        res.lines.append(f"seed={base_seed + s} N={N} n={n} h={bank.count_models} rank={rep.rank_of_regressor} "
                         f"residual_ratio={ratio:.3e} cond={cond:.3e} {'ok' if ok else 'FAIL (ill-conditioned)'}")
    return res


def random_slm(rng, n: int, m: int, h: int, seed: int) -> SlmParams:
    bank = generate_bank(RandomSpec(seed=seed), n, h)
    return SlmParams(bank, rng.standard_normal(((n + 1) * h, m)))


def equivalence_suite(cases: int = 1000, tol: float = 1e-12, base_seed: int = 0) -> CheckResult:
    """Rule-product (Takagi-Sugeno) evaluation equals the SLM evaluation.

    Deviation is ``|tsm - slm| / (1 + |slm|)`` per output component.
    """
    res = CheckResult("equivalence", min_pass=cases)
    for s in range(cases):
        rng = make_rng(base_seed + s)
        n, m, h = int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 11))
        p = random_slm(rng, n, m, h, base_seed + s)
        x = rng.normal(0.0, 1.5, n)
        ref = eval_slm(p, x)
        dev = float(np.max(np.abs(eval_tsm_product(p, x) - ref) / (1.0 + np.abs(ref))))
        ok = dev <= tol
        res.total += 1
        res.passes += ok
        res.max_deviation = max(res.max_deviation, dev)
        if not ok:
            res.lines.append(f"seed={base_seed + s} n={n} m={m} h={h} deviation={dev:.3e} FAIL")
    res.lines.append(f"{res.total} cases, max relative deviation {res.max_deviation:.3e}")
    return res


def elm_reduction_suite(seeds: int = 20, points: int = 100, tol: float = 1e-12, base_seed: int = 0) -> CheckResult:
    """An SLM with every slope zeroed evaluates like the ELM built from its offsets."""
    res = CheckResult("elm-reduction", min_pass=seeds)
    for s in range(seeds):
        rng = make_rng(base_seed + s)
        n, m, h = int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 21))
        p = random_slm(rng, n, m, h, base_seed + s).zero_slopes()
        elm = ElmParams(p.bank, p.gamma[n::n + 1])
        dev = 0.0
        for x in rng.normal(0.0, 1.5, (points, n)):
            a, b = eval_slm(p, x), eval_elm(elm, x)
            dev = max(dev, float(np.max(np.abs(a - b) / (1.0 + np.abs(b)))))
        ok = dev <= tol
        res.total += 1
        res.passes += ok
        res.max_deviation = max(res.max_deviation, dev)
        res.lines.append(f"seed={base_seed + s} n={n} m={m} h={h} deviation={dev:.3e} {'ok' if ok else 'FAIL'}")
    return res


def fixed_points(count: int = 20, dim: int = 2, seed: int = 20240) -> np.ndarray:
    return distinct_inputs(make_rng(seed), count, dim)


def distinct_norms_suite(seeds: int = 1000, count: int = 20, dim: int = 2, base_seed: int = 0) -> CheckResult:
    """Randomly drawn centers are never equidistant from two sample points."""
    res = CheckResult("distinct-norms", min_pass=seeds)
    x = fixed_points(count, dim)
    dist = Normal(0.0, 1.0)
    for s in range(seeds):
        a = dist.sample(make_rng(base_seed + s), dim)
        ok = check_distinct_norms(x, a)
        res.total += 1
        res.passes += ok
        if not ok:
            res.lines.append(f"seed={base_seed + s} center={a.tolist()} FAIL")
    res.lines.append(f"{res.passes}/{res.total} centers give pairwise-distinct distances to {count} points")
    return res


SUITES = ("rank", "interpolation", "equivalence", "distinct-norms")
